#include "agile/common/json_io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace agile {

std::string format_double(double value) {
  if (!std::isfinite(value)) throw std::domain_error("cannot serialize non-finite number");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  std::string out(buf, end);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

namespace {

void dump_into(std::string& out, const Json& value, int indent, int level) {
  auto newline = [&](int lvl) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (value.type()) {
    case Json::value_t::object: {
      if (value.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = value.begin(); it != value.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_into(out, it.value(), indent, level + 1);
      }
      newline(level);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (value.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line so long vectors remain readable.
      bool scalar_only = true;
      for (const auto& item : value) scalar_only = scalar_only && !item.is_structured();
      out += '[';
      bool first = true;
      for (const auto& item : value) {
        if (!first) out += scalar_only && indent >= 0 ? ", " : ",";
        first = false;
        if (!scalar_only) newline(level + 1);
        dump_into(out, item, indent, level + 1);
      }
      if (!scalar_only) newline(level);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      out += format_double(value.get<double>());
      return;
    default:
      out += value.dump();
      return;
  }
}

} // namespace

std::string canonical_dump(const Json& value, int indent) {
  std::string out;
  dump_into(out, value, indent, 0);
  return out;
}

} // namespace agile
