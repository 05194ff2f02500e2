#include "agile/parser/lexer.hpp"

#include <array>
#include <cctype>

namespace agile::parser {

namespace {

constexpr std::array<std::string_view, 30> kKeywords = {
    "void",   "int",    "float",   "double",   "for",    "if",       "else",  "return",
    "while",  "do",     "goto",    "switch",   "case",   "default",  "break", "continue",
    "struct", "union",  "typedef", "char",     "long",   "short",    "unsigned",
    "signed", "const",  "static",  "extern",   "sizeof", "enum",     "volatile"};

// Longest match first.
constexpr std::array<std::string_view, 47> kPuncts = {
    "<<=", ">>=", "...", "->", "++", "--", "<=", ">=", "==", "!=", "&&", "||",
    "+=",  "-=",  "*=",  "/=", "%=", "&=", "|=", "^=", "<<", ">>", "+",  "-",
    "*",   "/",   "%",   "<",  ">",  "=",  "!",  "?",  ":",  ";",  ",",  "(",
    ")",   "[",   "]",   "{",  "}",  "&",  "|",  "^",  "~",  ".",  "#"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_trivia();
      if (pos_ >= text_.size() && !pending_error_) break;
      out.push_back(next());
    }
    out.push_back({TokenKind::End, "", loc()});
    return out;
  }

 private:
  SourceLoc loc() const { return {line_, column_}; }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == '\n') {
        advance();
        at_line_start_ = true;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#' && at_line_start_) {
        while (pos_ < text_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < text_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        block_comment();
        if (pending_error_) return;
      } else {
        return;
      }
    }
  }

  void block_comment() {
    const SourceLoc start = loc();
    advance();
    advance();
    while (pos_ < text_.size()) {
      if (peek() == '*' && peek(1) == '/') {
        advance();
        advance();
        return;
      }
      advance();
    }
    pending_error_ = true;
    pending_loc_ = start;
  }

  Token next() {
    if (pending_error_) {
      pending_error_ = false;
      return {TokenKind::Invalid, "unterminated block comment", pending_loc_};
    }
    at_line_start_ = false;
    const SourceLoc start = loc();
    const char c = peek();
    if (ident_start(c)) {
      std::string word;
      while (pos_ < text_.size() && ident_char(peek())) {
        word += peek();
        advance();
      }
      return {is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, word, start};
    }
    if (digit(c) || (c == '.' && digit(peek(1)))) return number(start);
    if (c == '"' || c == '\'') {
      advance();
      return {TokenKind::Invalid, "string and character literals are not supported", start};
    }
    for (auto p : kPuncts) {
      if (text_.substr(pos_, p.size()) == p) {
        for (std::size_t i = 0; i < p.size(); ++i) advance();
        return {TokenKind::Punct, std::string(p), start};
      }
    }
    advance();
    return {TokenKind::Invalid, std::string("unexpected character '") + c + "'", start};
  }

  Token number(SourceLoc start) {
    std::string spelling;
    auto take = [&] {
      spelling += peek();
      advance();
    };
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
      take();
      take();
      while (std::isxdigit(static_cast<unsigned char>(peek()))) take();
      if (spelling.size() == 2) return {TokenKind::Invalid, "malformed hexadecimal literal", start};
      if (ident_char(peek())) return bad_suffix(start);
      return {TokenKind::Integer, spelling, start};
    }
    bool floating = false;
    while (digit(peek())) take();
    if (peek() == '.') {
      floating = true;
      take();
      while (digit(peek())) take();
    }
    if (peek() == 'e' || peek() == 'E') {
      const char sign = peek(1);
      const bool has_sign = sign == '+' || sign == '-';
      if (digit(has_sign ? peek(2) : sign)) {
        floating = true;
        take();
        if (has_sign) take();
        while (digit(peek())) take();
      } else {
        return {TokenKind::Invalid, "malformed exponent in numeric literal", start};
      }
    }
    if (floating && (peek() == 'f' || peek() == 'F')) take();
    if (ident_char(peek())) return bad_suffix(start);
    return {floating ? TokenKind::Floating : TokenKind::Integer, spelling, start};
  }

  Token bad_suffix(SourceLoc start) {
    while (ident_char(peek())) advance();
    return {TokenKind::Invalid, "unsupported numeric literal suffix", start};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  bool at_line_start_ = true;
  bool pending_error_ = false;
  SourceLoc pending_loc_;
};

} // namespace

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

} // namespace agile::parser
