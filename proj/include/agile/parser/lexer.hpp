#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "agile/parser/ast.hpp"

namespace agile::parser {

enum class TokenKind { Identifier, Keyword, Integer, Floating, Punct, Invalid, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // for Invalid: the lexical error message
  SourceLoc loc;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return is(TokenKind::Punct, t); }
  bool is_keyword(std::string_view t) const { return is(TokenKind::Keyword, t); }
};

/// Tokenizes the whole input. Lexical errors become Invalid tokens so the
/// parser can attribute them to the enclosing function; the stream always
/// ends with an End token. Lines starting with '#' are skipped.
std::vector<Token> tokenize(std::string_view text);

bool is_keyword(std::string_view word);

} // namespace agile::parser
