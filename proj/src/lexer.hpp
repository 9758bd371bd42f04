#pragma once

// Tokenizer shared by the N-Quads, Turtle and SPARQL parsers. Not installed.

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vrdf::syntax {

enum class Tok {
  end,
  iri,       // text = IRI without brackets, escapes decoded
  pname,     // text = "prefix:local" with local escapes decoded
  blank,     // text = label without "_:"
  var,       // text = name without '?' / '$'
  string,    // text = decoded value
  langtag,   // text = tag without '@' (also "prefix"/"base" directives)
  integer,
  decimal,
  double_,
  name,      // bare word: keyword, function name, 'a', true/false
  punct,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t line = 1;
  std::size_t column = 1;
  bool long_string = false;

  bool is(Tok k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return kind == Tok::punct && text == t; }
  /// Case-insensitive keyword match.
  bool is_keyword(std::string_view kw) const;
};

/// Tokenizes the whole input up front. Throws ParseError on lexical errors.
std::vector<Token> tokenize(std::string_view src);

/// Cursor over a token vector with error helpers.
class TokenStream {
 public:
  explicit TokenStream(std::string_view src) : tokens_(tokenize(src)) {}

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  Token next() {
    Token t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::end; }

  bool accept_punct(std::string_view p) {
    if (peek().is_punct(p)) {
      next();
      return true;
    }
    return false;
  }
  bool accept_keyword(std::string_view kw) {
    if (peek().is_keyword(kw)) {
      next();
      return true;
    }
    return false;
  }
  void expect_punct(std::string_view p);
  void expect_keyword(std::string_view kw);

  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] void fail(const std::string& message, const Token& at) const;

 private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

std::string describe(const Token& t);

/// Expands a pname token against declared prefixes; fails on unknown prefix.
std::string expand_pname(const Token& t, const std::map<std::string, std::string>& prefixes,
                         const TokenStream& ts);

/// Minimal RFC 3986 reference resolution for relative IRIs in documents.
std::string resolve_iri(std::string_view base, std::string_view ref);

void append_utf8(std::string& out, char32_t cp);

}  // namespace vrdf::syntax
