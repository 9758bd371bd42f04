#include "lexer.hpp"

#include <cctype>

#include "vrdf/error.hpp"

namespace vrdf::syntax {

namespace {

bool is_alpha(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_hex(unsigned char c) { return std::isxdigit(c) != 0; }

// PN_CHARS_BASE approximated as ASCII letters plus any non-ASCII byte.
bool is_pn_base(unsigned char c) { return is_alpha(c) || c >= 0x80; }
bool is_pn_u(unsigned char c) { return is_pn_base(c) || c == '_'; }
bool is_pn_char(unsigned char c) { return is_pn_u(c) || is_digit(c) || c == '-'; }

bool is_local_escape(unsigned char c) {
  static constexpr std::string_view chars = "_~.-!$&'()*+,;=/?#@%";
  return chars.find(static_cast<char>(c)) != std::string_view::npos;
}

class Scanner {
 public:
  explicit Scanner(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::end;
        out.push_back(std::move(t));
        return out;
      }
      scan(t, out.empty() ? nullptr : &out.back());
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  unsigned char cur(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? static_cast<unsigned char>(src_[pos_ + ahead]) : 0;
  }
  bool has(std::size_t ahead = 0) const { return pos_ + ahead < src_.size(); }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_space() {
    while (has()) {
      unsigned char c = cur();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (has() && cur() != '\n') advance();
      } else {
        break;
      }
    }
  }

  static bool value_like(const Token* prev) {
    if (prev == nullptr) return false;
    switch (prev->kind) {
      case Tok::iri:
      case Tok::pname:
      case Tok::blank:
      case Tok::var:
      case Tok::string:
      case Tok::langtag:
      case Tok::integer:
      case Tok::decimal:
      case Tok::double_:
        return true;
      case Tok::punct:
        return prev->text == ")" || prev->text == "]";
      case Tok::name:
        return prev->text == "true" || prev->text == "false";
      default:
        return false;
    }
  }

  char32_t read_hex(std::size_t n) {
    char32_t cp = 0;
    for (std::size_t i = 0; i < n; ++i) {
      unsigned char c = cur();
      if (!is_hex(c)) fail("invalid unicode escape");
      cp = cp * 16 + static_cast<char32_t>(std::isdigit(c) ? c - '0' : std::tolower(c) - 'a' + 10);
      advance();
    }
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid code point in escape");
    return cp;
  }

  void scan(Token& t, const Token* prev) {
    unsigned char c = cur();
    if (c == '<') {
      if (try_iri(t)) return;
      t.kind = Tok::punct;
      if (cur(1) == '=') {
        t.text = "<=";
        advance(2);
      } else {
        t.text = "<";
        advance();
      }
      return;
    }
    if (c == '"' || c == '\'') return scan_string(t);
    if (c == '_' && cur(1) == ':') return scan_blank(t);
    if ((c == '?' || c == '$') && (is_pn_u(cur(1)) || is_digit(cur(1)))) {
      advance();
      t.kind = Tok::var;
      while (has() && (is_pn_u(cur()) || is_digit(cur()))) {
        t.text += static_cast<char>(cur());
        advance();
      }
      return;
    }
    if (c == '@' && is_alpha(cur(1))) {
      advance();
      t.kind = Tok::langtag;
      while (has() && (is_alpha(cur()) || is_digit(cur()) || cur() == '-')) {
        t.text += static_cast<char>(cur());
        advance();
      }
      return;
    }
    bool signed_number = (c == '+' || c == '-') &&
                         (is_digit(cur(1)) || (cur(1) == '.' && is_digit(cur(2)))) && !value_like(prev);
    if (is_digit(c) || (c == '.' && is_digit(cur(1))) || signed_number) return scan_number(t);
    if (is_pn_base(c) || c == ':') return scan_name(t);
    scan_punct(t);
  }

  bool try_iri(Token& t) {
    // Look ahead without consuming; an IRIREF is '<' ... '>' with no forbidden chars.
    std::size_t i = pos_ + 1;
    while (i < src_.size()) {
      unsigned char c = static_cast<unsigned char>(src_[i]);
      if (c == '>') break;
      if (c <= 0x20 || c == '<' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' || c == '`') {
        return false;
      }
      if (c == '\\') {
        if (i + 1 >= src_.size() || (src_[i + 1] != 'u' && src_[i + 1] != 'U')) return false;
      }
      ++i;
    }
    if (i >= src_.size()) return false;
    t.kind = Tok::iri;
    advance();  // '<'
    while (cur() != '>') {
      if (cur() == '\\') {
        advance();
        bool wide = cur() == 'U';
        advance();
        char32_t cp = read_hex(wide ? 8 : 4);
        append_utf8(t.text, cp);
      } else {
        t.text += static_cast<char>(cur());
        advance();
      }
    }
    advance();  // '>'
    return true;
  }

  void scan_string(Token& t) {
    t.kind = Tok::string;
    unsigned char q = cur();
    bool long_form = cur(1) == q && cur(2) == q;
    t.long_string = long_form;
    advance(long_form ? 3 : 1);
    for (;;) {
      if (!has()) fail("unterminated string literal");
      unsigned char c = cur();
      if (long_form) {
        if (c == q && cur(1) == q && cur(2) == q) {
          // Quotes directly before the closing delimiter belong to the value.
          while (cur(3) == q) {
            t.text += static_cast<char>(q);
            advance();
          }
          advance(3);
          return;
        }
      } else {
        if (c == q) {
          advance();
          return;
        }
        if (c == '\n' || c == '\r') fail("newline in short string literal");
      }
      if (c == '\\') {
        advance();
        unsigned char e = cur();
        advance();
        switch (e) {
          case 't': t.text += '\t'; break;
          case 'b': t.text += '\b'; break;
          case 'n': t.text += '\n'; break;
          case 'r': t.text += '\r'; break;
          case 'f': t.text += '\f'; break;
          case '"': t.text += '"'; break;
          case '\'': t.text += '\''; break;
          case '\\': t.text += '\\'; break;
          case 'u': append_utf8(t.text, read_hex(4)); break;
          case 'U': append_utf8(t.text, read_hex(8)); break;
          default: fail("invalid escape sequence in string literal");
        }
        continue;
      }
      t.text += static_cast<char>(c);
      advance();
    }
  }

  void scan_blank(Token& t) {
    t.kind = Tok::blank;
    advance(2);
    if (!(is_pn_u(cur()) || is_digit(cur()))) fail("invalid blank node label");
    while (has() && (is_pn_char(cur()) || cur() == '.')) {
      if (cur() == '.' && !(is_pn_char(cur(1)) || cur(1) == '.')) break;
      t.text += static_cast<char>(cur());
      advance();
    }
  }

  void scan_number(Token& t) {
    t.kind = Tok::integer;
    if (cur() == '+' || cur() == '-') {
      t.text += static_cast<char>(cur());
      advance();
    }
    while (is_digit(cur())) {
      t.text += static_cast<char>(cur());
      advance();
    }
    if (cur() == '.' && is_digit(cur(1))) {
      t.kind = Tok::decimal;
      t.text += '.';
      advance();
      while (is_digit(cur())) {
        t.text += static_cast<char>(cur());
        advance();
      }
    }
    if ((cur() == 'e' || cur() == 'E') &&
        (is_digit(cur(1)) || ((cur(1) == '+' || cur(1) == '-') && is_digit(cur(2))))) {
      t.kind = Tok::double_;
      t.text += static_cast<char>(cur());
      advance();
      if (cur() == '+' || cur() == '-') {
        t.text += static_cast<char>(cur());
        advance();
      }
      while (is_digit(cur())) {
        t.text += static_cast<char>(cur());
        advance();
      }
    }
  }

  void scan_name(Token& t) {
    std::string prefix;
    if (cur() != ':') {
      while (has() && (is_pn_char(cur()) || cur() == '.')) {
        if (cur() == '.' && !(is_pn_char(cur(1)) || cur(1) == '.' || cur(1) == ':')) break;
        prefix += static_cast<char>(cur());
        advance();
      }
    }
    if (cur() != ':') {
      t.kind = Tok::name;
      t.text = std::move(prefix);
      return;
    }
    advance();  // ':'
    t.kind = Tok::pname;
    t.text = prefix + ":";
    bool first = true;
    while (has()) {
      unsigned char c = cur();
      if (c == '%') {
        if (!is_hex(cur(1)) || !is_hex(cur(2))) fail("invalid percent escape in local name");
        t.text += static_cast<char>(c);
        t.text += static_cast<char>(cur(1));
        t.text += static_cast<char>(cur(2));
        advance(3);
      } else if (c == '\\') {
        if (!is_local_escape(cur(1))) fail("invalid escape in local name");
        t.text += static_cast<char>(cur(1));
        advance(2);
      } else if (is_pn_u(c) || is_digit(c) || c == ':' || (!first && (c == '-' || c == '.'))) {
        if (c == '.') {
          unsigned char n = cur(1);
          if (!(is_pn_char(n) || n == '.' || n == ':' || n == '%' || n == '\\')) break;
        }
        t.text += static_cast<char>(c);
        advance();
      } else {
        break;
      }
      first = false;
    }
  }

  void scan_punct(Token& t) {
    t.kind = Tok::punct;
    static constexpr std::string_view two[] = {"^^", "&&", "||", "!=", ">="};
    for (auto p : two) {
      if (cur() == static_cast<unsigned char>(p[0]) && cur(1) == static_cast<unsigned char>(p[1])) {
        t.text = std::string(p);
        advance(2);
        return;
      }
    }
    static constexpr std::string_view singles = "{}()[].,;*/|^+-!=<>?";
    if (singles.find(static_cast<char>(cur())) == std::string_view::npos) {
      fail(std::string("unexpected character '") + static_cast<char>(cur()) + "'");
    }
    t.text = std::string(1, static_cast<char>(cur()));
    advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace

bool Token::is_keyword(std::string_view kw) const {
  if (kind != Tok::name || text.size() != kw.size()) return false;
  for (std::size_t i = 0; i < kw.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(text[i])) != std::toupper(static_cast<unsigned char>(kw[i]))) {
      return false;
    }
  }
  return true;
}

std::vector<Token> tokenize(std::string_view src) { return Scanner(src).run(); }

void TokenStream::expect_punct(std::string_view p) {
  if (!accept_punct(p)) fail("expected '" + std::string(p) + "' but found " + describe(peek()));
}

void TokenStream::expect_keyword(std::string_view kw) {
  if (!accept_keyword(kw)) fail("expected " + std::string(kw) + " but found " + describe(peek()));
}

void TokenStream::fail(const std::string& message) const { fail(message, peek()); }

void TokenStream::fail(const std::string& message, const Token& at) const {
  throw ParseError(message, at.line, at.column);
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::end: return "end of input";
    case Tok::iri: return "<" + t.text + ">";
    case Tok::blank: return "_:" + t.text;
    case Tok::var: return "?" + t.text;
    case Tok::string: return "string literal";
    case Tok::langtag: return "@" + t.text;
    default: return "'" + t.text + "'";
  }
}

std::string expand_pname(const Token& t, const std::map<std::string, std::string>& prefixes,
                         const TokenStream& ts) {
  auto colon = t.text.find(':');
  auto prefix = t.text.substr(0, colon);
  auto it = prefixes.find(prefix);
  if (it == prefixes.end()) ts.fail("undeclared prefix '" + prefix + ":'", t);
  return it->second + t.text.substr(colon + 1);
}

std::string resolve_iri(std::string_view base, std::string_view ref) {
  if (base.empty()) return std::string(ref);
  // Absolute reference (has a scheme).
  auto colon = ref.find(':');
  if (colon != std::string_view::npos && colon > 0 && is_alpha(static_cast<unsigned char>(ref[0]))) {
    bool scheme = true;
    for (std::size_t i = 1; i < colon; ++i) {
      unsigned char c = static_cast<unsigned char>(ref[i]);
      if (!(is_alpha(c) || is_digit(c) || c == '+' || c == '-' || c == '.')) scheme = false;
    }
    if (scheme) return std::string(ref);
  }
  std::string b(base);
  if (ref.empty()) return b.substr(0, b.find('#'));
  if (ref[0] == '#') return b.substr(0, b.find('#')) + std::string(ref);
  auto scheme_end = b.find("://");
  std::size_t authority_end = scheme_end == std::string::npos ? b.find(':') + 1 : b.find('/', scheme_end + 3);
  if (authority_end == std::string::npos) authority_end = b.size();
  if (ref.size() >= 2 && ref[0] == '/' && ref[1] == '/') return b.substr(0, b.find(':') + 1) + std::string(ref);
  if (ref[0] == '/') return b.substr(0, authority_end) + std::string(ref);
  std::string dir = b.substr(0, b.find_first_of("?#"));
  auto slash = dir.rfind('/');
  dir = (slash == std::string::npos || slash < authority_end) ? b.substr(0, authority_end) + "/" : dir.substr(0, slash + 1);
  std::string merged = dir + std::string(ref);
  // Remove dot segments in the path part.
  std::string head = merged.substr(0, authority_end);
  std::string path = merged.substr(authority_end);
  std::vector<std::string> out;
  std::size_t i = 0;
  std::string tail;
  auto q = path.find_first_of("?#");
  if (q != std::string::npos) {
    tail = path.substr(q);
    path = path.substr(0, q);
  }
  while (i <= path.size()) {
    auto j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    std::string seg = path.substr(i, j - i);
    if (seg == "..") {
      if (out.size() > 1) out.pop_back();
      if (j == path.size()) out.emplace_back();
    } else if (seg == ".") {
      if (j == path.size()) out.emplace_back();
    } else {
      out.push_back(seg);
    }
    i = j + 1;
  }
  std::string joined;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k > 0) joined += '/';
    joined += out[k];
  }
  return head + joined + tail;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

}  // namespace vrdf::syntax
