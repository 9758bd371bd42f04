#include <array>
#include <cctype>
#include <optional>

#include "vrdf/error.hpp"
#include "vrdf/shacl.hpp"
#include "vrdf/vocab.hpp"

// Hand-written scanners for the XSD 1.1 lexical spaces we support. Each
// scanner consumes from `pos` and reports success; callers check that the
// whole input was consumed.

namespace vrdf {

namespace {

namespace xsd = vocab::xsd;

bool digit(char c) { return c >= '0' && c <= '9'; }

class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  bool done() const { return pos_ == s_.size(); }
  bool peek(char c) const { return pos_ < s_.size() && s_[pos_] == c; }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }

  /// Exactly `n` digits.
  std::optional<int> digits(int n) {
    if (pos_ + n > s_.size()) return std::nullopt;
    int v = 0;
    for (int i = 0; i < n; ++i) {
      char c = s_[pos_ + i];
      if (!digit(c)) return std::nullopt;
      v = v * 10 + (c - '0');
    }
    pos_ += n;
    return v;
  }

  std::size_t digit_run() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && digit(s_[pos_])) ++pos_;
    return pos_ - start;
  }

  /// yearFrag: '-'? ([1-9] digit{3,} | '0' digit{3}). Returns the year value;
  /// very long years keep only their last twelve digits, which preserves the
  /// value mod 400 needed for leap-year checks.
  std::optional<long long> year() {
    bool negative = accept('-');
    std::size_t start = pos_;
    std::size_t n = digit_run();
    if (n < 4) return std::nullopt;
    if (n > 4 && s_[start] == '0') return std::nullopt;
    long long v = 0;
    for (std::size_t i = (n > 12 ? start + n - 12 : start); i < start + n; ++i) v = v * 10 + (s_[i] - '0');
    return negative ? -v : v;
  }

  std::optional<int> month() {
    auto m = digits(2);
    if (!m || *m < 1 || *m > 12) return std::nullopt;
    return m;
  }

  /// Optional timezone: Z | (+|-) hh:mm with |offset| <= 14:00.
  bool timezone() {
    if (done()) return true;
    if (accept('Z')) return true;
    if (!accept('+') && !accept('-')) return false;
    auto h = digits(2);
    if (!h || !accept(':')) return false;
    auto m = digits(2);
    if (!m || *m > 59) return false;
    return *h < 14 || (*h == 14 && *m == 0);
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

bool leap(long long y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(long long y, int m) {
  static constexpr std::array<int, 12> days = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && leap(y) ? 29 : days[m - 1];
}

bool scan_date(Scanner& sc) {
  auto y = sc.year();
  if (!y || !sc.accept('-')) return false;
  auto m = sc.month();
  if (!m || !sc.accept('-')) return false;
  auto d = sc.digits(2);
  return d && *d >= 1 && *d <= days_in_month(*y, *m);
}

bool valid_integer(std::string_view v) {
  Scanner sc(v);
  if (!sc.accept('+')) sc.accept('-');
  return sc.digit_run() > 0 && sc.done();
}

bool valid_decimal(std::string_view v) {
  Scanner sc(v);
  if (!sc.accept('+')) sc.accept('-');
  std::size_t whole = sc.digit_run();
  std::size_t frac = 0;
  if (sc.accept('.')) frac = sc.digit_run();
  return (whole > 0 || frac > 0) && sc.done();
}

bool valid_date(std::string_view v) {
  Scanner sc(v);
  return scan_date(sc) && sc.timezone() && sc.done();
}

bool valid_g_year_month(std::string_view v) {
  Scanner sc(v);
  if (!sc.year() || !sc.accept('-') || !sc.month()) return false;
  return sc.timezone() && sc.done();
}

bool valid_g_year(std::string_view v) {
  Scanner sc(v);
  return sc.year() && sc.timezone() && sc.done();
}

bool valid_date_time(std::string_view v) {
  Scanner sc(v);
  if (!scan_date(sc) || !sc.accept('T')) return false;
  auto h = sc.digits(2);
  if (!h || !sc.accept(':')) return false;
  auto mi = sc.digits(2);
  if (!mi || !sc.accept(':')) return false;
  auto s = sc.digits(2);
  if (!s) return false;
  bool fraction_nonzero = false;
  if (sc.accept('.')) {
    std::size_t start = sc.pos();
    std::size_t n = sc.digit_run();
    if (n == 0) return false;
    for (std::size_t i = start; i < start + n; ++i) fraction_nonzero = fraction_nonzero || v[i] != '0';
  }
  if (*h == 24) {
    // endOfDayFrag: 24:00:00 with an all-zero fraction.
    if (*mi != 0 || *s != 0 || fraction_nonzero) return false;
  } else if (*h > 23 || *mi > 59 || *s > 59) {
    return false;
  }
  return sc.timezone() && sc.done();
}

bool valid_boolean(std::string_view v) { return v == "true" || v == "false" || v == "1" || v == "0"; }

/// XML 1.0 Char production over UTF-8 input.
bool valid_string(std::string_view v) {
  for (std::size_t i = 0; i < v.size();) {
    auto c = static_cast<unsigned char>(v[i]);
    std::size_t len;
    char32_t cp;
    if (c < 0x80) {
      len = 1;
      cp = c;
    } else if ((c >> 5) == 0x6) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c >> 4) == 0xE) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c >> 3) == 0x1E) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > v.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      auto cc = static_cast<unsigned char>(v[i + k]);
      if ((cc >> 6) != 0x2) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    bool ok = cp == 0x9 || cp == 0xA || cp == 0xD || (cp >= 0x20 && cp <= 0xD7FF) ||
              (cp >= 0xE000 && cp <= 0xFFFD) || (cp >= 0x10000 && cp <= 0x10FFFF);
    if (!ok) return false;
    i += len;
  }
  return true;
}

bool hex(char c) { return std::isxdigit(static_cast<unsigned char>(c)) != 0; }

/// Lenient IRI-reference check: printable, no characters that can never
/// appear in an IRI, and well-formed percent escapes.
bool valid_any_uri(std::string_view v) {
  if (!valid_string(v)) return false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto c = static_cast<unsigned char>(v[i]);
    if (c <= 0x20 || c == 0x7F) return false;
    switch (c) {
      case '<':
      case '>':
      case '"':
      case '{':
      case '}':
      case '|':
      case '\\':
      case '^':
      case '`':
        return false;
      case '%':
        if (i + 2 >= v.size()) return false;
        if (!hex(v[i + 1]) || !hex(v[i + 2])) return false;
        break;
      default:
        break;
    }
  }
  return true;
}

}  // namespace

bool is_supported_datatype(std::string_view dt) {
  return dt == xsd::string || dt == xsd::integer || dt == xsd::decimal || dt == xsd::boolean || dt == xsd::date ||
         dt == xsd::gYearMonth || dt == xsd::gYear || dt == xsd::dateTime || dt == xsd::anyURI;
}

bool lexical_valid(std::string_view value, std::string_view dt) {
  if (dt == xsd::string) return valid_string(value);
  if (dt == xsd::integer) return valid_integer(value);
  if (dt == xsd::decimal) return valid_decimal(value);
  if (dt == xsd::boolean) return valid_boolean(value);
  if (dt == xsd::date) return valid_date(value);
  if (dt == xsd::gYearMonth) return valid_g_year_month(value);
  if (dt == xsd::gYear) return valid_g_year(value);
  if (dt == xsd::dateTime) return valid_date_time(value);
  if (dt == xsd::anyURI) return valid_any_uri(value);
  throw InvalidRequest("unsupported datatype for lexical validation: " + std::string(dt));
}

}  // namespace vrdf
