#include <cstdio>
#include <regex>

#include "vrdf/error.hpp"
#include "vrdf/provenance.hpp"

namespace vrdf {

using namespace std::chrono;

std::string format_timestamp(Timestamp t) {
  auto day = floor<days>(t);
  year_month_day ymd{day};
  hh_mm_ss<milliseconds> tod{t - day};
  int y = static_cast<int>(ymd.year());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%04d-%02u-%02uT%02ld:%02ld:%02lld.%03lldZ", y < 0 ? "-" : "", y < 0 ? -y : y,
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                static_cast<long long>(tod.seconds().count()), static_cast<long long>(tod.subseconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  static const std::regex re(
      R"(^(-?[0-9]{4,})-([0-9]{2})-([0-9]{2})T([0-9]{2}):([0-9]{2}):([0-9]{2})(\.[0-9]+)?(Z|[+-][0-9]{2}:[0-9]{2})?$)");
  std::string s(text);
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw InvalidTerm("malformed xsd:dateTime: " + s);
  int y = std::stoi(m[1]);
  unsigned mo = static_cast<unsigned>(std::stoi(m[2])), d = static_cast<unsigned>(std::stoi(m[3]));
  int hh = std::stoi(m[4]), mi = std::stoi(m[5]), ss = std::stoi(m[6]);
  year_month_day ymd{year{y}, month{mo}, day{d}};
  bool end_of_day = hh == 24 && mi == 0 && ss == 0;
  if (!ymd.ok() || (hh > 23 && !end_of_day) || mi > 59 || ss > 59) {
    throw InvalidTerm("xsd:dateTime out of range: " + s);
  }
  long long ms = 0;
  if (m[7].matched) {
    std::string frac = m[7].str().substr(1);
    frac = (frac + "000").substr(0, 3);
    ms = std::stoll(frac);
    if (end_of_day && ms != 0) throw InvalidTerm("xsd:dateTime out of range: " + s);
  }
  Timestamp t = sys_days{ymd} + hours{hh} + minutes{mi} + seconds{ss} + milliseconds{ms};
  if (m[8].matched && m[8].str() != "Z") {
    std::string off = m[8].str();
    int oh = std::stoi(off.substr(1, 2)), om = std::stoi(off.substr(4, 2));
    if (oh > 14 || om > 59 || (oh == 14 && om != 0)) throw InvalidTerm("bad timezone offset: " + s);
    minutes offset{oh * 60 + om};
    t = off[0] == '+' ? t - offset : t + offset;
  }
  return t;
}

Timestamp now_utc() { return floor<milliseconds>(system_clock::now()); }

}  // namespace vrdf
