#pragma once

#include <compare>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>

namespace vcpred {

/// Calendar date with deterministic month arithmetic (day-of-month clamped).
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;
};

inline bool is_leap_year(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int year, int month) {
  static const int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2 && is_leap_year(year)) return 29;
  return kDays[month - 1];
}

inline bool valid_date(const Date& d) {
  return d.month >= 1 && d.month <= 12 && d.day >= 1 &&
         d.day <= days_in_month(d.year, d.month);
}

/// Adds n calendar months, clamping the day to the target month's length
/// (e.g. Jan 31 + 1 month = Feb 28/29).
inline Date add_months(const Date& d, int n) {
  int m0 = d.year * 12 + (d.month - 1) + n;
  Date out;
  out.year = m0 / 12;
  out.month = m0 % 12 + 1;
  if (m0 < 0 && m0 % 12 != 0) {  // floor division for pre-epoch years
    out.year -= 1;
    out.month = m0 % 12 + 12 + 1;
  }
  out.day = d.day;
  int dim = days_in_month(out.year, out.month);
  if (out.day > dim) out.day = dim;
  return out;
}

/// Serial day number (days since 1970-01-01), proleptic Gregorian.
inline long days_from_civil(const Date& d) {
  long y = d.year;
  y -= d.month <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      (153 * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

inline Date civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
              static_cast<int>(d)};
}

inline Date add_days(const Date& d, long n) {
  return civil_from_days(days_from_civil(d) + n);
}

inline std::string to_string(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

/// "YYYY-MM" cohort key.
inline std::string month_key(const Date& d) {
  char buf[12];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", d.year, d.month);
  return buf;
}

inline std::optional<Date> parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  }
  Date d;
  d.year = std::stoi(s.substr(0, 4));
  d.month = std::stoi(s.substr(5, 2));
  d.day = std::stoi(s.substr(8, 2));
  if (!valid_date(d)) return std::nullopt;
  return d;
}

inline Date parse_date_or_throw(const std::string& s, const std::string& what) {
  auto d = parse_date(s);
  if (!d) throw std::runtime_error("invalid date '" + s + "' in " + what);
  return *d;
}

}  // namespace vcpred
