#include "cocurve/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "cocurve/errors.hpp"

namespace cocurve {
namespace {

constexpr std::array<int, 12> kDaysInMonth = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

bool is_leap(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) {
    if (m == 2 && is_leap(y)) return 29;
    return kDaysInMonth[static_cast<std::size_t>(m - 1)];
}

int parse_int(const std::string& s, std::size_t pos, std::size_t len) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
    if (ec != std::errc{} || ptr != s.data() + pos + len) {
        throw FormatError("bad date field in '" + s + "'");
    }
    return value;
}

}  // namespace

// Howard Hinnant's civil-days algorithm.
std::int64_t Date::serial() const {
    const int y = year - (month <= 2);
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        static_cast<unsigned>((153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::from_serial(std::int64_t days) {
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : static_cast<unsigned>(-9));
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

Date Date::parse(const std::string& iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        throw FormatError("expected YYYY-MM-DD, got '" + iso + "'");
    }
    Date d{parse_int(iso, 0, 4), parse_int(iso, 5, 2), parse_int(iso, 8, 2)};
    if (!d.valid()) {
        throw FormatError("invalid calendar date '" + iso + "'");
    }
    return d;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

bool Date::valid() const {
    return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

YearMonth YearMonth::parse(const std::string& iso) {
    if (iso.size() != 7 || iso[4] != '-') {
        throw FormatError("expected YYYY-MM, got '" + iso + "'");
    }
    YearMonth ym{parse_int(iso, 0, 4), parse_int(iso, 5, 2)};
    if (!ym.valid()) {
        throw FormatError("invalid month '" + iso + "'");
    }
    return ym;
}

std::string YearMonth::iso() const {
    char buf[12];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::plus_months(int n) const {
    const int idx = year * 12 + (month - 1) + n;
    const int y = idx >= 0 ? idx / 12 : (idx - 11) / 12;
    return YearMonth{y, idx - y * 12 + 1};
}

double year_fraction(const Date& d1, const Date& d2) {
    return static_cast<double>(d2.serial() - d1.serial()) / 365.0;
}

}  // namespace cocurve
