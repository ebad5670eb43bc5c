#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace cocurve {

// Proleptic Gregorian calendar date. Day counts follow ACT/365 with years
// as the unit throughout the library.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;

    // Days since 1970-01-01 (negative before).
    std::int64_t serial() const;
    static Date from_serial(std::int64_t days);

    static Date parse(const std::string& iso);  // YYYY-MM-DD
    std::string iso() const;

    bool valid() const;
};

// Calendar month, used for delivery months of futures contracts.
struct YearMonth {
    int year = 1970;
    int month = 1;

    auto operator<=>(const YearMonth&) const = default;

    static YearMonth parse(const std::string& iso);  // YYYY-MM
    std::string iso() const;

    YearMonth plus_months(int n) const;
    // First calendar day of the month (the delivery-date convention).
    Date first_day() const { return Date{year, month, 1}; }

    bool valid() const { return month >= 1 && month <= 12; }
};

inline int months_between(const YearMonth& from, const YearMonth& to) {
    return (to.year - from.year) * 12 + (to.month - from.month);
}

// ACT/365 year fraction from d1 to d2.
double year_fraction(const Date& d1, const Date& d2);

}  // namespace cocurve
