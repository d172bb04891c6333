#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace litsearch {

// Proleptic Gregorian calendar date. Kept as a plain y/m/d triple so it
// serializes trivially and date arithmetic stays explicit.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    // Days since 1970-01-01 (may be negative).
    std::int64_t serial_day() const;

    std::string to_iso() const; // YYYY-MM-DD
};

// Parses strict ISO-8601 calendar dates (YYYY-MM-DD). Returns nullopt on
// malformed input or an impossible date such as 2021-02-30.
std::optional<Date> parse_iso_date(const std::string& text);

// Whole days from `from` to `to`; positive when `to` is later.
std::int64_t days_between(const Date& from, const Date& to);

// Fractional years between two dates, using the mean Gregorian year length.
double years_between(const Date& from, const Date& to);

} // namespace litsearch
