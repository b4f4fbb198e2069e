#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikemon/sym_matrix.hpp"

namespace spikemon {

/// Calendar date (proleptic Gregorian), ISO formatted as YYYY-MM-DD.
struct CalDate {
    int year = 1970;
    int month = 1;
    int day = 1;

    static CalDate parse(const std::string& iso);  // throws std::invalid_argument
    std::string iso() const;

    /// Days since 1970-01-01; total order for spacing in time.
    long serial() const noexcept;

    bool is_leap_day() const noexcept;  // February 29

    /// Day-of-year in a 365-day calendar (Mar 1 is day 60 in every year).
    /// Requires !is_leap_day().
    int day_of_year_365() const;

    friend auto operator<=>(const CalDate&, const CalDate&) = default;
};

/// Daily panel of readings over a fixed set of locations. values[k] belongs
/// to locations[k]; a missing reading is an empty optional.
struct PanelSeries {
    std::vector<std::string> locations;
    struct Day {
        CalDate date;
        std::vector<std::optional<double>> values;
    };
    std::vector<Day> days;

    /// Throws std::invalid_argument unless locations are nonempty and
    /// unique, every day has one value slot per location, every present
    /// value is finite, and dates strictly increase.
    void validate() const;

    bool has_missing() const noexcept;
};

/// Per-location seasonal profile over a `period`-day calendar.
struct SeasonalModel {
    int period = 365;
    int window = 30;
    std::vector<std::vector<double>> profile;  // profile[location][day 0..period-1]
};

/// Remove February 29 entries (the seasonal calendar has 365 days).
PanelSeries drop_leap_days(const PanelSeries& series);

/// Fill interior gaps per location by linear interpolation against calendar
/// time. Missing values at the very start or end of a location's record
/// cannot be interpolated and raise std::runtime_error.
PanelSeries interpolate_missing(const PanelSeries& series);

/// Per-calendar-day average across years, then a centered circular moving
/// average of length `window` (offsets -floor(w/2) .. floor((w-1)/2); day 1
/// wraps to day `period`). February 29 entries are dropped before
/// alignment; dates beyond the period wrap via (day_of_year - 1) % period.
/// Requires every profile day to be covered at least once and no missing
/// values (interpolate first).
SeasonalModel fit_seasonal(const PanelSeries& history, int period = 365, int window = 30);

/// Subtract the seasonal profile day-wise: V_t = U_t - S_t. Missing values
/// stay missing. Dates must map into the profile (no leap days).
PanelSeries deseasonalize(const PanelSeries& series, const SeasonalModel& model);

/// M_t = V_t V_t' (n = number of locations). Any missing value is an error
/// naming the offending date and location.
std::vector<SymMatrix> outer_product_stream(const PanelSeries& series);

/// Entrywise mean of the first baseline_len matrices, subtracted from every
/// later matrix; returns the remaining stream (length - baseline_len).
std::vector<SymMatrix> center_by_baseline(std::span<const SymMatrix> stream, int baseline_len);

/// CSV with header `date,location,value`; ISO dates, empty value = missing.
/// Every (date, location) pair appears exactly once.
PanelSeries read_panel_csv(const std::filesystem::path& path);
void write_panel_csv(const PanelSeries& series, const std::filesystem::path& path);
void write_panel_csv(const PanelSeries& series, std::ostream& out);

}  // namespace spikemon
