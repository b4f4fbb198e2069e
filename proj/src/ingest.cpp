#include "spikemon/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "csv_util.hpp"
#include "spikemon/errors.hpp"

namespace spikemon {

namespace {

bool is_leap_year(int y) noexcept {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(int y, int m) noexcept {
    static constexpr int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return lengths[m - 1];
}

// Cumulative day counts of a non-leap year, before each month.
constexpr int kMonthOffset365[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};

}  // namespace

CalDate CalDate::parse(const std::string& iso) {
    auto fail = [&] {
        throw std::invalid_argument("CalDate: expected ISO date YYYY-MM-DD, got '" + iso + "'");
    };
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') fail();
    for (std::size_t p : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (iso[p] < '0' || iso[p] > '9') fail();
    CalDate d;
    d.year = std::stoi(iso.substr(0, 4));
    d.month = std::stoi(iso.substr(5, 2));
    d.day = std::stoi(iso.substr(8, 2));
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        fail();
    return d;
}

std::string CalDate::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

long CalDate::serial() const noexcept {
    // Civil-to-days algorithm on the proleptic Gregorian calendar.
    long y = year;
    const long m = month;
    y -= m <= 2 ? 1 : 0;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const long yoe = y - era * 400;
    const long doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

bool CalDate::is_leap_day() const noexcept { return month == 2 && day == 29; }

int CalDate::day_of_year_365() const {
    if (is_leap_day())
        throw std::invalid_argument("day_of_year_365: February 29 has no 365-day index");
    // Use non-leap month offsets so e.g. March 1 is day 60 in every year.
    return kMonthOffset365[month - 1] + day;
}

void PanelSeries::validate() const {
    if (locations.empty()) throw std::invalid_argument("PanelSeries: no locations");
    std::unordered_set<std::string> seen;
    for (const std::string& loc : locations) {
        if (loc.empty()) throw std::invalid_argument("PanelSeries: empty location id");
        if (loc.find(',') != std::string::npos)
            throw std::invalid_argument("PanelSeries: location id '" + loc + "' contains a comma");
        if (!seen.insert(loc).second)
            throw std::invalid_argument("PanelSeries: duplicate location id '" + loc + "'");
    }
    const CalDate* prev = nullptr;
    for (const Day& d : days) {
        if (d.values.size() != locations.size())
            throw std::invalid_argument("PanelSeries: day " + d.date.iso() + " has " +
                                        std::to_string(d.values.size()) + " values for " +
                                        std::to_string(locations.size()) + " locations");
        for (const auto& v : d.values)
            if (v && !std::isfinite(*v))
                throw std::invalid_argument("PanelSeries: non-finite value on " + d.date.iso());
        if (prev && !(*prev < d.date))
            throw std::invalid_argument("PanelSeries: dates must strictly increase at " +
                                        d.date.iso());
        prev = &d.date;
    }
}

bool PanelSeries::has_missing() const noexcept {
    for (const Day& d : days)
        for (const auto& v : d.values)
            if (!v) return true;
    return false;
}

PanelSeries drop_leap_days(const PanelSeries& series) {
    series.validate();
    PanelSeries out;
    out.locations = series.locations;
    for (const auto& d : series.days)
        if (!d.date.is_leap_day()) out.days.push_back(d);
    return out;
}

PanelSeries interpolate_missing(const PanelSeries& series) {
    series.validate();
    PanelSeries out = series;
    const std::size_t nloc = out.locations.size();
    for (std::size_t k = 0; k < nloc; ++k) {
        std::size_t i = 0;
        while (i < out.days.size()) {
            if (out.days[i].values[k]) {
                ++i;
                continue;
            }
            // Gap [i, j); neighbors i-1 and j are present.
            std::size_t j = i;
            while (j < out.days.size() && !out.days[j].values[k]) ++j;
            if (i == 0 || j == out.days.size())
                throw std::runtime_error(
                    "interpolate_missing: location '" + out.locations[k] +
                    "' has missing values at the boundary of its record; "
                    "interpolation needs a present value on both sides");
            const double t0 = static_cast<double>(out.days[i - 1].date.serial());
            const double t1 = static_cast<double>(out.days[j].date.serial());
            const double v0 = *out.days[i - 1].values[k];
            const double v1 = *out.days[j].values[k];
            for (std::size_t g = i; g < j; ++g) {
                const double t = static_cast<double>(out.days[g].date.serial());
                out.days[g].values[k] = v0 + (v1 - v0) * (t - t0) / (t1 - t0);
            }
            i = j;
        }
    }
    return out;
}

namespace {

int profile_day(const CalDate& date, int period) {
    return (date.day_of_year_365() - 1) % period;
}

}  // namespace

SeasonalModel fit_seasonal(const PanelSeries& history, int period, int window) {
    history.validate();
    if (period < 1 || period > 365)
        throw std::invalid_argument("fit_seasonal: period must lie in [1, 365]");
    if (window < 1 || window > period)
        throw std::invalid_argument("fit_seasonal: window must lie in [1, period]");

    const std::size_t nloc = history.locations.size();
    std::vector<std::vector<double>> sum(nloc, std::vector<double>(period, 0.0));
    std::vector<long> count(period, 0);

    for (const auto& d : history.days) {
        if (d.date.is_leap_day()) continue;  // 365-day alignment drops Feb 29
        const int pd = profile_day(d.date, period);
        for (std::size_t k = 0; k < nloc; ++k) {
            if (!d.values[k])
                throw std::runtime_error("fit_seasonal: missing value on " + d.date.iso() +
                                         " at '" + history.locations[k] +
                                         "'; interpolate or clean the history first");
            sum[k][pd] += *d.values[k];
        }
        ++count[pd];
    }
    for (int pd = 0; pd < period; ++pd)
        if (count[pd] == 0)
            throw std::runtime_error("fit_seasonal: insufficient history, calendar day " +
                                     std::to_string(pd + 1) + " of " + std::to_string(period) +
                                     " is never observed");

    SeasonalModel model;
    model.period = period;
    model.window = window;
    model.profile.assign(nloc, std::vector<double>(period, 0.0));
    const int lo = -(window / 2);
    const int hi = (window - 1) / 2;  // window offsets: lo..hi, w of them
    for (std::size_t k = 0; k < nloc; ++k) {
        std::vector<double> raw(period);
        for (int pd = 0; pd < period; ++pd) raw[pd] = sum[k][pd] / static_cast<double>(count[pd]);
        for (int pd = 0; pd < period; ++pd) {
            double acc = 0.0;
            for (int off = lo; off <= hi; ++off) {
                const int wrapped = ((pd + off) % period + period) % period;
                acc += raw[wrapped];
            }
            model.profile[k][pd] = acc / window;
        }
    }
    return model;
}

PanelSeries deseasonalize(const PanelSeries& series, const SeasonalModel& model) {
    series.validate();
    if (model.period < 1 || model.profile.size() != series.locations.size())
        throw std::invalid_argument(
            "deseasonalize: model does not match the series' locations");
    for (const auto& p : model.profile)
        if (p.size() != static_cast<std::size_t>(model.period))
            throw std::invalid_argument("deseasonalize: profile length != period");

    PanelSeries out = series;
    for (auto& d : out.days) {
        if (d.date.is_leap_day())
            throw std::runtime_error("deseasonalize: " + d.date.iso() +
                                     " does not map into the 365-day profile; drop leap days");
        const int pd = profile_day(d.date, model.period);
        for (std::size_t k = 0; k < d.values.size(); ++k)
            if (d.values[k]) d.values[k] = *d.values[k] - model.profile[k][pd];
    }
    return out;
}

std::vector<SymMatrix> outer_product_stream(const PanelSeries& series) {
    series.validate();
    const int n = static_cast<int>(series.locations.size());
    std::vector<SymMatrix> out;
    out.reserve(series.days.size());
    for (const auto& d : series.days) {
        for (std::size_t k = 0; k < d.values.size(); ++k)
            if (!d.values[k])
                throw std::runtime_error("outer_product_stream: missing value on " +
                                         d.date.iso() + " at '" + series.locations[k] + "'");
        SymMatrix m(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j)
                m.lower(i, j) = *d.values[static_cast<std::size_t>(i)] *
                                *d.values[static_cast<std::size_t>(j)];
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<SymMatrix> center_by_baseline(std::span<const SymMatrix> stream, int baseline_len) {
    if (baseline_len < 1)
        throw std::invalid_argument("center_by_baseline: baseline_len must be >= 1");
    if (stream.size() <= static_cast<std::size_t>(baseline_len))
        throw std::invalid_argument(
            "center_by_baseline: stream must be longer than the baseline");
    const int n = stream.front().dim();
    for (const SymMatrix& a : stream)
        if (a.dim() != n)
            throw std::invalid_argument("center_by_baseline: matrices must share one dimension");

    SymMatrix mean(n);
    for (int t = 0; t < baseline_len; ++t)
        for (std::size_t idx = 0; idx < mean.packed().size(); ++idx)
            mean.packed()[idx] += stream[static_cast<std::size_t>(t)].packed()[idx];
    for (double& v : mean.packed()) v /= baseline_len;

    std::vector<SymMatrix> out;
    out.reserve(stream.size() - static_cast<std::size_t>(baseline_len));
    for (std::size_t t = static_cast<std::size_t>(baseline_len); t < stream.size(); ++t) {
        SymMatrix c(n);
        for (std::size_t idx = 0; idx < c.packed().size(); ++idx)
            c.packed()[idx] = stream[t].packed()[idx] - mean.packed()[idx];
        out.push_back(std::move(c));
    }
    return out;
}

PanelSeries read_panel_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line))
        throw ParseError("empty file, expected header date,location,value", 0);
    ++lineno;
    detail::strip_cr(line);
    if (line != "date,location,value")
        throw ParseError("bad header '" + line + "', expected date,location,value", lineno);

    std::vector<std::string> locations;
    std::unordered_map<std::string, std::size_t> loc_index;
    std::map<long, PanelSeries::Day> by_serial;
    std::unordered_set<long long> seen_cells;

    while (std::getline(in, line)) {
        ++lineno;
        detail::strip_cr(line);
        if (line.empty()) continue;
        const auto f = detail::split_fields(line);
        if (f.size() != 3) throw ParseError("expected 3 fields date,location,value", lineno);

        CalDate date;
        try {
            date = CalDate::parse(std::string(f[0]));
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), lineno);
        }
        const std::string loc(f[1]);
        if (loc.empty()) throw ParseError("empty location id", lineno);

        auto [it, inserted] = loc_index.try_emplace(loc, locations.size());
        if (inserted) {
            if (locations.size() >= (1u << 20)) throw ParseError("too many locations", lineno);
            locations.push_back(loc);
        }
        const std::size_t k = it->second;

        std::optional<double> value;
        if (!f[2].empty()) {
            double v = 0.0;
            if (!detail::parse_double(f[2], v)) throw ParseError("malformed value", lineno);
            if (!std::isfinite(v)) throw ParseError("value must be finite", lineno);
            value = v;
        }

        const long serial = date.serial();
        const long long cell = serial * (1ll << 20) + static_cast<long long>(k);
        if (!seen_cells.insert(cell).second)
            throw ParseError("duplicate cell " + date.iso() + " / '" + loc + "'", lineno);

        auto& day = by_serial[serial];
        day.date = date;
        if (day.values.size() <= k) day.values.resize(k + 1);
        day.values[k] = value;
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    if (by_serial.empty()) throw ParseError("no data rows", lineno);

    PanelSeries out;
    out.locations = locations;
    for (auto& [serial, day] : by_serial) {
        day.values.resize(locations.size());
        // A (date, location) pair wholly absent from the file is a format
        // violation: missing readings are marked by an empty value field.
        for (std::size_t k = 0; k < locations.size(); ++k) {
            const long long cell = serial * (1ll << 20) + static_cast<long long>(k);
            if (!seen_cells.count(cell))
                throw ParseError("no row for " + day.date.iso() + " / '" + locations[k] +
                                     "' (missing readings need an explicit empty value)",
                                 lineno);
        }
        out.days.push_back(std::move(day));
    }
    out.validate();
    return out;
}

void write_panel_csv(const PanelSeries& series, std::ostream& out) {
    out << "date,location,value\n";
    for (const auto& d : series.days) {
        const std::string date = d.date.iso();
        for (std::size_t k = 0; k < series.locations.size(); ++k) {
            out << date << ',' << series.locations[k] << ',';
            if (d.values[k]) out << detail::format_double(*d.values[k]);
            out << '\n';
        }
    }
}

void write_panel_csv(const PanelSeries& series, const std::filesystem::path& path) {
    series.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_panel_csv(series, out);
    out.flush();
    if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace spikemon
