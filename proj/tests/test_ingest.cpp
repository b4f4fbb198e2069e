#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "spikemon/detector.hpp"
#include "spikemon/eigensolve.hpp"
#include "spikemon/errors.hpp"
#include "spikemon/ingest.hpp"
#include "spikemon/quantiles.hpp"
#include "spikemon/series.hpp"

using spikemon::CalDate;
using spikemon::PanelSeries;
using spikemon::SeasonalModel;
using spikemon::SymMatrix;

namespace {

bool leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static const int lens[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && leap_year(y)) return 29;
    return lens[m - 1];
}

// Consecutive calendar dates covering [from_year, to_year], leap days included.
std::vector<CalDate> calendar_range(int from_year, int to_year) {
    std::vector<CalDate> out;
    for (int y = from_year; y <= to_year; ++y)
        for (int m = 1; m <= 12; ++m)
            for (int d = 1; d <= days_in_month(y, m); ++d) out.push_back(CalDate{y, m, d});
    return out;
}

PanelSeries make_panel(const std::vector<std::string>& locations,
                       const std::vector<CalDate>& dates,
                       const std::vector<std::vector<double>>& values) {
    PanelSeries p;
    p.locations = locations;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        PanelSeries::Day day;
        day.date = dates[i];
        for (double v : values[i]) day.values.emplace_back(v);
        p.days.push_back(std::move(day));
    }
    return p;
}

}  // namespace

TEST_CASE("dates parse strictly and reject impossible values") {
    const auto d = CalDate::parse("2020-02-29");
    CHECK(d.year == 2020);
    CHECK(d.month == 2);
    CHECK(d.day == 29);
    CHECK(d.is_leap_day());
    CHECK(d.iso() == "2020-02-29");

    CHECK_THROWS_AS(CalDate::parse("2019-02-29"), std::invalid_argument);  // not a leap year
    CHECK_THROWS_AS(CalDate::parse("2020-13-01"), std::invalid_argument);
    CHECK_THROWS_AS(CalDate::parse("2020-00-10"), std::invalid_argument);
    CHECK_THROWS_AS(CalDate::parse("2020-04-31"), std::invalid_argument);
    CHECK_THROWS_AS(CalDate::parse("2020-4-01"), std::invalid_argument);   // not zero-padded
    CHECK_THROWS_AS(CalDate::parse("20-04-01"), std::invalid_argument);
    CHECK_THROWS_AS(CalDate::parse("2020/04/01"), std::invalid_argument);
    CHECK_THROWS_AS(CalDate::parse("2020-04-01x"), std::invalid_argument);
    CHECK_THROWS_AS(CalDate::parse(""), std::invalid_argument);
}

TEST_CASE("serial numbers count days and order dates") {
    CHECK(CalDate{1970, 1, 1}.serial() == 0);
    CHECK(CalDate{1970, 1, 2}.serial() == 1);
    CHECK(CalDate{1971, 1, 1}.serial() == 365);
    CHECK(CalDate{1972, 3, 1}.serial() - CalDate{1972, 2, 28}.serial() == 2);  // leap year
    CHECK(CalDate{2020, 3, 14} > CalDate{2020, 2, 29});

    // Serial is consistent with day-by-day iteration over half a century.
    long prev = CalDate{1999, 12, 31}.serial();
    for (const auto& d : calendar_range(2000, 2005)) {
        CHECK(d.serial() == prev + 1);
        prev = d.serial();
    }
}

TEST_CASE("day-of-year in the 365-day calendar skips the leap day") {
    CHECK(CalDate{2019, 1, 1}.day_of_year_365() == 1);
    CHECK(CalDate{2019, 12, 31}.day_of_year_365() == 365);
    CHECK(CalDate{2019, 3, 1}.day_of_year_365() == 60);
    CHECK(CalDate{2020, 3, 1}.day_of_year_365() == 60);  // same slot in leap years
    CHECK(CalDate{2020, 12, 31}.day_of_year_365() == 365);
    const CalDate leap{2020, 2, 29};
    CHECK_THROWS_AS(leap.day_of_year_365(), std::invalid_argument);
}

TEST_CASE("panel validation catches structural problems") {
    auto p = make_panel({"a", "b"}, {CalDate{2020, 1, 1}, CalDate{2020, 1, 2}},
                        {{1.0, 2.0}, {3.0, 4.0}});
    CHECK_NOTHROW(p.validate());
    CHECK_FALSE(p.has_missing());

    auto dup = p;
    dup.locations = {"a", "a"};
    CHECK_THROWS_AS(dup.validate(), std::invalid_argument);

    auto ragged = p;
    ragged.days[0].values.pop_back();
    CHECK_THROWS_AS(ragged.validate(), std::invalid_argument);

    auto unsorted = p;
    std::swap(unsorted.days[0], unsorted.days[1]);
    CHECK_THROWS_AS(unsorted.validate(), std::invalid_argument);

    auto repeated = p;
    repeated.days[1].date = repeated.days[0].date;
    CHECK_THROWS_AS(repeated.validate(), std::invalid_argument);

    auto infinite = p;
    infinite.days[0].values[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(infinite.validate(), std::invalid_argument);

    auto missing = p;
    missing.days[0].values[0] = std::nullopt;
    CHECK_NOTHROW(missing.validate());
    CHECK(missing.has_missing());
}

TEST_CASE("leap-day rows are dropped, everything else is kept") {
    auto p = make_panel({"x"},
                        {CalDate{2020, 2, 28}, CalDate{2020, 2, 29}, CalDate{2020, 3, 1}},
                        {{1.0}, {2.0}, {3.0}});
    const auto out = spikemon::drop_leap_days(p);
    REQUIRE(out.days.size() == 2);
    CHECK(out.days[0].date == CalDate{2020, 2, 28});
    CHECK(out.days[1].date == CalDate{2020, 3, 1});
    CHECK(out.days[0].values[0] == 1.0);
    CHECK(out.days[1].values[0] == 3.0);
}

TEST_CASE("interior gaps interpolate linearly against calendar time") {
    auto p = make_panel({"x", "y"},
                        {CalDate{2020, 1, 1}, CalDate{2020, 1, 2}, CalDate{2020, 1, 3},
                         CalDate{2020, 1, 4}},
                        {{0.0, 5.0}, {1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}});
    p.days[1].values[0] = std::nullopt;
    p.days[2].values[0] = std::nullopt;
    const auto filled = spikemon::interpolate_missing(p);
    CHECK(filled.days[1].values[0].value() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(filled.days[2].values[0].value() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(filled.has_missing());

    // Interpolation weights follow the actual day spacing, not the row index.
    auto gappy = make_panel({"x"},
                            {CalDate{2020, 1, 1}, CalDate{2020, 1, 2}, CalDate{2020, 1, 10}},
                            {{0.0}, {0.0}, {9.0}});
    gappy.days[1].values[0] = std::nullopt;
    const auto out = spikemon::interpolate_missing(gappy);
    CHECK(out.days[1].values[0].value() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("missing values at a record boundary cannot be interpolated") {
    auto front = make_panel({"x"}, {CalDate{2020, 1, 1}, CalDate{2020, 1, 2}}, {{1.0}, {2.0}});
    front.days[0].values[0] = std::nullopt;
    CHECK_THROWS_AS(spikemon::interpolate_missing(front), std::runtime_error);

    auto back = make_panel({"x"}, {CalDate{2020, 1, 1}, CalDate{2020, 1, 2}}, {{1.0}, {2.0}});
    back.days[1].values[0] = std::nullopt;
    CHECK_THROWS_AS(spikemon::interpolate_missing(back), std::runtime_error);
}

TEST_CASE("constant history fits a constant profile") {
    const auto dates = calendar_range(2018, 2019);
    std::vector<std::vector<double>> values(dates.size(), {7.25, -3.5});
    const auto model = spikemon::fit_seasonal(make_panel({"a", "b"}, dates, values));
    REQUIRE(model.profile.size() == 2);
    REQUIRE(model.profile[0].size() == 365);
    for (int d = 0; d < 365; ++d) {
        CHECK(model.profile[0][static_cast<std::size_t>(d)] == doctest::Approx(7.25).epsilon(1e-12));
        CHECK(model.profile[1][static_cast<std::size_t>(d)] == doctest::Approx(-3.5).epsilon(1e-12));
    }
}

TEST_CASE("window one reproduces a pure seasonal signal exactly") {
    const auto dates = calendar_range(2019, 2019);  // one non-leap year
    std::vector<std::vector<double>> values;
    for (const auto& d : dates)
        values.push_back({10.0 + 3.0 * std::sin(2.0 * 3.14159265358979323846 *
                                                 d.day_of_year_365() / 365.0)});
    const auto model = spikemon::fit_seasonal(make_panel({"s"}, dates, values), 365, 1);
    for (std::size_t d = 0; d < 365; ++d)
        CHECK(model.profile[0][d] ==
              doctest::Approx(values[d][0]).epsilon(1e-12));
}

TEST_CASE("five noisy years recover the profile within the averaging envelope") {
    const auto dates = calendar_range(2015, 2019);
    const double noise_sd = 0.8;
    std::mt19937_64 gen(2025);
    std::normal_distribution<double> noise(0.0, noise_sd);

    auto truth = [](int doy, int loc) {
        return 10.0 * (loc + 1) +
               4.0 * std::sin(2.0 * 3.14159265358979323846 * doy / 365.0 + loc);
    };
    std::vector<std::vector<double>> values;
    values.reserve(dates.size());
    std::vector<std::vector<double>> raw_sum(2, std::vector<double>(365, 0.0));
    std::vector<std::vector<int>> raw_count(2, std::vector<int>(365, 0));
    for (const auto& d : dates) {
        std::vector<double> row;
        for (int loc = 0; loc < 2; ++loc) {
            double v;
            if (d.is_leap_day()) {
                v = truth(60, loc) + noise(gen);  // dropped by the fit anyway
            } else {
                v = truth(d.day_of_year_365(), loc) + noise(gen);
                raw_sum[static_cast<std::size_t>(loc)][static_cast<std::size_t>(d.day_of_year_365() - 1)] += v;
                raw_count[static_cast<std::size_t>(loc)][static_cast<std::size_t>(d.day_of_year_365() - 1)] += 1;
            }
            row.push_back(v);
        }
        values.push_back(std::move(row));
    }

    const int window = 30;
    const auto model = spikemon::fit_seasonal(make_panel({"p", "q"}, dates, values), 365, window);

    // Naive re-implementation: per-day mean across years, then an explicit
    // circular moving average with offsets -15 .. 14.
    for (int loc = 0; loc < 2; ++loc) {
        for (int d = 0; d < 365; ++d) {
            double acc = 0.0;
            for (int off = -(window / 2); off <= (window - 1) / 2; ++off) {
                const int day = ((d + off) % 365 + 365) % 365;
                acc += raw_sum[static_cast<std::size_t>(loc)][static_cast<std::size_t>(day)] /
                       raw_count[static_cast<std::size_t>(loc)][static_cast<std::size_t>(day)];
            }
            const double naive = acc / window;
            REQUIRE(model.profile[static_cast<std::size_t>(loc)][static_cast<std::size_t>(d)] ==
                    doctest::Approx(naive).epsilon(1e-10));
        }
    }

    // And the smoothed profile tracks the truth: the moving average of a
    // slow sinusoid is biased by well under the noise envelope, so a
    // noise_sd/sqrt(5) + smoothing-bias bound holds with big margin.
    for (int loc = 0; loc < 2; ++loc)
        for (int d = 0; d < 365; ++d) {
            const double err = std::abs(
                model.profile[static_cast<std::size_t>(loc)][static_cast<std::size_t>(d)] -
                truth(d + 1, loc));
            CHECK(err < 4.0 * noise_sd / std::sqrt(5.0 * window) + 0.15);
        }
}

TEST_CASE("fit rejects missing values and uncovered days") {
    auto missing = make_panel({"x"}, {CalDate{2019, 1, 1}, CalDate{2019, 1, 2}}, {{1.0}, {2.0}});
    missing.days[1].values[0] = std::nullopt;
    CHECK_THROWS_AS(spikemon::fit_seasonal(missing), std::runtime_error);

    // Two days of history cannot cover 365 profile days.
    auto thin = make_panel({"x"}, {CalDate{2019, 1, 1}, CalDate{2019, 1, 2}}, {{1.0}, {2.0}});
    CHECK_THROWS_AS(spikemon::fit_seasonal(thin), std::runtime_error);
}

TEST_CASE("deseasonalizing the profile itself leaves zeros") {
    const auto dates = calendar_range(2019, 2019);
    std::vector<std::vector<double>> values;
    for (const auto& d : dates)
        values.push_back({5.0 + std::cos(2.0 * 3.14159265358979323846 *
                                         d.day_of_year_365() / 365.0)});
    auto panel = make_panel({"s"}, dates, values);
    const auto model = spikemon::fit_seasonal(panel, 365, 1);
    const auto out = spikemon::deseasonalize(panel, model);
    for (const auto& day : out.days)
        CHECK(std::abs(day.values[0].value()) < 1e-12);
}

TEST_CASE("a zero profile makes deseasonalize the identity") {
    SeasonalModel zero;
    zero.period = 365;
    zero.window = 1;
    zero.profile = {std::vector<double>(365, 0.0)};
    auto panel = make_panel({"s"}, {CalDate{2020, 5, 15}, CalDate{2020, 5, 16}},
                            {{3.25}, {-1.5}});
    const auto out = spikemon::deseasonalize(panel, zero);
    CHECK(out.days[0].values[0].value() == 3.25);
    CHECK(out.days[1].values[0].value() == -1.5);
}

TEST_CASE("deseasonalize spot check and error cases") {
    SeasonalModel model;
    model.period = 365;
    model.window = 1;
    model.profile = {std::vector<double>(365, 0.0)};
    // May 15 in the 365-day calendar is day 135.
    CHECK(CalDate{2020, 5, 15}.day_of_year_365() == 135);
    model.profile[0][134] = 2.5;
    auto panel = make_panel({"s"}, {CalDate{2020, 5, 15}}, {{10.0}});
    const auto out = spikemon::deseasonalize(panel, model);
    CHECK(out.days[0].values[0].value() == doctest::Approx(7.5).epsilon(1e-15));

    // Leap days have no profile slot.
    auto leap = make_panel({"s"}, {CalDate{2020, 2, 29}}, {{1.0}});
    CHECK_THROWS_AS(spikemon::deseasonalize(leap, model), std::runtime_error);

    // Missing values stay missing.
    auto missing = make_panel({"s"}, {CalDate{2020, 5, 15}}, {{1.0}});
    missing.days[0].values[0] = std::nullopt;
    const auto still = spikemon::deseasonalize(missing, model);
    CHECK_FALSE(still.days[0].values[0].has_value());
}

TEST_CASE("outer products match the hand calculation") {
    auto panel = make_panel({"a", "b"}, {CalDate{2020, 1, 1}, CalDate{2020, 1, 2}},
                            {{1.0, 2.0}, {0.0, 0.0}});
    const auto stream = spikemon::outer_product_stream(panel);
    REQUIRE(stream.size() == 2);
    CHECK(stream[0](0, 0) == 1.0);
    CHECK(stream[0](0, 1) == 2.0);
    CHECK(stream[0](1, 0) == 2.0);
    CHECK(stream[0](1, 1) == 4.0);
    CHECK(stream[1] == SymMatrix(2));
}

TEST_CASE("outer products have the right trace and rank-one spectrum") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + rep % 5;
        std::vector<double> v(static_cast<std::size_t>(n));
        double norm2 = 0.0;
        for (auto& x : v) {
            x = dist(gen);
            norm2 += x * x;
        }
        auto panel = make_panel({"a", "b", "c", "d", "e", "f"}, {CalDate{2020, 1, 1}}, {{}});
        panel.locations.resize(static_cast<std::size_t>(n));
        for (double x : v) panel.days[0].values.emplace_back(x);
        const auto stream = spikemon::outer_product_stream(panel);
        REQUIRE(stream.size() == 1);
        const auto& mat = stream[0];

        double trace = 0.0;
        for (int i = 0; i < n; ++i) trace += mat(i, i);
        CHECK(trace == doctest::Approx(norm2).epsilon(1e-12));

        // Positive semidefinite with one nonzero eigenvalue: the smallest
        // eigenvalue is ~0 and everything but the top one is ~0 (top equals
        // the trace for a PSD rank-one matrix).
        const double top = spikemon::largest_eigenvalue(mat);
        CHECK(top == doctest::Approx(norm2).epsilon(1e-10));
        SymMatrix neg = mat;
        for (auto& x : neg.packed()) x = -x;
        const double smallest = -spikemon::largest_eigenvalue(neg);
        CHECK(smallest >= -1e-10 * std::max(1.0, norm2));
        CHECK(std::abs(trace - top) <= 1e-10 * std::max(1.0, norm2));
    }
}

TEST_CASE("outer products refuse missing values, naming the cell") {
    auto panel = make_panel({"east", "west"}, {CalDate{2020, 7, 4}}, {{1.0, 2.0}});
    panel.days[0].values[1] = std::nullopt;
    try {
        spikemon::outer_product_stream(panel);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2020-07-04") != std::string::npos);
        CHECK(msg.find("west") != std::string::npos);
    }
}

TEST_CASE("baseline centering subtracts the early mean") {
    std::vector<SymMatrix> stream;
    stream.push_back(SymMatrix::from_lower(2, {1, 2, 3}));
    stream.push_back(SymMatrix::from_lower(2, {3, 4, 5}));
    stream.push_back(SymMatrix::from_lower(2, {10, 10, 10}));
    // Baseline mean of the first two: {2, 3, 4}.
    const auto out = spikemon::center_by_baseline(stream, 2);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == SymMatrix::from_lower(2, {8, 7, 6}));

    // Constant stream centers to zero.
    std::vector<SymMatrix> constant(5, SymMatrix::from_lower(1, {4.0}));
    const auto zeros = spikemon::center_by_baseline(constant, 3);
    REQUIRE(zeros.size() == 2);
    for (const auto& z : zeros) CHECK(z == SymMatrix(1));

    // Two-element stream with baseline one: B - A.
    std::vector<SymMatrix> pair;
    pair.push_back(SymMatrix::from_lower(1, {1.5}));
    pair.push_back(SymMatrix::from_lower(1, {4.0}));
    const auto diff = spikemon::center_by_baseline(pair, 1);
    REQUIRE(diff.size() == 1);
    CHECK(diff[0](0, 0) == 2.5);

    CHECK_THROWS_AS(spikemon::center_by_baseline(pair, 2), std::invalid_argument);
    CHECK_THROWS_AS(spikemon::center_by_baseline(pair, 0), std::invalid_argument);
}

TEST_CASE("centered long i.i.d. stream has near-zero mean") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> normal(3.0, 1.0);  // nonzero mean to cancel
    std::vector<SymMatrix> stream;
    const int total = 2000, baseline = 1000;
    for (int t = 0; t < total; ++t) {
        SymMatrix m(2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j <= i; ++j) m.lower(i, j) = normal(gen);
        stream.push_back(std::move(m));
    }
    const auto out = spikemon::center_by_baseline(stream, baseline);
    double mean00 = 0.0;
    for (const auto& m : out) mean00 += m(0, 0);
    mean00 /= static_cast<double>(out.size());
    // Standard error ~ sqrt(1/1000 + 1/1000) ~ 0.045.
    CHECK(std::abs(mean00) < 0.2);
}

TEST_CASE("panel CSV round-trips values and missing markers") {
    auto panel = make_panel({"alpha", "beta"},
                            {CalDate{2020, 1, 1}, CalDate{2020, 1, 2}},
                            {{0.1, -2.5e-13}, {1.0 / 3.0, 7.0}});
    panel.days[1].values[1] = std::nullopt;

    const auto path = std::filesystem::temp_directory_path() / "spikemon_panel_rt.csv";
    spikemon::write_panel_csv(panel, path);
    const auto back = spikemon::read_panel_csv(path);
    std::filesystem::remove(path);

    REQUIRE(back.locations == panel.locations);
    REQUIRE(back.days.size() == 2);
    CHECK(back.days[0].values[0].value() == 0.1);
    CHECK(back.days[0].values[1].value() == -2.5e-13);
    CHECK(back.days[1].values[0].value() == 1.0 / 3.0);
    CHECK_FALSE(back.days[1].values[1].has_value());
}

TEST_CASE("panel CSV rejects structural errors") {
    const auto path = std::filesystem::temp_directory_path() / "spikemon_panel_bad.csv";
    auto write_text = [&](const std::string& text) {
        std::ofstream out(path);
        out << text;
    };

    SUBCASE("wrong header") {
        write_text("day,location,value\n2020-01-01,a,1\n");
        CHECK_THROWS_AS(spikemon::read_panel_csv(path), spikemon::ParseError);
    }
    SUBCASE("duplicate cell") {
        write_text("date,location,value\n2020-01-01,a,1\n2020-01-01,a,2\n");
        CHECK_THROWS_AS(spikemon::read_panel_csv(path), spikemon::ParseError);
    }
    SUBCASE("absent pair") {
        write_text("date,location,value\n2020-01-01,a,1\n2020-01-01,b,2\n2020-01-02,a,3\n");
        CHECK_THROWS_AS(spikemon::read_panel_csv(path), spikemon::ParseError);
    }
    SUBCASE("bad date") {
        write_text("date,location,value\n2020-01-41,a,1\n");
        CHECK_THROWS_AS(spikemon::read_panel_csv(path), spikemon::ParseError);
    }
    SUBCASE("bad number") {
        write_text("date,location,value\n2020-01-01,a,zzz\n");
        CHECK_THROWS_AS(spikemon::read_panel_csv(path), spikemon::ParseError);
    }
    SUBCASE("missing marker is accepted") {
        write_text("date,location,value\n2020-01-01,a,\n");
        const auto p = spikemon::read_panel_csv(path);
        CHECK(p.has_missing());
    }
    std::filesystem::remove(path);
}

TEST_CASE("end to end: seasonal panel with an injected coherent shift alarms") {
    // Synthetic pipeline rehearsal: five years of seasonal history fit the
    // profile; monitoring data continue the seasonal pattern plus noise, and
    // from a known day onward an injected coherent component appears. The
    // deseasonalized outer-product stream must stay quiet without the
    // injection and alarm with it.
    const int n_loc = 5;
    const int m = 120;      // training days in the monitored year
    const int horizon = 120;
    const int change_day = 40;  // monitoring day of the injection
    const std::vector<std::string> locs{"l1", "l2", "l3", "l4", "l5"};

    auto truth = [](int doy, int loc) {
        return 8.0 + 2.0 * loc +
               3.0 * std::sin(2.0 * 3.14159265358979323846 * doy / 365.0 + 0.7 * loc);
    };

    // Simulated threshold for this (m, horizon) at alpha = 0.05.
    spikemon::QuantileRequest qreq;
    qreq.m = m;
    qreq.T = horizon;
    qreq.alphas = {0.05};
    qreq.replications = 4000;
    qreq.seed = 424242;
    const auto qtable = spikemon::quantiles_of_L(qreq);
    const double threshold = qtable.rows[0].quantile;

    auto run_pipeline = [&](std::uint64_t seed, bool inject) {
        std::mt19937_64 gen(seed);
        std::normal_distribution<double> noise(0.0, 1.0);

        const auto hist_dates = calendar_range(2015, 2019);
        std::vector<std::vector<double>> hist_values;
        for (const auto& d : hist_dates) {
            std::vector<double> row;
            const int doy = d.is_leap_day() ? 60 : d.day_of_year_365();
            for (int loc = 0; loc < n_loc; ++loc) row.push_back(truth(doy, loc) + noise(gen));
            hist_values.push_back(std::move(row));
        }
        const auto history = make_panel(locs, hist_dates, hist_values);
        const auto model = spikemon::fit_seasonal(spikemon::drop_leap_days(history));

        // Monitored year: m + horizon consecutive non-leap days of 2021.
        const auto year = calendar_range(2021, 2021);
        std::vector<CalDate> dates(year.begin(), year.begin() + m + horizon);
        std::vector<std::vector<double>> values;
        for (int i = 0; i < m + horizon; ++i) {
            std::vector<double> row;
            for (int loc = 0; loc < n_loc; ++loc) {
                double v = truth(dates[static_cast<std::size_t>(i)].day_of_year_365(), loc) +
                           noise(gen);
                if (inject && i >= m + change_day) v += 6.0 * (1.0 + 0.1 * loc);
                row.push_back(v);
            }
            values.push_back(std::move(row));
        }
        const auto series = make_panel(locs, dates, values);
        const auto clean = spikemon::deseasonalize(series, model);
        const auto stream = spikemon::outer_product_stream(clean);

        spikemon::EigenSeries tr;
        tr.m = m;
        tr.n = n_loc;
        std::vector<double> mon;
        for (int t = 0; t < m + horizon; ++t) {
            const double lambda = spikemon::largest_eigenvalue(stream[static_cast<std::size_t>(t)]);
            if (t < m) tr.lambdas.push_back(lambda);
            else mon.push_back(lambda);
        }
        return spikemon::monitor(tr, mon, threshold);
    };

    // The injected run alarms shortly after the change.
    const auto hit = run_pipeline(1001, true);
    REQUIRE(hit.alarmed);
    CHECK(hit.k_hat.value() > change_day);
    CHECK(hit.k_hat.value() <= change_day + 30);

    // Injection-free runs stay quiet in at least 90% of seeds.
    int quiet = 0;
    const int runs = 20;
    for (int s = 0; s < runs; ++s)
        if (!run_pipeline(6000 + static_cast<std::uint64_t>(s), false).alarmed) ++quiet;
    CHECK(quiet >= 18);
}
