#include "spikemon/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <fstream>
#include <stdexcept>

#include "csv_util.hpp"
#include "spikemon/detector.hpp"
#include "spikemon/eigensolve.hpp"
#include "spikemon/errors.hpp"
#include "spikemon/parallel.hpp"

namespace spikemon {

namespace {

// Distinct tags for the two per-replication seed derivations.
constexpr std::uint64_t kRepPhiTag = 0x00C0FFEE00000001ull;
constexpr std::uint64_t kRepNoiseTag = 0x00C0FFEE00000002ull;

// Replication key: mixes (seed, m, n, rep) only. Excluding delta, kstar,
// alpha and the law is deliberate — it is what couples cells.
std::uint64_t rep_key(std::uint64_t seed, int m, int n, std::int64_t rep, std::uint64_t tag) {
    std::uint64_t h = rng::mix64(seed ^ tag);
    h = rng::mix64(h ^ static_cast<std::uint64_t>(m));
    h = rng::mix64(h ^ (static_cast<std::uint64_t>(n) << 20));
    h = rng::mix64(h ^ static_cast<std::uint64_t>(rep));
    return h;
}

// First alarm index per threshold within the horizon; -1 when none.
// Thresholds must be provided; generation stops early once every level
// has alarmed.
std::vector<int> run_replication(const WignerStreamSpec& wspec, const SignalSpec& sspec,
                                 int m, int horizon, std::span<const double> thresholds) {
    StreamGenerator gen(wspec, sspec, m);
    const EigenOptions eopts;

    EigenSeries train;
    train.m = m;
    train.n = wspec.n;
    train.lambdas.resize(static_cast<std::size_t>(m));
    for (int t = 0; t < m; ++t)
        train.lambdas[static_cast<std::size_t>(t)] = largest_eigenvalue(gen.next(), eopts);

    DetectorState st = init_detector(train, thresholds.empty() ? 1.0 : thresholds.front());
    std::vector<int> first_alarm(thresholds.size(), -1);
    std::size_t pending = thresholds.size();
    for (int k = 1; k <= horizon && pending > 0; ++k) {
        const double g = step(st, largest_eigenvalue(gen.next(), eopts));
        for (std::size_t a = 0; a < thresholds.size(); ++a)
            if (first_alarm[a] < 0 && g > thresholds[a]) {
                first_alarm[a] = k;
                --pending;
            }
    }
    return first_alarm;
}

std::vector<double> resolve_thresholds(const ExperimentPlan& plan, const QuantileTable& table) {
    std::vector<double> thresholds;
    thresholds.reserve(plan.alphas.size());
    for (double a : plan.alphas) {
        if (plan.threshold_override) {
            thresholds.push_back(*plan.threshold_override);
            continue;
        }
        const QuantileRow* row = table.best_for_alpha(a);
        if (!row)
            throw std::runtime_error("experiments: no quantile available for alpha = " +
                                     detail::format_double(a) +
                                     "; simulate one into the table first");
        thresholds.push_back(row->quantile);
    }
    return thresholds;
}

SignalSpec make_signal_spec(const ExperimentPlan& plan, std::optional<double> delta, int kstar) {
    SignalSpec s;
    s.law = plan.law;
    s.table = plan.table;
    s.delta = delta;
    s.kstar = kstar;
    return s;
}

}  // namespace

void ExperimentPlan::validate(bool power) const {
    if (m_grid.empty() || n_grid.empty())
        throw std::invalid_argument("ExperimentPlan: m_grid and n_grid must be nonempty");
    for (int m : m_grid)
        if (m < 2) throw std::invalid_argument("ExperimentPlan: every m must be >= 2");
    for (int n : n_grid)
        if (n < 1) throw std::invalid_argument("ExperimentPlan: every n must be >= 1");
    if (alphas.empty()) throw std::invalid_argument("ExperimentPlan: alphas must be nonempty");
    for (double a : alphas)
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("ExperimentPlan: alpha must lie in (0, 1)");
    if (replications < 1)
        throw std::invalid_argument("ExperimentPlan: replications must be >= 1");
    if (horizon_mult < 1)
        throw std::invalid_argument("ExperimentPlan: horizon_mult must be >= 1");
    if (burn_in < 0) throw std::invalid_argument("ExperimentPlan: burn_in must be >= 0");
    if (threshold_override && !(*threshold_override > 0.0))
        throw std::invalid_argument("ExperimentPlan: threshold_override must be positive");
    if (power) {
        if (delta_grid.empty() || kstar_grid.empty())
            throw std::invalid_argument(
                "ExperimentPlan: power runs need delta_grid and kstar_grid");
        for (double d : delta_grid)
            if (!(d > 0.0)) throw std::invalid_argument("ExperimentPlan: every delta must be > 0");
        for (int k : kstar_grid)
            if (k < 0) throw std::invalid_argument("ExperimentPlan: every kstar must be >= 0");
    }
    // Validates the law/table combination once up front.
    SignalSpec probe;
    probe.law = law;
    probe.table = table;
    if (power) probe.delta = delta_grid.empty() ? 0.5 : delta_grid.front();
    probe.validate();
}

std::vector<ResultRow> run_pfa(const ExperimentPlan& plan, const QuantileTable& table) {
    plan.validate(false);
    const std::vector<double> thresholds = resolve_thresholds(plan, table);
    std::vector<ResultRow> rows;

    for (int m : plan.m_grid) {
        for (int n : plan.n_grid) {
            const int horizon = plan.horizon_mult * m;
            const SignalSpec sspec = make_signal_spec(plan, std::nullopt, 0);
            std::vector<std::vector<int>> alarms(
                static_cast<std::size_t>(plan.replications));
            parallel_for(plan.replications, plan.threads, [&](std::int64_t rep) {
                WignerStreamSpec wspec;
                wspec.n = n;
                wspec.burn_in = plan.burn_in;
                wspec.phi_seed = rep_key(plan.seed, m, n, rep, kRepPhiTag);
                wspec.noise_seed = rep_key(plan.seed, m, n, rep, kRepNoiseTag);
                alarms[static_cast<std::size_t>(rep)] =
                    run_replication(wspec, sspec, m, horizon, thresholds);
            });

            for (std::size_t a = 0; a < plan.alphas.size(); ++a) {
                int count = 0;
                for (const auto& rep_alarms : alarms)
                    if (rep_alarms[a] >= 0) ++count;
                ResultRow row;
                row.experiment = "pfa";
                row.m = m;
                row.n = n;
                row.law = law_name(plan.law);
                row.alpha = plan.alphas[a];
                row.value = static_cast<double>(count) / plan.replications;
                row.metric = "pfa";
                row.replications = plan.replications;
                row.seed = plan.seed;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

std::vector<ResultRow> run_power(const ExperimentPlan& plan, const QuantileTable& table) {
    plan.validate(true);
    const std::vector<double> thresholds = resolve_thresholds(plan, table);
    std::vector<ResultRow> rows;

    for (int m : plan.m_grid) {
        for (int n : plan.n_grid) {
            for (int kstar : plan.kstar_grid) {
                for (double delta : plan.delta_grid) {
                    const int horizon = kstar + plan.horizon_mult * m;
                    const SignalSpec sspec = make_signal_spec(plan, delta, kstar);
                    std::vector<std::vector<int>> alarms(
                        static_cast<std::size_t>(plan.replications));
                    parallel_for(plan.replications, plan.threads, [&](std::int64_t rep) {
                        WignerStreamSpec wspec;
                        wspec.n = n;
                        wspec.burn_in = plan.burn_in;
                        wspec.phi_seed = rep_key(plan.seed, m, n, rep, kRepPhiTag);
                        wspec.noise_seed = rep_key(plan.seed, m, n, rep, kRepNoiseTag);
                        alarms[static_cast<std::size_t>(rep)] =
                            run_replication(wspec, sspec, m, horizon, thresholds);
                    });

                    for (std::size_t a = 0; a < plan.alphas.size(); ++a) {
                        int count = 0;
                        double delay_sum = 0.0;
                        for (const auto& rep_alarms : alarms)
                            if (rep_alarms[a] >= 0) {
                                ++count;
                                delay_sum += rep_alarms[a] - kstar;
                            }
                        ResultRow power_row;
                        power_row.experiment = "power";
                        power_row.m = m;
                        power_row.n = n;
                        power_row.law = law_name(plan.law);
                        power_row.alpha = plan.alphas[a];
                        power_row.delta = delta;
                        power_row.kstar = kstar;
                        power_row.value = static_cast<double>(count) / plan.replications;
                        power_row.metric = "power";
                        power_row.replications = plan.replications;
                        power_row.seed = plan.seed;
                        rows.push_back(power_row);

                        ResultRow delay_row = power_row;
                        delay_row.value = count > 0
                                              ? delay_sum / count
                                              : std::numeric_limits<double>::quiet_NaN();
                        delay_row.metric = "mean_delay";
                        rows.push_back(delay_row);
                    }
                }
            }
        }
    }
    return rows;
}

std::string law_name(SignalLaw law) {
    switch (law) {
        case SignalLaw::uniform01:
            return "uniform01";
        case SignalLaw::beta24:
            return "beta24";
        case SignalLaw::custom_table:
            return "table";
    }
    throw std::invalid_argument("law_name: unknown law");
}

void write_results_csv(std::span<const ResultRow> rows, std::ostream& out) {
    out << "experiment,m,n,law,alpha,delta,kstar,value,metric,replications,seed\n";
    for (const ResultRow& r : rows) {
        out << r.experiment << ',' << r.m << ',' << r.n << ',' << r.law << ','
            << detail::format_double(r.alpha) << ',';
        if (r.delta) out << detail::format_double(*r.delta);
        out << ',';
        if (r.kstar) out << *r.kstar;
        out << ',';
        if (std::isnan(r.value))
            out << "";  // mean delay with zero alarms
        else
            out << detail::format_double(r.value);
        out << ',' << r.metric << ',' << r.replications << ',' << r.seed << '\n';
    }
}

void write_results_csv(std::span<const ResultRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_results_csv(rows, out);
    out.flush();
    if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace spikemon
