#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikemon/quantiles.hpp"
#include "spikemon/synth.hpp"

namespace spikemon {

/// Grid description for Monte-Carlo size/power studies. One replication
/// generates a full stream (training + monitoring), runs the detector, and
/// records the first alarm per significance level.
struct ExperimentPlan {
    std::vector<int> m_grid;
    std::vector<int> n_grid;
    std::vector<double> alphas{0.05};
    SignalLaw law = SignalLaw::uniform01;
    std::vector<std::pair<double, double>> table;  // custom_table law only
    std::vector<double> delta_grid;                // power runs only
    std::vector<int> kstar_grid;                   // power runs only
    int replications = 1000;
    /// Monitoring horizon: horizon_mult * m after the training window for
    /// false-alarm runs; kstar + horizon_mult * m for power runs.
    int horizon_mult = 2;
    int burn_in = 50;
    std::uint64_t seed = 0;
    int threads = 0;
    /// Overrides the quantile-table threshold for every alpha (test hook;
    /// +infinity makes alarms impossible).
    std::optional<double> threshold_override;

    void validate(bool power) const;
};

struct ResultRow {
    std::string experiment;  // "pfa" | "power"
    int m = 0;
    int n = 0;
    std::string law;
    double alpha = 0.0;
    std::optional<double> delta;  // power only
    std::optional<int> kstar;     // power only
    double value = 0.0;           // the metric value; NaN allowed for mean_delay
    std::string metric;           // "pfa" | "power" | "mean_delay"
    int replications = 0;
    std::uint64_t seed = 0;
};

/// False-alarm study on pure subcritical streams: fraction of replications
/// that alarm within the horizon, one row per (m, n, alpha).
std::vector<ResultRow> run_pfa(const ExperimentPlan& plan, const QuantileTable& table);

/// Power study with a supercritical change after m + kstar: rows for power
/// and mean detection delay (k_hat - kstar, mean over alarmed replications;
/// NaN when nothing alarmed) per (m, n, alpha, delta, kstar).
///
/// Replication seeds depend only on (seed, m, n, replication), never on
/// delta, kstar, alpha or the law, so cells sharing those coordinates see
/// identical noise and spike paths (coupled comparisons across the rest).
std::vector<ResultRow> run_power(const ExperimentPlan& plan, const QuantileTable& table);

std::string law_name(SignalLaw law);

/// CSV with header
/// `experiment,m,n,law,alpha,delta,kstar,value,metric,replications,seed`;
/// empty fields for absent delta/kstar and NaN values.
void write_results_csv(std::span<const ResultRow> rows, const std::filesystem::path& path);
void write_results_csv(std::span<const ResultRow> rows, std::ostream& out);

}  // namespace spikemon
