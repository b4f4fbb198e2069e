#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace spikemon {

/// Inputs for simulating the null limit distribution of the detector.
struct QuantileRequest {
    int m = 500;          // training length of the limit statistic
    int T = 500;          // monitoring horizon (in multiples k = 1..T)
    std::vector<double> alphas{0.05, 0.10};
    int replications = 10000;
    std::uint64_t seed = 0;

    void validate() const;  // throws std::invalid_argument
};

struct QuantileRow {
    int m = 0;
    int T = 0;
    double alpha = 0.0;
    double quantile = 0.0;
    int replications = 0;
    std::uint64_t seed = 0;
};

/// Cacheable set of simulated critical values.
struct QuantileTable {
    std::vector<QuantileRow> rows;

    /// Exact-key lookup; nullptr when absent.
    const QuantileRow* find(int m, int T, double alpha, int replications,
                            std::uint64_t seed) const;

    /// Most refined row for one alpha: lexicographically largest
    /// (m, T, replications, seed). nullptr when no row matches.
    const QuantileRow* best_for_alpha(double alpha) const;

    /// Replace the row with the same (m, T, alpha, replications, seed) or add.
    void upsert(const QuantileRow& row);
};

/// One draw of the limit statistic
///   L = max_{k=1..T} m^2/(m+k) * ( W(m+k) - (m+k)/m * W(m) )
///       / sum_{t=1..m} | W(t) - (t/m) * W(m) |
/// where W is a standard Gaussian random walk of length m + T.
/// Deterministic in (seed, replication_index); the all-but-impossible zero
/// denominator is resampled from a fresh substream (logged to stderr).
double simulate_L(int m, int T, std::uint64_t seed, std::uint64_t replication_index);

/// Same statistic from caller-supplied increments (normals.size() == m + T).
/// Throws std::domain_error on a zero denominator.
double L_from_normals(int m, int T, std::span<const double> normals);

/// All replications in index order; identical output for any thread count.
std::vector<double> draw_L(const QuantileRequest& req, int threads = 0);

/// ceil(p * size)-th order statistic (1-indexed) of an ascending-sorted sample.
double nearest_rank_quantile(std::span<const double> sorted_draws, double p);

/// Simulate once and produce one row per requested alpha.
QuantileTable quantiles_of_L(const QuantileRequest& req, int threads = 0);

/// CSV cache with header `m,T,alpha,quantile,replications,seed`. Rows are
/// written in a canonical sort order and doubles round-trip bit-exactly.
QuantileTable read_quantile_table(const std::filesystem::path& path);
void write_quantile_table(const QuantileTable& table, const std::filesystem::path& path);
void write_quantile_table(const QuantileTable& table, std::ostream& out);

}  // namespace spikemon
