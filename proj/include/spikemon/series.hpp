#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace spikemon {

/// Largest-eigenvalue series with its training/monitoring split.
/// lambdas[0 .. m-1] are the training values; any further entries already
/// belong to the monitoring period.
struct EigenSeries {
    std::vector<double> lambdas;
    int m = 0;  // training length
    int n = 0;  // dimension of the source matrices

    /// Throws std::invalid_argument unless m >= 1, n >= 1,
    /// lambdas.size() >= m, and every value is finite.
    void validate() const;
};

/// Outcome of a monitoring run.
/// Invariant: alarmed <=> k_hat has a value; when alarmed, the trace entry
/// at k_hat exceeds the threshold and no earlier entry does.
struct MonitorVerdict {
    bool alarmed = false;
    std::optional<int> k_hat;                         // first k with gamma > threshold
    std::vector<std::pair<int, double>> gamma_trace;  // (k, gamma(k)) in order
};

}  // namespace spikemon
