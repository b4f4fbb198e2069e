#pragma once

#include <optional>
#include <span>

#include "spikemon/series.hpp"

namespace spikemon {

/// Frozen training summary plus the running monitoring sums. All quantities
/// derived from training data are fixed at init; monitoring eigenvalues are
/// folded in one at a time by step().
struct DetectorState {
    int m = 0;               // training length
    int n = 0;               // matrix dimension
    double train_sum = 0.0;  // sum of the m training eigenvalues
    double v_m = 0.0;        // self-normalizer V_m, >= 0
    double threshold = 0.0;  // alarm level the caller intends to compare against
    double mon_sum = 0.0;    // running sum of monitoring eigenvalues
    double mon_comp = 0.0;   // compensation term for mon_sum
    int k = 0;               // number of monitoring eigenvalues consumed
};

/// Self-normalizer over a training window of largest eigenvalues:
///   V_m = n^(2/3) / m^(3/2) * sum_{t=1..m} | sum_{s<=t} l_s - (t/m) sum_{s<=m} l_s |.
/// Requires m >= 2 finite values and n >= 1; result is >= 0, and exactly 0
/// only for constant input (the degenerate case flagged by gamma()).
double compute_vm(std::span<const double> train, int n);

/// Freeze the training summary. Uses series.lambdas[0..m-1] only.
DetectorState init_detector(const EigenSeries& train, double threshold);

/// Fold in one monitoring eigenvalue and return gamma at the new k.
/// Propagates DegenerateNormalizerError when V_m == 0.
double step(DetectorState& state, double lambda);

/// Detection statistic after k monitoring values:
///   D_m(k) = n^(2/3) * sqrt(m) / (m + k) * ( sum_mon - (k/m) * sum_train ).
/// Requires k >= 1 and k equal to the number of values consumed.
double compute_dm(const DetectorState& state, int k);

/// gamma(k) = D_m(k) / V_m. Throws DegenerateNormalizerError if V_m == 0.
double gamma(const DetectorState& state, int k);

/// Run the detector over a monitoring stream. Training values are
/// train.lambdas[0..m-1]; entries beyond m are treated as monitoring values
/// that precede `stream`. Stops at the first k with gamma > threshold unless
/// continue_after_alarm is set; max_k caps the number of values consumed.
/// threshold must be positive (may be +infinity).
MonitorVerdict monitor(const EigenSeries& train, std::span<const double> stream,
                       double threshold, std::optional<int> max_k = std::nullopt,
                       bool continue_after_alarm = false);

}  // namespace spikemon
