#include "spikemon/detector.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "spikemon/errors.hpp"

namespace spikemon {

namespace {

double n_two_thirds(int n) {
    const double c = std::cbrt(static_cast<double>(n));
    return c * c;
}

// Compensated accumulator (Kahan); keeps long monitoring sums honest.
struct Kahan {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

double compute_vm(std::span<const double> train, int n) {
    const auto m = train.size();
    if (m < 2) throw std::invalid_argument("compute_vm: need at least 2 training values");
    if (n < 1) throw std::invalid_argument("compute_vm: matrix dimension must be >= 1");
    for (double v : train)
        if (!std::isfinite(v)) throw std::invalid_argument("compute_vm: values must be finite");

    Kahan total;
    for (double v : train) total.add(v);

    const double md = static_cast<double>(m);
    Kahan prefix, acc;
    for (std::size_t t = 1; t <= m; ++t) {
        prefix.add(train[t - 1]);
        acc.add(std::fabs(prefix.sum - (static_cast<double>(t) / md) * total.sum));
    }
    return n_two_thirds(n) / (md * std::sqrt(md)) * acc.sum;
}

DetectorState init_detector(const EigenSeries& train, double threshold) {
    train.validate();
    if (train.m < 2) throw std::invalid_argument("init_detector: training length must be >= 2");
    DetectorState st;
    st.m = train.m;
    st.n = train.n;
    st.threshold = threshold;
    Kahan total;
    for (int t = 0; t < train.m; ++t) total.add(train.lambdas[static_cast<std::size_t>(t)]);
    st.train_sum = total.sum;
    st.v_m = compute_vm(std::span<const double>(train.lambdas.data(),
                                                static_cast<std::size_t>(train.m)),
                        train.n);
    return st;
}

double step(DetectorState& state, double lambda) {
    if (!std::isfinite(lambda))
        throw std::invalid_argument("step: monitoring value must be finite");
    const double y = lambda - state.mon_comp;
    const double t = state.mon_sum + y;
    state.mon_comp = (t - state.mon_sum) - y;
    state.mon_sum = t;
    state.k += 1;
    return gamma(state, state.k);
}

double compute_dm(const DetectorState& state, int k) {
    if (k < 1) throw std::invalid_argument("compute_dm: k must be >= 1");
    if (k != state.k)
        throw std::invalid_argument("compute_dm: state holds " + std::to_string(state.k) +
                                    " monitoring values, asked about k=" + std::to_string(k));
    const double md = static_cast<double>(state.m);
    const double kd = static_cast<double>(k);
    return n_two_thirds(state.n) * std::sqrt(md) / (md + kd) *
           (state.mon_sum - (kd / md) * state.train_sum);
}

double gamma(const DetectorState& state, int k) {
    const double dm = compute_dm(state, k);
    if (state.v_m == 0.0)
        throw DegenerateNormalizerError(
            "normalizer V_m is zero (constant training eigenvalues); gamma is undefined");
    return dm / state.v_m;
}

MonitorVerdict monitor(const EigenSeries& train, std::span<const double> stream,
                       double threshold, std::optional<int> max_k,
                       bool continue_after_alarm) {
    if (std::isnan(threshold) || threshold <= 0.0)
        throw std::invalid_argument("monitor: threshold must be positive");
    if (max_k && *max_k < 0) throw std::invalid_argument("monitor: max_k must be >= 0");

    DetectorState st = init_detector(train, threshold);
    MonitorVerdict verdict;

    // Returns true when monitoring should stop.
    auto consume = [&](double lambda) {
        if (!std::isfinite(lambda))
            throw std::invalid_argument("monitor: monitoring values must be finite");
        const double g = step(st, lambda);
        verdict.gamma_trace.emplace_back(st.k, g);
        if (!verdict.alarmed && g > threshold) {
            verdict.alarmed = true;
            verdict.k_hat = st.k;
        }
        return verdict.alarmed && !continue_after_alarm;
    };

    auto budget_left = [&] { return !max_k || st.k < *max_k; };

    for (std::size_t idx = static_cast<std::size_t>(train.m); idx < train.lambdas.size(); ++idx) {
        if (!budget_left()) return verdict;
        if (consume(train.lambdas[idx])) return verdict;
    }
    for (double lambda : stream) {
        if (!budget_left()) return verdict;
        if (consume(lambda)) return verdict;
    }
    return verdict;
}

}  // namespace spikemon
