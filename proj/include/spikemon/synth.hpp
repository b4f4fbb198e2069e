#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "spikemon/rng.hpp"
#include "spikemon/sym_matrix.hpp"

namespace spikemon {

/// Parameters of the autocorrelated Wigner noise chain
///   W_t = Phi (.) W_{t-1} + sqrt(1 - Phi (.) Phi) (.) E_t   (entrywise),
/// with E_t fresh Wigner innovations (iid standard normal entries on and
/// above the diagonal). The sqrt factor keeps every entry's stationary
/// variance at 1, so each W_t is marginally a standard Wigner matrix.
struct WignerStreamSpec {
    int n = 0;
    std::uint64_t phi_seed = 0;    // key for the entrywise AR coefficients
    std::uint64_t noise_seed = 0;  // key for innovations, spikes and signal draws
    int burn_in = 50;              // chain steps discarded before t = 1
    double phi_lo = -0.5;          // AR coefficients drawn uniform on [phi_lo, phi_hi)
    double phi_hi = 0.5;

    void validate() const;
};

enum class SignalLaw { uniform01, beta24, custom_table };

/// Law of the signal strength s_t. Subcritical draws come from `law` with
/// support inside [0, 1). When `delta` is set, the regime is supercritical:
/// after observation m + kstar the base draw u is rescaled to 1 + delta * u,
/// which lies in (1, 1 + delta] and detaches the top eigenvalue.
struct SignalSpec {
    SignalLaw law = SignalLaw::uniform01;
    /// custom_table only: (value, probability) atoms, probabilities sum to 1.
    std::vector<std::pair<double, double>> table;
    std::optional<double> delta;  // engaged => supercritical after the change
    int kstar = 0;                // change takes effect after observation m + kstar

    void validate() const;
};

/// Entrywise AR coefficients: symmetric matrix of iid uniforms.
SymMatrix gen_phi(const WignerStreamSpec& spec);

/// Fresh Wigner draw: iid standard normals on the packed triangle.
SymMatrix gen_wigner(int n, rng::Stream& stream);

/// One chain step; prev and phi must share dimensions.
SymMatrix next_wigner(const SymMatrix& prev, const SymMatrix& phi, rng::Stream& innovations);

/// Unit-norm spike direction: n iid normals, normalized.
std::vector<double> gen_spike(int n, rng::Stream& stream);
std::vector<double> gen_spike(int n, std::uint64_t seed);

/// Sequential generator of observations M_t = s_t x_t x_t' + W_t / sqrt(n)
/// for t = 1, 2, ...; the spike direction x_t is redrawn every step.
/// Deterministic in the seeds the two configs carry. The signal-law base draw is consumed
/// identically in both regimes, so runs differing only in delta/kstar share
/// the same noise, spikes, and base signal values.
class StreamGenerator {
public:
    StreamGenerator(const WignerStreamSpec& wspec, const SignalSpec& sspec, int m);

    SymMatrix next();

    int t() const noexcept { return t_; }                    // index of the last emitted M_t
    const SymMatrix& noise() const noexcept { return w_; }   // W_t of the last emitted M_t
    double signal() const noexcept { return s_; }            // s_t of the last emitted M_t

private:
    void step_chain();
    double draw_signal();

    SymMatrix phi_;
    SymMatrix sqrt_one_minus_phi2_;
    SymMatrix w_;
    rng::Stream noise_stream_;
    rng::Stream spike_stream_;
    rng::Stream signal_stream_;
    SignalSpec sspec_;
    std::vector<double> cum_prob_;  // cumulative table probabilities
    int m_ = 0;
    int t_ = 0;
    double s_ = 0.0;
    double inv_sqrt_n_ = 0.0;
};

/// Materialize M_1 .. M_length (length >= m).
std::vector<SymMatrix> gen_stream(const WignerStreamSpec& wspec, const SignalSpec& sspec,
                                  int m, int length);

}  // namespace spikemon
