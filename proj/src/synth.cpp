#include "spikemon/synth.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spikemon {

namespace {

// Substream tags; any fixed distinct constants work. Keeping them far above
// small integers avoids clashing with replication-indexed streams built on
// the same seed.
constexpr std::uint64_t kPhiStream = 0xA11CE5ED00000001ull;
constexpr std::uint64_t kNoiseStream = 0xA11CE5ED00000002ull;
constexpr std::uint64_t kSpikeStream = 0xA11CE5ED00000003ull;
constexpr std::uint64_t kSignalStream = 0xA11CE5ED00000004ull;

}  // namespace

void WignerStreamSpec::validate() const {
    if (n < 1) throw std::invalid_argument("WignerStreamSpec: n must be >= 1");
    if (burn_in < 0) throw std::invalid_argument("WignerStreamSpec: burn_in must be >= 0");
    if (!(phi_lo < phi_hi))
        throw std::invalid_argument("WignerStreamSpec: need phi_lo < phi_hi");
    if (!(phi_lo > -1.0 && phi_hi <= 1.0))
        throw std::invalid_argument(
            "WignerStreamSpec: AR coefficients must stay inside (-1, 1) for a stationary chain");
}

void SignalSpec::validate() const {
    if (kstar < 0) throw std::invalid_argument("SignalSpec: kstar must be >= 0");
    if (delta && !(*delta > 0.0))
        throw std::invalid_argument("SignalSpec: delta must be > 0 when set");
    if (law == SignalLaw::custom_table) {
        if (table.empty())
            throw std::invalid_argument("SignalSpec: custom_table law needs at least one atom");
        double total = 0.0;
        for (const auto& [value, prob] : table) {
            if (!std::isfinite(value) || !std::isfinite(prob))
                throw std::invalid_argument("SignalSpec: table entries must be finite");
            if (prob < 0.0) throw std::invalid_argument("SignalSpec: probabilities must be >= 0");
            // Subcritical support must stay below the critical strength 1;
            // value 1 is allowed only as a base for supercritical rescaling.
            if (value < 0.0 || value > 1.0 || (!delta && value == 1.0))
                throw std::invalid_argument(
                    "SignalSpec: table values must lie in [0, 1) (or [0, 1] with delta set)");
            total += prob;
        }
        if (std::fabs(total - 1.0) > 1e-9)
            throw std::invalid_argument("SignalSpec: probabilities must sum to 1");
    } else if (!table.empty()) {
        throw std::invalid_argument("SignalSpec: table only applies to the custom_table law");
    }
}

SymMatrix gen_phi(const WignerStreamSpec& spec) {
    spec.validate();
    rng::Stream s(spec.phi_seed, kPhiStream);
    SymMatrix phi(spec.n);
    for (double& v : phi.packed()) v = s.next_uniform(spec.phi_lo, spec.phi_hi);
    return phi;
}

SymMatrix gen_wigner(int n, rng::Stream& stream) {
    SymMatrix w(n);
    for (double& v : w.packed()) v = stream.next_normal();
    return w;
}

SymMatrix next_wigner(const SymMatrix& prev, const SymMatrix& phi, rng::Stream& innovations) {
    if (prev.dim() != phi.dim())
        throw std::invalid_argument("next_wigner: state and coefficients must share dimension");
    const int n = prev.dim();
    SymMatrix out(n);
    const std::size_t len = out.packed().size();
    for (std::size_t idx = 0; idx < len; ++idx) {
        const double p = phi.packed()[idx];
        out.packed()[idx] =
            p * prev.packed()[idx] + std::sqrt(1.0 - p * p) * innovations.next_normal();
    }
    return out;
}

std::vector<double> gen_spike(int n, rng::Stream& stream) {
    if (n < 1) throw std::invalid_argument("gen_spike: n must be >= 1");
    std::vector<double> x(static_cast<std::size_t>(n));
    for (;;) {
        double norm2 = 0.0;
        for (double& v : x) {
            v = stream.next_normal();
            norm2 += v * v;
        }
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& v : x) v *= inv;
            return x;
        }
    }
}

std::vector<double> gen_spike(int n, std::uint64_t seed) {
    rng::Stream s(seed, kSpikeStream);
    return gen_spike(n, s);
}

StreamGenerator::StreamGenerator(const WignerStreamSpec& wspec, const SignalSpec& sspec, int m)
    : phi_(1),
      sqrt_one_minus_phi2_(1),
      w_(1),
      noise_stream_(wspec.noise_seed, kNoiseStream),
      spike_stream_(wspec.noise_seed, kSpikeStream),
      signal_stream_(wspec.noise_seed, kSignalStream),
      sspec_(sspec),
      m_(m) {
    wspec.validate();
    sspec.validate();
    if (m < 0) throw std::invalid_argument("StreamGenerator: m must be >= 0");

    phi_ = gen_phi(wspec);
    sqrt_one_minus_phi2_ = SymMatrix(wspec.n);
    for (std::size_t i = 0; i < phi_.packed().size(); ++i) {
        const double p = phi_.packed()[i];
        sqrt_one_minus_phi2_.packed()[i] = std::sqrt(1.0 - p * p);
    }
    inv_sqrt_n_ = 1.0 / std::sqrt(static_cast<double>(wspec.n));

    if (sspec_.law == SignalLaw::custom_table) {
        double cum = 0.0;
        for (const auto& [value, prob] : sspec_.table) {
            cum += prob;
            cum_prob_.push_back(cum);
        }
        cum_prob_.back() = 1.0;  // guard the last atom against rounding
    }

    // The chain starts from a fresh Wigner draw; burn-in steps are discarded
    // so t = 1 observes a state already settled into stationarity.
    w_ = gen_wigner(wspec.n, noise_stream_);
    for (int b = 0; b < wspec.burn_in; ++b) step_chain();
}

void StreamGenerator::step_chain() {
    const std::size_t len = w_.packed().size();
    for (std::size_t idx = 0; idx < len; ++idx) {
        w_.packed()[idx] = phi_.packed()[idx] * w_.packed()[idx] +
                           sqrt_one_minus_phi2_.packed()[idx] * noise_stream_.next_normal();
    }
}

double StreamGenerator::draw_signal() {
    double u = 0.0;
    switch (sspec_.law) {
        case SignalLaw::uniform01:
            u = signal_stream_.next_double();
            break;
        case SignalLaw::beta24:
            u = signal_stream_.next_beta24();
            break;
        case SignalLaw::custom_table: {
            const double r = signal_stream_.next_double();
            std::size_t idx = 0;
            while (idx + 1 < cum_prob_.size() && r >= cum_prob_[idx]) ++idx;
            u = sspec_.table[idx].first;
            break;
        }
    }
    // The base draw is consumed regardless of regime; only the mapping to
    // s_t changes at the changepoint.
    if (sspec_.delta && t_ > m_ + sspec_.kstar) return 1.0 + *sspec_.delta * u;
    return u;
}

SymMatrix StreamGenerator::next() {
    if (t_ > 0) step_chain();
    ++t_;
    s_ = draw_signal();
    const std::vector<double> x = gen_spike(w_.dim(), spike_stream_);

    const int n = w_.dim();
    SymMatrix obs(n);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j, ++idx)
            obs.packed()[idx] = s_ * x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)] +
                                w_.packed()[idx] * inv_sqrt_n_;
    return obs;
}

std::vector<SymMatrix> gen_stream(const WignerStreamSpec& wspec, const SignalSpec& sspec,
                                  int m, int length) {
    if (length < m)
        throw std::invalid_argument("gen_stream: length must be >= m (training must fit)");
    StreamGenerator gen(wspec, sspec, m);
    std::vector<SymMatrix> out;
    out.reserve(static_cast<std::size_t>(length));
    for (int t = 0; t < length; ++t) out.push_back(gen.next());
    return out;
}

}  // namespace spikemon
