#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spikemon {

/// Dense real symmetric matrix, packed lower-triangle storage.
/// Entry (i, j) with i >= j lives at packed()[i*(i+1)/2 + j].
/// Invariant: every stored entry is finite.
class SymMatrix {
public:
    /// Zero matrix of dimension n (n >= 1).
    explicit SymMatrix(int n);

    /// Adopt a packed lower triangle of length n*(n+1)/2.
    static SymMatrix from_lower(int n, std::vector<double> tri);

    /// Copy from a row-major dense n*n buffer; must be exactly symmetric.
    static SymMatrix from_dense(int n, std::span<const double> rowmajor);

    int dim() const noexcept { return n_; }

    double operator()(int i, int j) const noexcept {
        return i >= j ? tri_[idx(i, j)] : tri_[idx(j, i)];
    }

    /// Mutable access to the stored triangle; requires i >= j.
    double& lower(int i, int j) noexcept { return tri_[idx(i, j)]; }

    const std::vector<double>& packed() const noexcept { return tri_; }
    std::vector<double>& packed() noexcept { return tri_; }

    /// Expand to a row-major dense n*n buffer.
    std::vector<double> to_dense() const;

    friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

private:
    static std::size_t idx(int i, int j) noexcept {
        return static_cast<std::size_t>(i) * (static_cast<std::size_t>(i) + 1) / 2 +
               static_cast<std::size_t>(j);
    }

    int n_;
    std::vector<double> tri_;
};

}  // namespace spikemon
