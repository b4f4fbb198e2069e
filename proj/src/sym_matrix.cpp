#include "spikemon/sym_matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spikemon {

namespace {

std::size_t packed_size(int n) {
    return static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) + 1) / 2;
}

void check_dim(int n) {
    if (n < 1) throw std::invalid_argument("SymMatrix: dimension must be >= 1, got " + std::to_string(n));
}

void check_finite(const std::vector<double>& tri) {
    for (double v : tri)
        if (!std::isfinite(v)) throw std::invalid_argument("SymMatrix: entries must be finite");
}

}  // namespace

SymMatrix::SymMatrix(int n) : n_(n) {
    check_dim(n);
    tri_.assign(packed_size(n), 0.0);
}

SymMatrix SymMatrix::from_lower(int n, std::vector<double> tri) {
    check_dim(n);
    if (tri.size() != packed_size(n))
        throw std::invalid_argument("SymMatrix: packed triangle has wrong length");
    check_finite(tri);
    SymMatrix a(n);
    a.tri_ = std::move(tri);
    return a;
}

SymMatrix SymMatrix::from_dense(int n, std::span<const double> rowmajor) {
    check_dim(n);
    const auto nn = static_cast<std::size_t>(n);
    if (rowmajor.size() != nn * nn)
        throw std::invalid_argument("SymMatrix: dense buffer has wrong length");
    SymMatrix a(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double lo = rowmajor[nn * static_cast<std::size_t>(i) + static_cast<std::size_t>(j)];
            const double hi = rowmajor[nn * static_cast<std::size_t>(j) + static_cast<std::size_t>(i)];
            if (lo != hi)
                throw std::invalid_argument("SymMatrix: dense buffer is not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            a.lower(i, j) = lo;
        }
    }
    check_finite(a.tri_);
    return a;
}

std::vector<double> SymMatrix::to_dense() const {
    const auto nn = static_cast<std::size_t>(n_);
    std::vector<double> out(nn * nn);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j <= i; ++j) {
            const double v = tri_[idx(i, j)];
            out[nn * static_cast<std::size_t>(i) + static_cast<std::size_t>(j)] = v;
            out[nn * static_cast<std::size_t>(j) + static_cast<std::size_t>(i)] = v;
        }
    return out;
}

}  // namespace spikemon
