#include "spikemon/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spikemon/errors.hpp"
#include "spikemon/rng.hpp"

namespace spikemon {

namespace {

// Householder reduction of a dense symmetric matrix to tridiagonal form,
// eigenvalues-only variant: no transformation accumulation. a is row-major
// n*n and is destroyed. On return d holds the diagonal, e the subdiagonal
// in e[1..n-1].
void tridiagonalize(std::vector<double>& a, int n, std::vector<double>& d,
                    std::vector<double>& e) {
    auto at = [&](int r, int c) -> double& {
        return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(n) + c];
    };
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0;
        if (l > 0) {
            double scale = 0.0;
            for (int k = 0; k <= l; ++k) scale += std::fabs(at(i, k));
            if (scale == 0.0) {
                e[i] = at(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    at(i, k) /= scale;
                    h += at(i, k) * at(i, k);
                }
                double f = at(i, l);
                double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                at(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += at(j, k) * at(i, k);
                    for (int k = j + 1; k <= l; ++k) g += at(k, j) * at(i, k);
                    e[j] = g / h;
                    f += e[j] * at(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = at(i, j);
                    g = e[j] - hh * f;
                    e[j] = g;
                    for (int k = 0; k <= j; ++k) at(j, k) -= f * e[k] + g * at(i, k);
                }
            }
        } else {
            e[i] = at(i, l);
        }
    }
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) d[i] = at(i, i);
}

// Implicit-shift QL sweeps on a tridiagonal matrix; d/e as produced by
// tridiagonalize. Eigenvalues land in d (unordered).
void ql_eigenvalues(std::vector<double>& d, std::vector<double>& e, int n) {
    constexpr int kMaxSweeps = 50;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int mdx;
        do {
            for (mdx = l; mdx < n - 1; ++mdx) {
                const double dd = std::fabs(d[mdx]) + std::fabs(d[mdx + 1]);
                if (std::fabs(e[mdx]) <= eps * dd) break;
            }
            if (mdx != l) {
                if (iter++ == kMaxSweeps) {
                    const double best = *std::max_element(d.begin(), d.begin() + n);
                    throw IterationLimitError(
                        "tridiagonal QL failed to converge in " + std::to_string(kMaxSweeps) +
                            " sweeps",
                        best);
                }
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[mdx] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = mdx - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[mdx] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[mdx] = 0.0;
            }
        } while (mdx != l);
    }
}

double dense_largest(const SymMatrix& A) {
    const int n = A.dim();
    std::vector<double> a = A.to_dense();
    std::vector<double> d(n), e(n);
    tridiagonalize(a, n, d, e);
    ql_eigenvalues(d, e, n);
    return *std::max_element(d.begin(), d.end());
}

// y = (A + shift*I) x using the packed lower triangle.
void shifted_matvec(const SymMatrix& A, double shift, const std::vector<double>& x,
                    std::vector<double>& y) {
    const int n = A.dim();
    const double* tri = A.packed().data();
    std::fill(y.begin(), y.end(), 0.0);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
        const double xi = x[i];
        double acc = 0.0;
        for (int j = 0; j < i; ++j) {
            const double v = tri[idx++];
            acc += v * x[j];
            y[j] += v * xi;
        }
        y[i] += acc + (tri[idx++] + shift) * xi;
    }
}

double gershgorin_bound(const SymMatrix& A) {
    const int n = A.dim();
    std::vector<double> rowsum(n, 0.0);
    const double* tri = A.packed().data();
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            const double v = std::fabs(tri[idx++]);
            rowsum[i] += v;
            rowsum[j] += v;
        }
        rowsum[i] += std::fabs(tri[idx++]);
    }
    return *std::max_element(rowsum.begin(), rowsum.end());
}

double iterative_largest(const SymMatrix& A, const EigenOptions& opts) {
    const int n = A.dim();
    const int max_iter = opts.max_iterations > 0 ? opts.max_iterations : 1000 + 10 * n;
    const double shift = gershgorin_bound(A);
    // A zero bound means every entry is zero, so the spectrum is {0}; the
    // shifted iteration below would annihilate every start vector.
    if (shift == 0.0) return 0.0;

    // Fixed arbitrary key: the start vector must be reproducible but is
    // otherwise irrelevant once the iteration converges.
    rng::Stream start(0x9D2C5680u, static_cast<std::uint64_t>(n));
    std::vector<double> v(n), w(n);
    auto randomize = [&] {
        double norm2 = 0.0;
        do {
            for (int i = 0; i < n; ++i) v[i] = start.next_normal();
            norm2 = 0.0;
            for (int i = 0; i < n; ++i) norm2 += v[i] * v[i];
        } while (norm2 == 0.0);
        const double inv = 1.0 / std::sqrt(norm2);
        for (int i = 0; i < n; ++i) v[i] *= inv;
    };
    randomize();

    double rho_prev = std::numeric_limits<double>::quiet_NaN();
    double rho = 0.0;
    int stable = 0;
    for (int iter = 0; iter < max_iter; ++iter) {
        shifted_matvec(A, shift, v, w);
        double dot = 0.0, norm2 = 0.0;
        for (int i = 0; i < n; ++i) {
            dot += v[i] * w[i];
            norm2 += w[i] * w[i];
        }
        if (norm2 == 0.0) {
            // v is annihilated by the shifted matrix; restart elsewhere.
            randomize();
            rho_prev = std::numeric_limits<double>::quiet_NaN();
            stable = 0;
            continue;
        }
        rho = dot - shift;  // v was unit, so dot = v' (A + shift I) v
        const double inv = 1.0 / std::sqrt(norm2);
        for (int i = 0; i < n; ++i) v[i] = w[i] * inv;

        if (std::isfinite(rho_prev) &&
            std::fabs(rho - rho_prev) <= opts.rel_tolerance * std::max(1.0, std::fabs(rho))) {
            if (++stable >= 3) return rho;
        } else {
            stable = 0;
        }
        rho_prev = rho;
    }
    throw IterationLimitError(
        "power iteration did not converge in " + std::to_string(max_iter) + " iterations", rho);
}

}  // namespace

double largest_eigenvalue(const SymMatrix& A, const EigenOptions& opts) {
    if (!(opts.rel_tolerance > 0.0))
        throw std::invalid_argument("largest_eigenvalue: rel_tolerance must be > 0");
    if (opts.max_iterations < 0)
        throw std::invalid_argument("largest_eigenvalue: max_iterations must be >= 0");
    if (opts.dense_cutoff < 0)
        throw std::invalid_argument("largest_eigenvalue: dense_cutoff must be >= 0");

    const int n = A.dim();
    if (n == 1) return A(0, 0);
    if (n <= opts.dense_cutoff) return dense_largest(A);
    return iterative_largest(A, opts);
}

}  // namespace spikemon
