#pragma once

#include "spikemon/sym_matrix.hpp"

namespace spikemon {

struct EigenOptions {
    /// Convergence tolerance, relative to max(1, |estimate|).
    double rel_tolerance = 1e-10;
    /// Iteration cap for the shifted power method; 0 picks 1000 + 10*n.
    int max_iterations = 0;
    /// Largest dimension handled by the direct tridiagonal solver; bigger
    /// matrices use shifted power iteration. Exposed mainly for tests.
    int dense_cutoff = 512;
};

/// Algebraically largest eigenvalue of A (not the largest in magnitude).
///
/// n <= dense_cutoff: Householder tridiagonalization + implicit-shift QL,
/// all eigenvalues computed and the maximum returned. Above the cutoff:
/// power iteration on A + cI with c the Gershgorin row bound, which makes
/// the shifted matrix positive semidefinite so the iteration cannot lock
/// onto a large negative eigenvalue; converged Rayleigh quotients are
/// returned. Throws IterationLimitError (carrying the best estimate) if the
/// iteration budget runs out, std::invalid_argument on bad options.
double largest_eigenvalue(const SymMatrix& A, const EigenOptions& opts = {});

}  // namespace spikemon
