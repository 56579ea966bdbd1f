#pragma once

#include "dicke/kernels.hpp"

namespace dicke {

struct KrylovOptions {
    double tol = 1e-10;   // a posteriori error bound per accepted substep
    int max_dim = 40;     // Krylov subspace size
    /// Full Gram-Schmidt against every Lanczos vector. The three-term
    /// recurrence is accurate enough for short subspaces and much cheaper.
    bool reorthogonalize = false;
};

struct KrylovStats {
    int substeps = 0;
    int matvecs = 0;
    double max_error_estimate = 0.0;
};

/// psi <- exp(-i H tau) psi with Lanczos-based Krylov substeps. The substep
/// length adapts so each error estimate stays below opts.tol.
KrylovStats krylov_evolve(const DickeKernel& h, double tau, QuantumState& psi,
                          const KrylovOptions& opts = {});

} // namespace dicke
