#pragma once

#include "abreu/fd.hpp"
#include "abreu/grid.hpp"
#include "abreu/linsolve.hpp"

#include <vector>

namespace abreu {

struct MAConfig {
    double newton_tol = 1e-9; // max-norm residual tolerance, relative to 1 + |g|_inf
    int max_newton = 60;
    double damping = 0.5;     // backtracking factor of the line search
    double eig_floor = 1e-8;  // eigenvalue clip for the linearization Hessian
};

enum class MAStatus { Converged, NotConverged, NonconvexResult };

struct MAResult {
    ScalarField u;
    MAStatus status = MAStatus::NotConverged;
    std::vector<double> residual_history; // accepted iterates, non-increasing
    int iterations = 0;
    double final_residual = 0;
    double lin_residual = 0; // worst relative residual of the inner solves
};

/// Dirichlet Monge-Ampere solve: det D^2 u = g in Omega, u = phi on the
/// boundary, for the convex branch. Damped Newton with eigenvalue-clipped
/// linearization, started from the Poisson surrogate lap u = 2 sqrt(g).
/// Throws std::domain_error when g <= 0 at an interior node. A shared
/// NinePointDirichlet can be passed to reuse the symbolic factorization.
MAResult solve_dirichlet_ma(const ScalarField& g_rhs, const ScalarField& phi_bc,
                            const DomainMask& mask, const MAConfig& cfg = {},
                            NinePointDirichlet* shared = nullptr);

/// Nodewise det D^2 u - g on interior nodes (zero elsewhere).
ScalarField ma_residual(const ScalarField& u, const ScalarField& g_rhs, const DomainMask& mask);

} // namespace abreu
