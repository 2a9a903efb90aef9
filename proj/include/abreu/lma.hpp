#pragma once

#include "abreu/errors.hpp"
#include "abreu/fd.hpp"
#include "abreu/grid.hpp"
#include "abreu/linsolve.hpp"

namespace abreu {

/// Linearized Monge-Ampere operator U^{ij} d_ij at a convex potential u:
/// 9-point non-divergence stencil with nodewise frozen cofactor coefficients.
/// Construction throws DegenerateError when det D^2 u <= 0 at an interior
/// node; the reported min_det is the ellipticity margin.
class LinearizedMAOperator {
public:
    LinearizedMAOperator(const ScalarField& u, const DomainMask& mask);

    double min_det() const { return min_det_; }
    Sym2 coefficient(int i, int j) const { return coeffs_.at(i, j); }

    /// Solve U^{ij} w_ij = f with w = psi_bc on the boundary. Throws
    /// LinSolveError if the relative residual misses 1e-10.
    ScalarField solve(const ScalarField& f, const ScalarField& psi_bc) const;
    double last_rel_residual() const { return last_residual_; }

    ScalarField apply(const ScalarField& w) const { return solver_.apply(w); }

private:
    const DomainMask* mask_;
    CofactorField coeffs_;
    NinePointDirichlet solver_;
    double min_det_ = 0;
    mutable double last_residual_ = 0;
};

/// One-shot convenience wrapper around LinearizedMAOperator.
ScalarField solve_lma(const ScalarField& u, const ScalarField& f, const ScalarField& psi_bc,
                      const DomainMask& mask);

/// Discrete weak maximum principle monitor: for sign-definite f the interior
/// extremum of w must not beat the boundary extremum beyond 1e-8 * scale.
struct MaxPrincipleReport {
    bool applicable = false; // f had a definite sign
    bool pass = true;
    double interior_min = 0, boundary_min = 0;
    double interior_max = 0, boundary_max = 0;
    int witness_i = -1, witness_j = -1;
};
MaxPrincipleReport lma_maximum_principle_check(const ScalarField& f, const ScalarField& w,
                                               const DomainMask& mask);

} // namespace abreu
