#include "abreu/lma.hpp"

#include <algorithm>
#include <cmath>

namespace abreu {

LinearizedMAOperator::LinearizedMAOperator(const ScalarField& u, const DomainMask& mask)
    : mask_(&mask), coeffs_(u.grid), solver_(mask) {
    HessianField h = hessian(u, &mask);
    min_det_ = 1e300;
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i) {
            if (!mask.is_interior(i, j)) continue;
            const double d = h.det(i, j);
            min_det_ = std::min(min_det_, d);
        }
    if (!(min_det_ > 0))
        throw DegenerateError("assemble_lma: det D^2 u <= 0 at an interior node");
    coeffs_ = cofactor(h);
    solver_.set_coefficients(coeffs_.c11, coeffs_.c12, coeffs_.c22);
}

ScalarField LinearizedMAOperator::solve(const ScalarField& f, const ScalarField& psi_bc) const {
    LinearSolveResult r = solver_.solve(f, psi_bc);
    last_residual_ = r.rel_residual;
    if (!r.ok || r.rel_residual > 1e-10)
        throw LinSolveError("solve_lma: linear solver missed the 1e-10 residual contract");
    return std::move(r.solution);
}

ScalarField solve_lma(const ScalarField& u, const ScalarField& f, const ScalarField& psi_bc,
                      const DomainMask& mask) {
    LinearizedMAOperator op(u, mask);
    return op.solve(f, psi_bc);
}

MaxPrincipleReport lma_maximum_principle_check(const ScalarField& f, const ScalarField& w,
                                               const DomainMask& mask) {
    const GridSpec& g = f.grid;
    bool nonpos = true, nonneg = true;
    double wmax = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (mask.is_interior(i, j)) {
                nonpos = nonpos && f(i, j) <= 0;
                nonneg = nonneg && f(i, j) >= 0;
            }
            if (mask.in_omega(i, j)) wmax = std::max(wmax, std::abs(w(i, j)));
        }

    MaxPrincipleReport rep;
    rep.applicable = nonpos || nonneg;
    rep.interior_min = 1e300;
    rep.interior_max = -1e300;
    rep.boundary_min = 1e300;
    rep.boundary_max = -1e300;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (mask.is_interior(i, j)) {
                rep.interior_min = std::min(rep.interior_min, w(i, j));
                rep.interior_max = std::max(rep.interior_max, w(i, j));
            } else if (mask.is_boundary(i, j)) {
                rep.boundary_min = std::min(rep.boundary_min, w(i, j));
                rep.boundary_max = std::max(rep.boundary_max, w(i, j));
            }
        }
    if (!rep.applicable) return rep;

    const double slack = 1e-8 * std::max(1.0, wmax);
    if (nonpos && rep.interior_min < rep.boundary_min - slack) rep.pass = false;
    if (nonneg && rep.interior_max > rep.boundary_max + slack) rep.pass = false;
    if (!rep.pass) {
        for (int j = 0; j < g.ny && rep.witness_i < 0; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (mask.is_interior(i, j) &&
                    ((nonpos && w(i, j) < rep.boundary_min - slack) ||
                     (nonneg && w(i, j) > rep.boundary_max + slack))) {
                    rep.witness_i = i;
                    rep.witness_j = j;
                    break;
                }
    }
    return rep;
}

} // namespace abreu
