#include "abreu/ma.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace abreu {

namespace {

double residual_norm(const ScalarField& r, const DomainMask& mask) {
    double m = 0;
    for (int j = 0; j < r.grid.ny; ++j)
        for (int i = 0; i < r.grid.nx; ++i)
            if (mask.is_interior(i, j)) m = std::max(m, std::abs(r(i, j)));
    return m;
}

} // namespace

ScalarField ma_residual(const ScalarField& u, const ScalarField& g_rhs, const DomainMask& mask) {
    HessianField h = hessian(u, &mask);
    ScalarField r(u.grid);
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i)
            if (mask.is_interior(i, j)) r(i, j) = h.det(i, j) - g_rhs(i, j);
    return r;
}

MAResult solve_dirichlet_ma(const ScalarField& g_rhs, const ScalarField& phi_bc,
                            const DomainMask& mask, const MAConfig& cfg,
                            NinePointDirichlet* shared) {
    const GridSpec& g = mask.grid;
    double gmax = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!mask.is_interior(i, j)) continue;
            if (!(g_rhs(i, j) > 0))
                throw std::domain_error("solve_dirichlet_ma: g must be positive in Omega");
            gmax = std::max(gmax, g_rhs(i, j));
        }

    std::optional<NinePointDirichlet> local;
    if (!shared) local.emplace(mask);
    NinePointDirichlet& solver = shared ? *shared : *local;

    MAResult out;
    out.lin_residual = 0;

    // Poisson start: lap u = 2 sqrt(g), exact for isotropic Hessians
    {
        ScalarField f(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (mask.is_interior(i, j)) f(i, j) = 2.0 * std::sqrt(g_rhs(i, j));
        solver.set_laplacian();
        LinearSolveResult ls = solver.solve(f, phi_bc);
        out.lin_residual = std::max(out.lin_residual, ls.rel_residual);
        out.u = std::move(ls.solution);
    }

    const double tol = cfg.newton_tol * (1.0 + gmax);
    ScalarField res = ma_residual(out.u, g_rhs, mask);
    double rnorm = residual_norm(res, mask);
    out.residual_history.push_back(rnorm);

    const std::size_t nn = static_cast<std::size_t>(g.size());
    std::vector<double> ca(nn), cb(nn), cc(nn);
    ScalarField zero_bc(g, 0.0);

    for (int it = 0; it < cfg.max_newton && rnorm > tol; ++it) {
        HessianField h = hessian(out.u, &mask);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const int k = g.idx(i, j);
                if (!mask.is_interior(i, j)) continue;
                const Sym2 hc = h.at(i, j).clipped_below(cfg.eig_floor);
                const Sym2 U = cofactor2(hc);
                ca[k] = U.a11;
                cb[k] = U.a12;
                cc[k] = U.a22;
            }
        solver.set_coefficients(ca, cb, cc);

        ScalarField rhs(g);
        for (int k = 0; k < g.size(); ++k) rhs.at(k) = -res.at(k);
        LinearSolveResult ls = solver.solve(rhs, zero_bc);
        out.lin_residual = std::max(out.lin_residual, ls.rel_residual);
        if (!ls.ok) break;

        // backtracking on the max-norm residual
        double alpha = 1.0;
        bool accepted = false;
        while (alpha > 1e-8) {
            ScalarField u_try = out.u;
            for (int k = 0; k < g.size(); ++k) u_try.at(k) += alpha * ls.solution.at(k);
            ScalarField res_try = ma_residual(u_try, g_rhs, mask);
            const double rn_try = residual_norm(res_try, mask);
            if (rn_try < rnorm * (1.0 - 1e-4 * alpha) || rn_try <= tol) {
                out.u = std::move(u_try);
                res = std::move(res_try);
                rnorm = rn_try;
                accepted = true;
                break;
            }
            alpha *= cfg.damping;
        }
        ++out.iterations;
        if (!accepted) break; // stalled line search
        out.residual_history.push_back(rnorm);
    }

    out.final_residual = rnorm;
    if (rnorm <= tol) {
        out.status = is_discretely_convex(out.u, mask, 1e-8) ? MAStatus::Converged
                                                             : MAStatus::NonconvexResult;
    } else {
        out.status = MAStatus::NotConverged;
    }
    return out;
}

} // namespace abreu
