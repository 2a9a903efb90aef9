#include "abreu/outer.hpp"

#include "abreu/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace abreu {

namespace {

double min_boundary(const ScalarField& f, const DomainMask& mask) {
    double m = 1e300;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i)
            if (mask.is_boundary(i, j)) m = std::min(m, f(i, j));
    return m;
}

void interior_minmax(const ScalarField& f, const DomainMask& mask, double& lo, double& hi) {
    lo = 1e300;
    hi = -1e300;
    for (int j = 0; j < f.grid.ny; ++j)
        for (int i = 0; i < f.grid.nx; ++i)
            if (mask.is_interior(i, j)) {
                lo = std::min(lo, f(i, j));
                hi = std::max(hi, f(i, j));
            }
}

} // namespace

AbreuProblem make_problem(DomainMask mask, ScalarField phi, ScalarField psi,
                          LagrangianModel model, GaugeFunction gauge, RhsMode rhs_mode,
                          PenalizationKind pen_kind, double penalization) {
    if (!(penalization > 0))
        throw std::invalid_argument("make_problem: penalization must be positive");
    if (min_boundary(psi, mask) <= 0)
        throw std::invalid_argument("make_problem: inf psi over the boundary must be positive");
    if (pen_kind == PenalizationKind::Continuation) {
        if (!(model.rho > 0))
            throw std::invalid_argument("make_problem: continuation mode requires rho > 0");
        HessianField h = hessian(phi, &mask);
        for (int j = 0; j < mask.grid.ny; ++j)
            for (int i = 0; i < mask.grid.nx; ++i) {
                if (!mask.is_interior(i, j)) continue;
                const auto [lo, hi] = h.at(i, j).eigenvalues();
                (void)hi;
                if (!(lo > 0))
                    throw std::invalid_argument(
                        "make_problem: continuation mode requires uniformly convex phi");
            }
    }
    AbreuProblem p;
    p.mask = std::move(mask);
    p.phi = std::move(phi);
    p.psi = std::move(psi);
    p.model = std::move(model);
    p.gauge = std::move(gauge);
    p.rhs_mode = rhs_mode;
    p.pen_kind = pen_kind;
    p.penalization = penalization;
    return p;
}

ScalarField assemble_rhs(const ScalarField& u, const AbreuProblem& prob) {
    const DomainMask& mask = prob.mask;
    const GridSpec& g = mask.grid;
    HessianField h = hessian(u, &mask);
    ScalarField f(g);

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!mask.is_interior(i, j)) continue;
            const Vec2 x{g.x(i), g.y(j)};
            switch (prob.rhs_mode) {
                case RhsMode::Penalized: {
                    if (mask.in_omega0(i, j)) {
                        const Vec2 du = centered_gradient(u, i, j);
                        const Sym2 hp = prob.model.hesspF1(x, du);
                        const Sym2 d2 = h.at(i, j);
                        const double contraction =
                            hp.a11 * d2.a11 + 2.0 * hp.a12 * d2.a12 + hp.a22 * d2.a22;
                        f(i, j) = prob.model.f0(x, u(i, j)) - prob.model.crossF1(x, du) -
                                  contraction;
                    } else {
                        f(i, j) = (u(i, j) - prob.phi(i, j)) / prob.penalization;
                    }
                    break;
                }
                case RhsMode::GeneralDiv: {
                    const Vec2 du = centered_gradient(u, i, j);
                    const Sym2 hp = prob.model.hesspF1(x, du);
                    const Sym2 d2 = h.at(i, j);
                    f(i, j) = -prob.model.crossF1(x, du) -
                              (hp.a11 * d2.a11 + 2.0 * hp.a12 * d2.a12 + hp.a22 * d2.a22);
                    break;
                }
                case RhsMode::AllenCahn: {
                    const double z = u(i, j);
                    f(i, j) = z * z * z - z - (h.u11[g.idx(i, j)] + h.u22[g.idx(i, j)]);
                    break;
                }
            }
        }
    return f;
}

PhiStepResult phi_t_step(const ScalarField& w, double t, const AbreuProblem& prob,
                         const HomotopyConfig& cfg, double sigma,
                         const ScalarField* rhs_override, NinePointDirichlet* shared_ma) {
    const DomainMask& mask = prob.mask;
    const GridSpec& g = mask.grid;

    ScalarField g_rhs(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!mask.is_interior(i, j)) continue;
            if (w(i, j) < cfg.w_floor)
                throw std::invalid_argument("phi_t_step: w below the positivity floor");
            try {
                g_rhs(i, j) = prob.gauge.invert(w(i, j));
            } catch (const std::domain_error&) {
                throw DegenerateError("phi_t_step: gauge inversion left its range");
            }
        }

    PhiStepResult out;
    MAResult ma = solve_dirichlet_ma(g_rhs, prob.phi, mask, cfg.ma, shared_ma);
    out.ma_status = ma.status;
    out.ma_residual = ma.final_residual;
    out.u = std::move(ma.u);

    ScalarField f = rhs_override ? *rhs_override : assemble_rhs(out.u, prob);
    const double rhs_scale =
        (prob.pen_kind == PenalizationKind::Continuation && rhs_override == nullptr)
            ? t / prob.penalization
            : t;
    ScalarField f_scaled(g);
    for (int k = 0; k < g.size(); ++k) f_scaled.at(k) = rhs_scale * f.at(k);

    ScalarField w_bc(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (mask.is_boundary(i, j)) w_bc(i, j) = t * prob.psi(i, j) + (1.0 - t);

    LinearizedMAOperator lma(out.u, mask);
    out.min_det = lma.min_det();
    ScalarField w_tilde = lma.solve(f_scaled, w_bc);
    out.lma_residual = lma.last_rel_residual();

    double lo, hi;
    interior_minmax(hessian_determinant(out.u, mask), mask, lo, hi);
    out.min_det = lo;
    out.max_det = hi;

    out.w_next = ScalarField(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (mask.is_boundary(i, j)) {
                out.w_next(i, j) = w_tilde(i, j);
            } else if (mask.is_interior(i, j)) {
                out.w_next(i, j) =
                    std::max(cfg.w_floor, (1.0 - sigma) * w(i, j) + sigma * w_tilde(i, j));
            }
        }
    return out;
}

namespace {

struct PicardOutcome {
    bool converged = false;
    bool degenerate = false;
    double defect = 1e300;
    ScalarField w, u;
    double min_det = 0, max_det = 0;
    int iterations = 0;
};

PicardOutcome picard_at_t(ScalarField w, double t, const AbreuProblem& prob,
                          const HomotopyConfig& cfg, double& sigma, SolveReport& report,
                          NinePointDirichlet& shared_ma) {
    PicardOutcome out;
    const double blowup = 1e6;
    double best_defect = 1e300;
    int since_best = 0;

    for (int k = 0; k < cfg.max_outer; ++k) {
        PhiStepResult step;
        try {
            step = phi_t_step(w, t, prob, cfg, sigma, nullptr, &shared_ma);
        } catch (const DegenerateError&) {
            out.degenerate = true;
            break;
        } catch (const LinSolveError&) {
            out.degenerate = true;
            break;
        }
        if (step.ma_status == MAStatus::NotConverged) {
            // inner solver failed; let the caller shrink the t-step
            out.degenerate = true;
            break;
        }

        double defect = 0;
        double min_w = 1e300, max_w = -1e300;
        for (int j = 0; j < w.grid.ny; ++j)
            for (int i = 0; i < w.grid.nx; ++i) {
                if (!prob.mask.is_interior(i, j)) continue;
                defect = std::max(defect, std::abs(step.w_next(i, j) - w(i, j)));
                min_w = std::min(min_w, step.w_next(i, j));
                max_w = std::max(max_w, step.w_next(i, j));
            }

        report.history.push_back({t, k, defect, step.ma_residual, step.lma_residual, min_w, max_w,
                                  step.min_det, step.max_det});
        w = step.w_next;
        out.u = std::move(step.u);
        out.min_det = step.min_det;
        out.max_det = step.max_det;
        out.defect = defect;
        out.iterations = k + 1;

        if (!std::isfinite(defect) || defect > blowup) break;
        if (defect <= cfg.outer_tol) {
            out.converged = true;
            break;
        }
        // damping guard: halve on sustained growth, abort on stagnation
        if (defect < best_defect) {
            best_defect = defect;
            since_best = 0;
        } else {
            ++since_best;
            if (defect > 2.0 * best_defect) {
                sigma = std::max(1.0 / 64.0, 0.5 * sigma);
                best_defect = defect;
                since_best = 0;
            } else if (since_best > 60) {
                break; // oscillating plateau; bisection is cheaper
            }
        }
    }
    out.w = std::move(w);
    return out;
}

} // namespace

SolveReport solve_abreu(const AbreuProblem& prob, const HomotopyConfig& cfg,
                        const ScalarField* w0, bool skip_homotopy) {
    if (cfg.t_schedule.empty() || cfg.t_schedule.front() != 0.0 || cfg.t_schedule.back() != 1.0)
        if (!skip_homotopy)
            throw std::invalid_argument("solve_abreu: t-schedule must run from 0 to 1");
    if (!(cfg.sigma > 0.0) || cfg.sigma > 1.0)
        throw std::invalid_argument("solve_abreu: sigma must lie in (0, 1]");

    const DomainMask& mask = prob.mask;
    SolveReport report;

    ScalarField w = w0 ? *w0 : ScalarField(mask.grid, 1.0);
    NinePointDirichlet shared_ma(mask);

    std::vector<double> schedule =
        skip_homotopy ? std::vector<double>{1.0} : cfg.t_schedule;

    double sigma = cfg.sigma;
    ScalarField w_good = w; // last converged level
    double t_good = skip_homotopy ? 1.0 : 0.0;
    bool ok = true;
    PicardOutcome last;

    std::size_t si = 0;
    int bisections = 0;
    while (si < schedule.size()) {
        const double t = schedule[si];
        double sigma_t = sigma;
        PicardOutcome po = picard_at_t(w, t, prob, cfg, sigma_t, report, shared_ma);
        if (po.converged) {
            w = po.w;
            w_good = w;
            t_good = t;
            sigma = sigma_t;
            // a fast level earns a bolder damping for the next one
            if (po.iterations <= 12) sigma = std::min(1.0, 2.0 * sigma);
            last = std::move(po);
            ++si;
            continue;
        }
        // refine the t-step and retry from the last good level
        if (bisections < cfg.max_bisect && t > t_good + 1e-6) {
            const double tm = 0.5 * (t_good + t);
            schedule.insert(schedule.begin() + static_cast<long>(si), tm);
            w = w_good;
            sigma = std::max(1.0 / 64.0, 0.5 * sigma);
            ++bisections;
            continue;
        }
        last = std::move(po);
        ok = false;
        report.hint = "bisect last t-step (schedule refinement exhausted)";
        break;
    }

    report.u = last.u.grid.size() ? last.u : prob.phi;
    report.w = last.w.grid.size() ? last.w : w;
    report.final_defect = last.defect;

    if (!ok) {
        report.status = last.degenerate ? SolveStatus::Degenerate : SolveStatus::NotConverged;
    } else {
        bool convex = is_discretely_convex(report.u, mask, 1e-8);
        double min_w, max_w;
        interior_minmax(report.w, mask, min_w, max_w);
        const bool floor_inactive = min_w > cfg.w_floor * (1.0 + 1e-9);
        report.status = (convex && floor_inactive) ? SolveStatus::Converged
                                                   : SolveStatus::NotConverged;
        if (!convex) report.hint = "iterate lost discrete convexity at exit";
        if (!floor_inactive) report.hint = "positivity floor active at exit";
    }

    // diagnostics
    SolveDiagnostics& d = report.diag;
    d.linf_u = max_abs(report.u, [&](int i, int j) { return mask.in_omega(i, j); });
    interior_minmax(hessian_determinant(report.u, mask), mask, d.min_det, d.max_det);

    BoundaryDiagnostics bd = boundary_diagnostics(report.u, prob.psi, mask);
    d.bnd_unu2 = bd.unu2;

    QuadratureWeights q = quadrature(mask);
    double pen_sq = 0, in0_sq = 0;
    for (int j = 0; j < mask.grid.ny; ++j)
        for (int i = 0; i < mask.grid.nx; ++i) {
            const int k = mask.grid.idx(i, j);
            const double dev = report.u(i, j) - prob.phi(i, j);
            pen_sq += q.w_outside[k] * dev * dev;
            if (mask.in_omega0(i, j)) in0_sq += q.w_omega0[k] * dev * dev;
        }
    d.pen_l2 = pen_sq / prob.penalization;
    d.J = evaluate_J(report.u, prob.model, mask);
    auto jp = evaluate_J_eps(report.u, prob.model, prob.gauge, prob.penalization, prob.phi, mask);
    d.J_pen = jp ? *jp : std::nan("");
    d.eps_bnd_unu2 = prob.penalization * d.bnd_unu2;
    d.rho_l2_omega0 = prob.model.rho * in0_sq;
    d.inveps_l2_outside = pen_sq / prob.penalization;
    return report;
}

ContinuationResult epsilon_continuation(const AbreuProblem& prob_template,
                                        const std::vector<double>& eps_list,
                                        const HomotopyConfig& cfg, bool cold_start) {
    if (prob_template.pen_kind != PenalizationKind::Continuation)
        throw std::invalid_argument("epsilon_continuation: problem must be in continuation mode");
    for (std::size_t k = 0; k + 1 < eps_list.size(); ++k)
        if (!(eps_list[k] > eps_list[k + 1]))
            throw std::invalid_argument("epsilon_continuation: eps list must decrease");
    if (eps_list.empty() || !(eps_list.back() > 0))
        throw std::invalid_argument("epsilon_continuation: eps must be positive");

    ContinuationResult out;
    out.eps_list = eps_list;
    const ScalarField* prev_w = nullptr;
    const ScalarField* prev_u = nullptr;

    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        AbreuProblem prob = prob_template;
        prob.penalization = eps_list[k];

        SolveReport rep;
        if (k == 0 || cold_start || prev_w == nullptr) {
            rep = solve_abreu(prob, cfg);
        } else {
            rep = solve_abreu(prob, cfg, prev_w, /*skip_homotopy=*/true);
            if (rep.status != SolveStatus::Converged) rep = solve_abreu(prob, cfg);
        }

        double dprev = std::nan("");
        if (prev_u != nullptr)
            dprev = max_abs_diff(rep.u, *prev_u, [&](int i, int j) {
                return prob_template.mask.in_omega0(i, j);
            });
        out.diff_prev.push_back(dprev);
        out.reports.push_back(std::move(rep));
        prev_w = &out.reports.back().w;
        prev_u = &out.reports.back().u;
    }
    return out;
}

MatrixField multiplier_field(const ScalarField& u, double eps, const DomainMask& mask) {
    HessianField h = hessian(u, &mask);
    MatrixField m;
    m.grid = u.grid;
    m.m11.assign(u.grid.size(), 0.0);
    m.m12.assign(u.grid.size(), 0.0);
    m.m22.assign(u.grid.size(), 0.0);
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i) {
            if (!mask.is_interior(i, j)) continue;
            const double det = h.det(i, j);
            if (!(det > 0))
                throw DegenerateError("multiplier_field: det D^2 u <= 0 at an interior node");
            const int k = u.grid.idx(i, j);
            m.m11[k] = eps * h.u22[k] / det;
            m.m12[k] = -eps * h.u12[k] / det;
            m.m22[k] = eps * h.u11[k] / det;
        }
    return m;
}

namespace {

struct CurveSample {
    Vec2 p;
    double k; // boundary curvature
};

double superellipse_curvature(const SuperellipseShape& se, double x, double y) {
    auto d1 = [&](double t, double c) {
        return (se.m / c) * ((t >= 0) ? 1.0 : -1.0) * std::pow(std::abs(t / c), se.m - 1.0);
    };
    auto d2 = [&](double t, double c) {
        return (se.m * (se.m - 1.0) / (c * c)) * std::pow(std::abs(t / c), se.m - 2.0);
    };
    const double sx = d1(x, se.a), sy = d1(y, se.b);
    const double sxx = d2(x, se.a), syy = d2(y, se.b);
    const double g2 = sx * sx + sy * sy;
    return (sx * sx * syy + sy * sy * sxx) / std::pow(g2, 1.5);
}

} // namespace

BoundaryDiagnostics boundary_diagnostics(const ScalarField& u, const ScalarField& psi,
                                         const DomainMask& mask) {
    const GridSpec& g = mask.grid;
    const double hx = g.hx(), hy = g.hy();
    BoundaryDiagnostics out;

    if (mask.rect_outer) {
        out.curvature_warning = true; // curvature concentrates at the corners
        auto face = [&](bool horizontal, int fixed, double sign) {
            const int n = horizontal ? g.nx : g.ny;
            const double h = horizontal ? hx : hy;
            double acc = 0;
            for (int s = 0; s < n; ++s) {
                const int i = horizontal ? s : fixed;
                const int j = horizontal ? fixed : s;
                double unu;
                if (horizontal) {
                    const int j1 = fixed - static_cast<int>(sign), j2 = fixed - 2 * static_cast<int>(sign);
                    unu = sign * (3 * u(i, j) - 4 * u(i, j1) + u(i, j2)) / (2 * hy);
                } else {
                    const int i1 = fixed - static_cast<int>(sign), i2 = fixed - 2 * static_cast<int>(sign);
                    unu = sign * (3 * u(i, j) - 4 * u(i1, j) + u(i2, j)) / (2 * hx);
                }
                out.max_abs_unu = std::max(out.max_abs_unu, std::abs(unu));
                const double wq = (s == 0 || s == n - 1) ? 0.5 : 1.0;
                acc += wq * unu * unu;
            }
            out.unu2 += acc * h;
        };
        face(true, 0, -1.0);
        face(true, g.ny - 1, 1.0);
        face(false, 0, -1.0);
        face(false, g.nx - 1, 1.0);
        return out;
    }

    // superellipse boundary: polygonal arc weights over the boundary nodes,
    // ordered by angle
    const auto& se = std::get<SuperellipseShape>(mask.shape.omega);
    std::vector<std::pair<double, int>> order; // (angle, node)
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (mask.is_boundary(i, j))
                order.emplace_back(std::atan2(g.y(j), g.x(i)), g.idx(i, j));
    std::sort(order.begin(), order.end());
    const int nb = static_cast<int>(order.size());
    if (nb < 3) return out;

    auto pos = [&](int q) {
        const int k = order[q].second;
        return Vec2{g.x(k % g.nx), g.y(k / g.nx)};
    };

    for (int q = 0; q < nb; ++q) {
        const int k = order[q].second;
        const int i = k % g.nx, j = k / g.nx;
        const Vec2 nu = mask.normal[k];

        // one-sided derivatives pointing into the domain
        auto deriv = [&](bool along_x) {
            const int di = along_x ? 1 : 0, dj = along_x ? 0 : 1;
            const double h = along_x ? hx : hy;
            const bool plus_in = mask.in_omega(i + di, j + dj) && mask.in_omega(i + 2 * di, j + 2 * dj);
            const bool minus_in = mask.in_omega(i - di, j - dj) && mask.in_omega(i - 2 * di, j - 2 * dj);
            if (mask.in_omega(i + di, j + dj) && mask.in_omega(i - di, j - dj))
                return (u(i + di, j + dj) - u(i - di, j - dj)) / (2 * h);
            if (plus_in)
                return (-3 * u(i, j) + 4 * u(i + di, j + dj) - u(i + 2 * di, j + 2 * dj)) / (2 * h);
            if (minus_in)
                return (3 * u(i, j) - 4 * u(i - di, j - dj) + u(i - 2 * di, j - 2 * dj)) / (2 * h);
            if (mask.in_omega(i + di, j + dj)) return (u(i + di, j + dj) - u(i, j)) / h;
            if (mask.in_omega(i - di, j - dj)) return (u(i, j) - u(i - di, j - dj)) / h;
            return 0.0;
        };
        const Vec2 du{deriv(true), deriv(false)};
        const double unu = dot(du, nu);
        out.max_abs_unu = std::max(out.max_abs_unu, std::abs(unu));

        const Vec2 prev = pos((q + nb - 1) % nb), next = pos((q + 1) % nb), cur = pos(q);
        const double ds = 0.5 * ((cur - prev).norm() + (next - cur).norm());
        const double K = superellipse_curvature(se, cur.x, cur.y);
        out.unu2 += ds * unu * unu;
        out.K_psi_unu2 += ds * K * psi.at(k) * unu * unu;
    }
    return out;
}

} // namespace abreu
