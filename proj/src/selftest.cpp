#include "abreu/config.hpp"
#include "abreu/csv.hpp"
#include "abreu/errors.hpp"
#include "abreu/fd.hpp"
#include "abreu/lma.hpp"
#include "abreu/ma.hpp"
#include "abreu/models.hpp"
#include "abreu/oracle.hpp"
#include "abreu/outer.hpp"
#include "abreu/runner.hpp"

#include <cmath>
#include <functional>
#include <ostream>

namespace abreu {

namespace {

struct Battery {
    std::ostream& out;
    int failures = 0;

    void check(const char* name, bool ok) {
        out << (ok ? "ok   " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    }

    void check_throws(const char* name, const std::function<void()>& f) {
        bool threw = false;
        try {
            f();
        } catch (const std::exception&) {
            threw = true;
        }
        check(name, threw);
    }
};

DomainMask default_mask(int n = 33) {
    GridSpec g(n, n, -1, 1, -1, 1);
    return build_domain({RectShape{-1, 1, -1, 1}, RectShape{-0.5, 0.5, -0.5, 0.5}}, g);
}

ScalarField quad_half(const GridSpec& g) {
    return ScalarField::from_function(g, [](double x, double y) { return 0.5 * (x * x + y * y); });
}

} // namespace

int selftest(std::ostream& out) {
    Battery b{out};

    // ---- grid and masks --------------------------------------------------
    {
        DomainMask m = default_mask(65);
        int n0 = 0;
        for (int j = 0; j < 65; ++j)
            for (int i = 0; i < 65; ++i)
                if (m.in_omega0(i, j)) ++n0;
        b.check("domain: 65x65 grid carves a 33x33 Omega0 block", n0 == 33 * 33);
    }
    b.check_throws("domain: disk radius 0.999 violates the boundary buffer", [] {
        GridSpec g(65, 65, -1, 1, -1, 1);
        build_domain({RectShape{-1, 1, -1, 1}, DiskShape{{0, 0}, 0.999}}, g);
    });
    b.check_throws("domain: 5x5 grid leaves Omega0 under 9 interior nodes", [] {
        GridSpec g(5, 5, 0, 1, 0, 1);
        build_domain({RectShape{0, 1, 0, 1}, RectShape{0.25, 0.75, 0.25, 0.75}}, g);
    });

    // ---- finite differences ----------------------------------------------
    {
        DomainMask m = default_mask();
        ScalarField u = quad_half(m.grid);
        HessianField h = hessian(u, &m);
        double err = 0;
        for (int j = 1; j < 32; ++j)
            for (int i = 1; i < 32; ++i) {
                err = std::max(err, std::abs(h.u11[m.grid.idx(i, j)] - 1.0));
                err = std::max(err, std::abs(h.u22[m.grid.idx(i, j)] - 1.0));
                err = std::max(err, std::abs(h.u12[m.grid.idx(i, j)]));
            }
        b.check("hessian: quadratic is stencil-exact", err <= 1e-12);

        ScalarField c = ScalarField::from_function(m.grid, [](double x, double) { return x * x * x; });
        HessianField hc = hessian(c, &m);
        double errc = 0;
        for (int j = 1; j < 32; ++j)
            for (int i = 1; i < 32; ++i)
                errc = std::max(errc,
                                std::abs(hc.u11[m.grid.idx(i, j)] - 6.0 * m.grid.x(i)));
        b.check("hessian: x^3 second derivative exact on interior", errc <= 1e-11);
    }
    {
        GridSpec g(9, 9, -1, 1, -1, 1);
        HessianField h(g);
        auto set = [&](double a, double c12, double c) {
            for (int k = 0; k < g.size(); ++k) {
                h.u11[k] = a;
                h.u12[k] = c12;
                h.u22[k] = c;
            }
        };
        set(1, 0, 1);
        CofactorField U = cofactor(h);
        b.check("cofactor: identity maps to identity",
                U.c11[0] == 1 && U.c12[0] == 0 && U.c22[0] == 1);
        set(2, 0, 3);
        U = cofactor(h);
        b.check("cofactor: diag(2,3) swaps to diag(3,2)", U.c11[0] == 3 && U.c22[0] == 2);
        set(2, 1, 2);
        U = cofactor(h);
        b.check("cofactor: [[2,1],[1,2]] negates the off-diagonal",
                U.c11[0] == 2 && U.c12[0] == -1 && U.c22[0] == 2);
        double tr_err = 0, det_err = 0;
        for (int k = 0; k < g.size(); ++k) {
            tr_err = std::max(tr_err, std::abs((U.c11[k] + U.c22[k]) - (h.u11[k] + h.u22[k])));
            det_err = std::max(det_err,
                               std::abs((U.c11[k] * U.c22[k] - U.c12[k] * U.c12[k]) -
                                        (h.u11[k] * h.u22[k] - h.u12[k] * h.u12[k])));
        }
        b.check("cofactor: trace and determinant identities are exact", tr_err == 0 && det_err == 0);
    }
    {
        DomainMask m = default_mask();
        ScalarField cub = ScalarField::from_function(
            m.grid, [](double x, double y) { return x * x * x + y * y * y; });
        VectorField d = divergence_free_defect(cofactor(hessian(cub, &m)), &m);
        double md = 0;
        for (int k = 0; k < m.grid.size(); ++k)
            md = std::max({md, std::abs(d.r1[k]), std::abs(d.r2[k])});
        b.check("cofactor rows: divergence-free on cubics", md <= 1e-12);

        VectorField dq = divergence_free_defect(cofactor(hessian(quad_half(m.grid), &m)), &m);
        double mq = 0;
        for (int k = 0; k < m.grid.size(); ++k)
            mq = std::max({mq, std::abs(dq.r1[k]), std::abs(dq.r2[k])});
        b.check("cofactor rows: divergence-free on quadratics", mq <= 1e-14);
    }

    // ---- discrete convexity ------------------------------------------------
    {
        DomainMask m = default_mask();
        b.check("convexity: |x|^2/2 passes at 1e-12",
                check_discrete_convexity(quad_half(m.grid), m, 1e-12).empty());

        ScalarField cave = quad_half(m.grid);
        for (double& v : cave.v) v = -v;
        auto viol = check_discrete_convexity(cave, m, 1e-12);
        std::vector<char> hit(m.grid.size(), 0);
        for (auto& v : viol) hit[m.grid.idx(v.i, v.j)] = 1;
        int nhit = 0;
        for (char c : hit) nhit += c;
        b.check("convexity: concave field violates at every interior node",
                nhit == m.n_interior);

        ScalarField saddle = ScalarField::from_function(
            m.grid, [](double x, double y) { return x * x - y * y; });
        auto sv = check_discrete_convexity(saddle, m, 1e-12);
        std::vector<char> yhit(m.grid.size(), 0);
        for (auto& v : sv)
            if (v.direction == 1) yhit[m.grid.idx(v.i, v.j)] = 1;
        int nyh = 0;
        for (char c : yhit) nyh += c;
        b.check("convexity: saddle fails the y-axis test at every interior node",
                nyh == m.n_interior);
    }
    {
        DomainMask m = default_mask();
        ScalarField ones(m.grid, -1.0);
        ConeBound cb = cone_linf_bound(ones, m);
        b.check("cone bound: constant -1 gives lhs 1 and rhs 3",
                std::abs(cb.lhs - 1.0) <= 1e-14 && std::abs(cb.rhs - 3.0) <= 1e-12 && cb.holds);

        ScalarField zero(m.grid, 0.0);
        GradientBound gb = interior_gradient_bound(zero, m);
        b.check("gradient bound: zero field gives 0 <= 0", gb.max_grad == 0 && gb.bound == 0 &&
                                                               gb.holds);

        GradientBound gq = interior_gradient_bound(quad_half(m.grid), m);
        b.check("gradient bound: |x|^2/2 closed form",
                std::abs(gq.max_grad - std::sqrt(0.5)) <= 1e-12 && std::abs(gq.bound - 4.0) <= 1e-12 &&
                    gq.holds);
    }

    // ---- models -------------------------------------------------------------
    {
        LagrangianModel rc = rochet_chone_const(1.0, 0.0);
        const Vec2 x{0.3, -0.2}, p{1.0, 0.5};
        const Vec2 gp = rc.gradpF1(x, p);
        b.check("model rc: gradpF1 = p - x for unit gamma",
                std::abs(gp.x - (p.x - x.x)) <= 1e-15 && std::abs(gp.y - (p.y - x.y)) <= 1e-15);
        b.check("model rc: crossF1 = -2 for unit gamma", std::abs(rc.crossF1(x, p) + 2.0) <= 1e-15);
        LagrangianModel rc1 = rochet_chone_const(1.0, 1.0);
        b.check("model rc: f0(z=2) = 3 at rho 1", std::abs(rc1.f0(x, 2.0) - 3.0) <= 1e-15);
    }
    {
        LagrangianModel ac = allen_cahn();
        b.check("model ac: f0 roots and value",
                ac.f0({}, 0.0) == 0.0 && ac.f0({}, 1.0) == 0.0 && ac.f0({}, 2.0) == 6.0);
        const Sym2 h = ac.hesspF1({}, {3, -1});
        b.check("model ac: hesspF1 is the identity", h.a11 == 1 && h.a12 == 0 && h.a22 == 1);
        b.check("model ac: double-well minima vanish",
                ac.F0({}, 1.0) == 0.0 && ac.F0({}, -1.0) == 0.0);
    }
    {
        LagrangianModel p2 = power_lagrangian(2);
        const Vec2 gp = p2.gradpF1({}, {0.7, -0.3});
        b.check("model power s=2: gradpF1 = p", gp.x == 0.7 && gp.y == -0.3);
        LagrangianModel ex = exp_lagrangian();
        const Sym2 h0 = ex.hesspF1({}, {0, 0});
        b.check("model exp: hesspF1 at 0 is the identity", h0.a11 == 1 && h0.a12 == 0 && h0.a22 == 1);
    }
    {
        DomainMask m = default_mask(17);
        AssumptionReport ra = verify_assumptions(allen_cahn(), m, SampleBox{}, 50);
        b.check("assumptions: double-well f0 fails monotonicity", !ra.f0_monotone.pass);

        LagrangianModel bad = allen_cahn();
        bad.name = "neg_quad";
        bad.F1 = [](Vec2, Vec2 p) { return -dot(p, p); };
        bad.gradpF1 = [](Vec2, Vec2 p) { return -2.0 * p; };
        bad.hesspF1 = [](Vec2, Vec2) { return Sym2{-2, 0, -2}; };
        AssumptionReport rb = verify_assumptions(bad, m, SampleBox{}, 50);
        b.check("assumptions: negative p-Hessian fails the ellipticity bound", !rb.hessp_bounds.pass);
    }
    {
        GaugeFunction g0 = GaugeFunction::log_gauge();
        b.check("gauge log: G'(4) = 1/4 and the inverse matches",
                std::abs(g0.derivative(4.0) - 0.25) <= 1e-15 &&
                    std::abs(g0.invert(0.25) - 4.0) <= 1e-12);
        GaugeFunction gq = GaugeFunction::power(0.25);
        b.check("gauge power 1/4: G'(16) = 0.125 and back",
                std::abs(gq.derivative(16.0) - 0.125) <= 1e-15 &&
                    std::abs(gq.invert(0.125) - 16.0) <= 1e-11);
        GaugeFunction gc = GaugeFunction::custom([](double d) { return std::exp(-d); },
                                                 [](double w) { return -std::log(w); });
        b.check("gauge custom exp(-d): inverse is -log w",
                std::abs(gc.invert(std::exp(-2.0)) - 2.0) <= 1e-12);
        b.check_throws("gauge: negative argument is a domain error",
                       [&] { g0.derivative(-1.0); });
    }

    // ---- Monge-Ampere solver -------------------------------------------------
    {
        DomainMask m = default_mask();
        ScalarField g1(m.grid, 1.0);
        ScalarField phi = quad_half(m.grid);
        MAResult r = solve_dirichlet_ma(g1, phi, m);
        const double err = max_abs_diff(r.u, phi, [&](int i, int j) { return m.in_omega(i, j); });
        b.check("ma: det = 1 with quadratic data reproduces |x|^2/2",
                r.status == MAStatus::Converged && err <= 1e-8);

        b.check_throws("ma: negative g is rejected", [&] {
            ScalarField gneg(m.grid, -1.0);
            solve_dirichlet_ma(gneg, phi, m);
        });

        ScalarField res1 = ma_residual(phi, g1, m);
        b.check("ma residual: quadratic against g=1 vanishes",
                max_abs(res1, [&](int i, int j) { return m.is_interior(i, j); }) <= 1e-14);
        ScalarField g2(m.grid, 2.0);
        ScalarField res2 = ma_residual(phi, g2, m);
        double worst = 0;
        for (int j = 1; j < 32; ++j)
            for (int i = 1; i < 32; ++i) worst = std::max(worst, std::abs(res2(i, j) + 1.0));
        b.check("ma residual: quadratic against g=2 is -1", worst <= 1e-14);
    }

    // ---- linearized Monge-Ampere ---------------------------------------------
    {
        DomainMask m = default_mask();
        ScalarField uq = quad_half(m.grid);
        LinearizedMAOperator op(uq, m);
        const Sym2 c = op.coefficient(16, 16);
        b.check("lma: quadratic potential gives the Laplacian",
                std::abs(c.a11 - 1) <= 1e-12 && std::abs(c.a12) <= 1e-12 &&
                    std::abs(c.a22 - 1) <= 1e-12);

        ScalarField u2 = ScalarField::from_function(
            m.grid, [](double x, double y) { return x * x + 0.5 * y * y; });
        LinearizedMAOperator op2(u2, m);
        const Sym2 c2 = op2.coefficient(16, 16);
        b.check("lma: diag(2,1) Hessian swaps to coefficients (1,2)",
                std::abs(c2.a11 - 1) <= 1e-12 && std::abs(c2.a22 - 2) <= 1e-12);

        ScalarField u3 = ScalarField::from_function(
            m.grid, [](double x, double y) { return 0.5 * (x * x + y * y) + 0.5 * x * y; });
        LinearizedMAOperator op3(u3, m);
        const Sym2 c3 = op3.coefficient(16, 16);
        b.check("lma: constant cross term appears negated with positive det",
                std::abs(c3.a12 + 0.5) <= 1e-12 && c3.a11 * c3.a22 - c3.a12 * c3.a12 > 0.5);

        ScalarField f0(m.grid, 0.0);
        ScalarField harm = ScalarField::from_function(
            m.grid, [](double x, double y) { return x * x - y * y; });
        ScalarField w = solve_lma(uq, f0, harm, m);
        b.check("lma: harmonic polynomial solved exactly",
                max_abs_diff(w, harm, [&](int i, int j) { return m.in_omega(i, j); }) <= 1e-12);

        ScalarField f4(m.grid, 4.0);
        ScalarField sq = ScalarField::from_function(
            m.grid, [](double x, double y) { return x * x + y * y; });
        ScalarField w4 = solve_lma(uq, f4, sq, m);
        b.check("lma: lap w = 4 recovers |x|^2",
                max_abs_diff(w4, sq, [&](int i, int j) { return m.in_omega(i, j); }) <= 1e-11);

        MaxPrincipleReport mp0 = lma_maximum_principle_check(f0, w, m);
        double wmin = 1e300, wmax = -1e300;
        for (int j = 0; j < 33; ++j)
            for (int i = 0; i < 33; ++i) {
                wmin = std::min(wmin, w(i, j));
                wmax = std::max(wmax, w(i, j));
            }
        b.check("lma max principle: zero rhs keeps w inside its boundary range",
                mp0.applicable && mp0.pass);

        ScalarField fneg(m.grid, -1.0);
        ScalarField one_bc(m.grid, 1.0);
        ScalarField wneg = solve_lma(uq, fneg, one_bc, m);
        MaxPrincipleReport mpn = lma_maximum_principle_check(fneg, wneg, m);
        b.check("lma max principle: f <= 0 pushes the interior above the boundary",
                mpn.applicable && mpn.pass && mpn.interior_min >= 1.0 - 1e-8 &&
                    wneg(16, 16) > 1.0);

        MaxPrincipleReport mpp = lma_maximum_principle_check(f4, w4, m);
        b.check("lma max principle: f >= 0 attains the minimum on the boundary",
                mpp.applicable && mpp.pass);
    }

    // ---- outer solver pieces ---------------------------------------------------
    {
        DomainMask m = default_mask();
        ScalarField phi = ScalarField::from_function(
            m.grid, [](double x, double y) { return x * x + y * y; });
        ScalarField psi(m.grid, 1.0);
        AbreuProblem prob =
            make_problem(m, phi, psi, rochet_chone_const(1.0, 1.0), GaugeFunction::log_gauge(),
                         RhsMode::Penalized, PenalizationKind::FixedDelta, 0.1);

        ScalarField f = assemble_rhs(phi, prob);
        double outside = 0;
        for (int j = 1; j < 32; ++j)
            for (int i = 1; i < 32; ++i)
                if (!m.in_omega0(i, j)) outside = std::max(outside, std::abs(f(i, j)));
        b.check("rhs: penalization vanishes at u = phi", outside <= 1e-12);

        AbreuProblem pac = prob;
        pac.rhs_mode = RhsMode::AllenCahn;
        ScalarField uq = quad_half(m.grid);
        ScalarField fac = assemble_rhs(uq, pac);
        double worst_ac = 0;
        for (int j = 1; j < 32; ++j)
            for (int i = 1; i < 32; ++i) {
                const double z = uq(i, j);
                worst_ac = std::max(worst_ac, std::abs(fac(i, j) - (z * z * z - z - 2.0)));
            }
        b.check("rhs: double-well mode evaluates u^3 - u - lap u", worst_ac <= 1e-10);

        // homotopy start: the t = 0 map collapses to the constant
        ScalarField w0 = ScalarField::from_function(
            m.grid, [](double x, double y) { return 0.8 + 0.1 * std::sin(3 * x) * std::cos(y); });
        HomotopyConfig hc;
        PhiStepResult st = phi_t_step(w0, 0.0, prob, hc, 1.0);
        bool exact_one = true;
        for (int j = 0; j < 33; ++j)
            for (int i = 0; i < 33; ++i)
                if (m.in_omega(i, j) && st.w_next(i, j) != 1.0) exact_one = false;
        b.check("homotopy: the t=0 fixed point is w = 1 exactly", exact_one);

        b.check_throws("homotopy: w below the floor is rejected", [&] {
            ScalarField wbad(m.grid, 0.0);
            phi_t_step(wbad, 0.5, prob, hc, 0.5);
        });
        b.check_throws("problem: inf psi = 0 on the boundary is rejected", [&] {
            ScalarField psi0 = ScalarField::from_function(
                m.grid, [](double x, double) { return std::abs(x) - 1.0 < -0.5 ? 1.0 : 0.0; });
            make_problem(m, phi, psi0, rochet_chone_const(1.0, 1.0), GaugeFunction::log_gauge(),
                         RhsMode::Penalized, PenalizationKind::FixedDelta, 0.1);
        });
        b.check_throws("problem: continuation mode requires rho > 0", [&] {
            make_problem(m, phi, psi, rochet_chone_const(1.0, 0.0), GaugeFunction::log_gauge(),
                         RhsMode::Penalized, PenalizationKind::Continuation, 0.1);
        });
    }
    {
        DomainMask m = default_mask();
        MatrixField mf = multiplier_field(quad_half(m.grid), 0.1, m);
        const Sym2 a = mf.at(16, 16);
        b.check("multiplier: quadratic gives 0.1 I",
                std::abs(a.a11 - 0.1) <= 1e-12 && std::abs(a.a12) <= 1e-13 &&
                    std::abs(a.a22 - 0.1) <= 1e-12);

        ScalarField u2 = ScalarField::from_function(
            m.grid, [](double x, double y) { return x * x + 0.5 * y * y; });
        MatrixField m2 = multiplier_field(u2, 1.0, m);
        const Sym2 a2 = m2.at(16, 16);
        b.check("multiplier: diag(2,1) Hessian inverts to diag(1/2,1)",
                std::abs(a2.a11 - 0.5) <= 1e-12 && std::abs(a2.a22 - 1.0) <= 1e-12);
        double min_eig = 1e300;
        for (int j = 1; j < 32; ++j)
            for (int i = 1; i < 32; ++i)
                min_eig = std::min(min_eig, m2.at(i, j).eigenvalues().first);
        b.check("multiplier: eigenvalues stay nonnegative", min_eig >= -1e-13);

        ScalarField zero(m.grid, 0.0);
        ScalarField psi1(m.grid, 1.0);
        BoundaryDiagnostics bd = boundary_diagnostics(zero, psi1, m);
        b.check("boundary: zero field has zero integrals",
                bd.unu2 == 0 && bd.K_psi_unu2 == 0 && bd.max_abs_unu == 0);
    }

    // ---- variational pieces ------------------------------------------------------
    {
        DomainMask m = default_mask();
        LagrangianModel rc = rochet_chone_const(1.0, 0.0);
        b.check("J: monopolist density cancels on |x|^2/2",
                std::abs(evaluate_J(quad_half(m.grid), rc, m)) <= 1e-13);
        b.check("J: zero field gives zero", std::abs(evaluate_J(ScalarField(m.grid, 0.0), rc, m)) ==
                                                0.0);
        b.check("J: constant one integrates to |Omega0|",
                std::abs(evaluate_J(ScalarField(m.grid, 1.0), rc, m) - 1.0) <= 1e-13);

        ScalarField phi = quad_half(m.grid);
        auto je = evaluate_J_eps(phi, rc, GaugeFunction::log_gauge(), 1.0, phi, m);
        b.check("J_eps: all three terms vanish on the quadratic at theta 0",
                je.has_value() && std::abs(*je) <= 1e-12);
        auto je2 = evaluate_J_eps(phi, rc, GaugeFunction::log_gauge(), 0.5, phi, m);
        b.check("J_eps: eps 0.5 variant also vanishes", je2.has_value() && std::abs(*je2) <= 1e-12);

        ScalarField aff = ScalarField::from_function(
            m.grid, [](double x, double y) { return 0.3 * x - 0.1 * y + 2.0; });
        b.check("J_eps: affine field is infeasible",
                !evaluate_J_eps(aff, rc, GaugeFunction::log_gauge(), 1.0, phi, m).has_value());

        ConvexityCone cone(m, quad_half(m.grid));
        std::vector<double> upos(cone.n_unknowns()), uneg(cone.n_unknowns());
        for (int r = 0; r < cone.n_unknowns(); ++r) {
            const int k = cone.node_of_unknown()[r];
            upos[r] = quad_half(m.grid).at(k);
            uneg[r] = -upos[r];
        }
        bool pos_ok = true;
        for (int r = 0; r < cone.n_rows(); ++r)
            if (cone.row_value(r, upos) < -1e-12) pos_ok = false;
        b.check("cone rows: nonnegative on |x|^2/2", pos_ok);
        // rows through boundary nodes keep the convex boundary data; strictly
        // interior rows must go negative on the concave field
        int neg_rows = 0;
        for (int r = 0; r < cone.n_rows(); ++r)
            if (cone.row_value(r, uneg) < 0) ++neg_rows;
        b.check("cone rows: concave field violates interior rows", neg_rows > cone.n_rows() / 2);
    }

    // ---- config validation ----------------------------------------------------
    {
        bool ok = false;
        try {
            parse_config_text("theta = 0.7\n");
        } catch (const ConfigError& e) {
            ok = std::string(e.what()).find("[0, 0.5)") != std::string::npos;
        }
        b.check("config: theta outside [0, 0.5) is rejected with the range", ok);
        b.check_throws("config: unknown keys are rejected",
                       [] { parse_config_text("no.such.key = 1\n"); });
        RunConfig c = parse_config_text("grid.nx = 33\ngrid.ny = 33\nmodel = allen_cahn\n");
        b.check("config: defaults parse and apply overrides", c.nx == 33 && c.model == "allen_cahn");
    }

    out << (b.failures == 0 ? "selftest: all checks passed\n"
                            : "selftest: FAILURES: " + std::to_string(b.failures) + "\n");
    return b.failures;
}

} // namespace abreu
