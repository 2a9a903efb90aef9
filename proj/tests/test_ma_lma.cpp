#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abreu/errors.hpp"
#include "abreu/lma.hpp"
#include "abreu/ma.hpp"
#include "support.hpp"

#include <cmath>

using namespace abreu;
using namespace abreu::testing;

namespace {

double exp_half_sq(double x, double y) { return std::exp(0.5 * (x * x + y * y)); }

// det D^2 of exp(|x|^2/2) in closed form
double exp_det(double x, double y) {
    const double e = exp_half_sq(x, y);
    return e * e * (1 + x * x + y * y);
}

double ma_exp_error(int n) {
    DomainMask m = unit_mask(n);
    ScalarField g = field_of(m.grid, exp_det);
    ScalarField phi = field_of(m.grid, exp_half_sq);
    MAResult r = solve_dirichlet_ma(g, phi, m);
    REQUIRE(r.status == MAStatus::Converged);
    return linf_err(r.u, phi, m);
}

double lma_manufactured_error(int n) {
    DomainMask m = unit_mask(n);
    ScalarField u = field_of(m.grid, exp_half_sq);
    // coefficients U = cof D^2 u; manufactured w = 1 + x^2/2 has second
    // derivatives (1, 0, 0), so f = U^11 = e (1 + y^2)
    ScalarField f = field_of(m.grid, [](double x, double y) {
        return exp_half_sq(x, y) * (1 + y * y);
    });
    ScalarField wm = field_of(m.grid, [](double x, double) { return 1.0 + 0.5 * x * x; });
    ScalarField w = solve_lma(u, f, wm, m);
    return linf_err(w, wm, m);
}

} // namespace

TEST_CASE("newton reproduces the quadratic exactly") {
    DomainMask m = unit_mask(33);
    ScalarField g(m.grid, 1.0);
    ScalarField phi = field_of(m.grid, [](double x, double y) { return 0.5 * (x * x + y * y); });
    MAResult r = solve_dirichlet_ma(g, phi, m);
    CHECK(r.status == MAStatus::Converged);
    CHECK(linf_err(r.u, phi, m) <= 1e-8);
    // boundary passes through exactly
    for (int i = 0; i < 33; ++i) CHECK(r.u(i, 0) == phi(i, 0));
}

TEST_CASE("manufactured exponential solution converges at second order") {
    const double e33 = ma_exp_error(33);
    const double e65 = ma_exp_error(65);
    CHECK(e33 / e65 > 3.0);
    CHECK(e33 / e65 < 5.0);
}

TEST_CASE("newton residual history is non-increasing") {
    DomainMask m = unit_mask(33);
    ScalarField g = field_of(m.grid, exp_det);
    ScalarField phi = field_of(m.grid, exp_half_sq);
    MAResult r = solve_dirichlet_ma(g, phi, m);
    REQUIRE(r.status == MAStatus::Converged);
    for (std::size_t k = 1; k < r.residual_history.size(); ++k)
        CHECK(r.residual_history[k] <= r.residual_history[k - 1] * (1 + 1e-12));
}

TEST_CASE("discrete comparison principle between nested right-hand sides") {
    DomainMask m = unit_mask(33);
    ScalarField g1(m.grid, 1.0), g2(m.grid, 2.0);
    ScalarField phi = field_of(m.grid, [](double x, double y) { return 0.5 * (x * x + y * y); });
    MAConfig cfg;
    MAResult r1 = solve_dirichlet_ma(g1, phi, m, cfg);
    MAResult r2 = solve_dirichlet_ma(g2, phi, m, cfg);
    REQUIRE(r1.status == MAStatus::Converged);
    REQUIRE(r2.status == MAStatus::Converged);
    for (int j = 0; j < 33; ++j)
        for (int i = 0; i < 33; ++i)
            CHECK(r1.u(i, j) >= r2.u(i, j) - 10 * cfg.newton_tol);
}

TEST_CASE("residual field matches the symbolic discrete determinant") {
    DomainMask m = unit_mask(65); // h = 1/32 on [-1,1]^2
    const double h = m.grid.hx();
    ScalarField u = field_of(m.grid, [](double x, double y) {
        return 0.25 * (x * x * x * x + y * y * y * y) + 0.5 * (x * x + y * y);
    });
    ScalarField g = field_of(m.grid, [](double x, double y) {
        return (3 * x * x + 1) * (3 * y * y + 1);
    });
    ScalarField r = ma_residual(u, g, m);
    // centered second difference of x^4/4 is 3x^2 + h^2/2, so the residual is
    // (h^2/2)(3x^2+1) + (h^2/2)(3y^2+1) + h^4/4 at interior nodes
    double mismatch = 0, rmax = 0;
    for (int j = 1; j < 64; ++j)
        for (int i = 1; i < 64; ++i) {
            const double x = m.grid.x(i), y = m.grid.y(j);
            const double pred =
                0.5 * h * h * ((3 * x * x + 1) + (3 * y * y + 1)) + 0.25 * h * h * h * h;
            mismatch = std::max(mismatch, std::abs(r(i, j) - pred));
            rmax = std::max(rmax, std::abs(r(i, j)));
        }
    CHECK(mismatch <= 1e-12);
    CHECK(rmax <= 4.0 * h * h * 1.05);
    CHECK(rmax >= 3.0 * h * h); // genuinely O(h^2), not smaller
}

TEST_CASE("linearized solve reproduces the manufactured field at second order") {
    const double e33 = lma_manufactured_error(33);
    const double e65 = lma_manufactured_error(65);
    CHECK(e33 / e65 > 3.0);
    CHECK(e33 / e65 < 5.0);
}

TEST_CASE("linearized solve is linear in data") {
    DomainMask m = unit_mask(33);
    ScalarField u = field_of(m.grid, exp_half_sq);
    LinearizedMAOperator op(u, m);

    ScalarField f1 = field_of(m.grid, [](double x, double y) { return std::sin(x) + y; });
    ScalarField f2 = field_of(m.grid, [](double x, double y) { return x * y - 0.3; });
    ScalarField b1 = field_of(m.grid, [](double x, double y) { return x + 2 * y; });
    ScalarField b2 = field_of(m.grid, [](double x, double y) { return x * x - y; });

    const double al = 1.7, be = -0.4;
    ScalarField w1 = op.solve(f1, b1);
    ScalarField w2 = op.solve(f2, b2);
    ScalarField fc(m.grid), bc(m.grid);
    for (int k = 0; k < m.grid.size(); ++k) {
        fc.at(k) = al * f1.at(k) + be * f2.at(k);
        bc.at(k) = al * b1.at(k) + be * b2.at(k);
    }
    ScalarField wc = op.solve(fc, bc);
    double err = 0;
    for (int k = 0; k < m.grid.size(); ++k)
        err = std::max(err, std::abs(wc.at(k) - (al * w1.at(k) + be * w2.at(k))));
    CHECK(err <= 1e-10);
}

TEST_CASE("quadratic potential matches a plain poisson solve") {
    DomainMask m = unit_mask(33);
    ScalarField uq = field_of(m.grid, [](double x, double y) { return 0.5 * (x * x + y * y); });
    ScalarField f = field_of(m.grid, [](double x, double y) { return std::cos(2 * x) + y; });
    ScalarField bc = field_of(m.grid, [](double x, double y) { return x - y; });
    ScalarField w_lma = solve_lma(uq, f, bc, m);

    NinePointDirichlet pois(m);
    pois.set_laplacian();
    LinearSolveResult w_p = pois.solve(f, bc);
    double err = 0;
    for (int k = 0; k < m.grid.size(); ++k)
        err = std::max(err, std::abs(w_lma.at(k) - w_p.solution.at(k)));
    CHECK(err <= 1e-12);
}

TEST_CASE("degenerate potential is refused") {
    DomainMask m = unit_mask(17);
    ScalarField aff = field_of(m.grid, [](double x, double y) { return x + 2 * y; });
    CHECK_THROWS_AS(LinearizedMAOperator(aff, m), DegenerateError);
}
