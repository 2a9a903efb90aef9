#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abreu/oracle.hpp"
#include "abreu/outer.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace abreu;
using namespace abreu::testing;

namespace {

LagrangianModel tracking_model(double rho, double (*target)(double, double)) {
    LagrangianModel m;
    m.name = "tracking";
    m.rho = rho;
    m.F0 = [rho, target](Vec2 x, double z) {
        const double d = z - target(x.x, x.y);
        return 0.5 * rho * d * d;
    };
    m.f0 = [rho, target](Vec2 x, double z) { return rho * (z - target(x.x, x.y)); };
    m.F1 = [](Vec2, Vec2) { return 0.0; };
    m.gradpF1 = [](Vec2, Vec2) { return Vec2{0, 0}; };
    m.hesspF1 = [](Vec2, Vec2) { return Sym2{0, 0, 0}; };
    m.crossF1 = [](Vec2, Vec2) { return 0.0; };
    m.eta = [rho](double r) { return rho * (1 + r) * (1 + r); };
    return m;
}

double convex_target(double x, double y) { return 0.5 * (x * x + y * y) + 1.0; }
double saddle_target(double x, double y) { return x * x - y * y; }

/// Feasible-by-construction audit point: max of phi = |x|^2 and a tangent
/// plane raised inside Omega0 only.
ScalarField feasible_bump(const DomainMask& mask, const ScalarField& phi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ub(-0.35, 0.35), us(0.0, 1.0);
    const double cx = ub(rng), cy = ub(rng);
    const double margin = 0.5 - std::max(std::abs(cx), std::abs(cy));
    const double s = us(rng) * margin * margin;
    ScalarField v = phi;
    for (int j = 0; j < mask.grid.ny; ++j)
        for (int i = 0; i < mask.grid.nx; ++i) {
            const double x = mask.grid.x(i), y = mask.grid.y(j);
            const double plane =
                (cx * cx + cy * cy) + 2 * cx * (x - cx) + 2 * cy * (y - cy) + s;
            v(i, j) = std::max(phi(i, j), plane);
        }
    return v;
}

} // namespace

TEST_CASE("cone projection is idempotent on feasible fields") {
    DomainMask m = unit_mask(33);
    ScalarField phi = field_of(m.grid, [](double x, double y) { return x * x + y * y; });
    ConvexityCone cone(m, phi);
    std::vector<double> u(cone.n_unknowns());
    for (int r = 0; r < cone.n_unknowns(); ++r) u[r] = phi.at(cone.node_of_unknown()[r]);
    std::vector<double> before = u;
    const double viol = cone.project(u, 1e-14, 100);
    CHECK(viol <= 1e-14);
    for (int r = 0; r < cone.n_unknowns(); ++r) CHECK(u[r] == before[r]);
}

TEST_CASE("projection lands on the cone from an infeasible start") {
    DomainMask m = unit_mask(17);
    ScalarField phi = field_of(m.grid, [](double x, double y) { return x * x + y * y; });
    ConvexityCone cone(m, phi);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> noise(-0.3, 0.3);
    std::vector<double> u(cone.n_unknowns());
    for (int r = 0; r < cone.n_unknowns(); ++r)
        u[r] = phi.at(cone.node_of_unknown()[r]) + noise(rng);
    const double viol = cone.project(u, 1e-11, 20000);
    CHECK(viol <= 1e-11);
}

TEST_CASE("interior minimizer: the convex tracking target is reproduced") {
    DomainMask m = unit_mask(33);
    ScalarField phi = field_of(m.grid, convex_target);
    LagrangianModel model = tracking_model(1.0, convex_target);
    OracleResult res = minimize_constrained(model, phi, m);
    CHECK(res.converged);
    ScalarField target = field_of(m.grid, convex_target);
    CHECK(linf_err(res.u, target, m) <= 1e-6);
    CHECK(res.max_violation <= 1e-10);
}

TEST_CASE("saddle target: multi-start agreement of the cone projection") {
    DomainMask m = unit_mask(33);
    ScalarField phi = field_of(m.grid, [](double x, double y) { return x * x + y * y; });
    LagrangianModel model = tracking_model(1.0, saddle_target);

    OracleResult base = minimize_constrained(model, phi, m);
    CHECK(base.converged);
    CHECK(base.max_violation <= 1e-10);
    // the saddle forces active constraints somewhere
    ScalarField target = field_of(m.grid, saddle_target);
    CHECK(linf_err(base.u, target, m) > 1e-3);

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> noise(-0.5, 0.5);
    for (int trial = 0; trial < 5; ++trial) {
        ScalarField start = phi;
        for (int j = 1; j < 32; ++j)
            for (int i = 1; i < 32; ++i) start(i, j) += noise(rng);
        OracleResult res = minimize_constrained(model, phi, m, {}, &start);
        CHECK(res.converged);
        CHECK(linf_err(res.u, base.u, m) <= 1e-5);
    }
}

TEST_CASE("objective history is non-increasing") {
    DomainMask m = unit_mask(33);
    ScalarField phi = field_of(m.grid, [](double x, double y) { return x * x + y * y; });
    LagrangianModel model = rochet_chone_const(1.0, 1.0);
    OracleResult res = minimize_constrained(model, phi, m);
    REQUIRE(res.history.size() > 2);
    for (std::size_t k = 1; k < res.history.size(); ++k)
        CHECK(res.history[k].objective <=
              res.history[k - 1].objective + 1e-12 * (1 + std::abs(res.history[k].objective)));
}

TEST_CASE("random feasible audit never beats the minimizer") {
    DomainMask m = unit_mask(33);
    ScalarField phi = field_of(m.grid, [](double x, double y) { return x * x + y * y; });
    LagrangianModel model = rochet_chone_const(1.0, 1.0);
    OracleResult res = minimize_constrained(model, phi, m);
    REQUIRE(res.converged);

    const double scale = 1.0 + std::abs(res.objective);
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 100; ++trial) {
        ScalarField v = feasible_bump(m, phi, rng);
        REQUIRE(is_discretely_convex(v, m, 1e-12));
        // audit points match phi outside Omega0, so the J comparison is valid
        CHECK(evaluate_J(res.u, model, m) <= evaluate_J(v, model, m) + 1e-8 * scale);
    }
}

TEST_CASE("nonconvex models are refused") {
    DomainMask m = unit_mask(17);
    ScalarField phi = field_of(m.grid, [](double x, double y) { return x * x + y * y; });
    CHECK_THROWS_AS(minimize_constrained(allen_cahn(), phi, m), std::invalid_argument);
}

TEST_CASE("solver iterate does not beat the oracle on its own objective") {
    DomainMask m = unit_mask(33);
    ScalarField phi = field_of(m.grid, [](double x, double y) { return x * x + y * y; });
    LagrangianModel model = rochet_chone_const(1.0, 1.0);

    OracleResult oracle = minimize_constrained(model, phi, m);
    REQUIRE(oracle.converged);

    ScalarField psi(m.grid, 1.0);
    AbreuProblem prob = make_problem(m, phi, psi, model, GaugeFunction::log_gauge(),
                                     RhsMode::Penalized, PenalizationKind::Continuation, 0.05);
    HomotopyConfig cfg;
    SolveReport rep = solve_abreu(prob, cfg);
    REQUIRE(rep.status == SolveStatus::Converged);

    const double pen_eps = OracleConfig{}.pen_eps;
    const double j_solver = evaluate_objective(rep.u, model, phi, m, pen_eps);
    const double j_oracle = evaluate_objective(oracle.u, model, phi, m, pen_eps);
    CHECK(j_solver >= j_oracle - 1e-6 * (1 + std::abs(j_oracle)));
}
