#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abreu/fd.hpp"
#include "abreu/grid.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace abreu;
using namespace abreu::testing;

namespace {

double exp_half_sq(double x, double y) { return std::exp(0.5 * (x * x + y * y)); }

double hessian_linf_error_exp(int n) {
    DomainMask m = unit_mask(n);
    ScalarField u = field_of(m.grid, exp_half_sq);
    HessianField h = hessian(u, &m);
    double err = 0;
    for (int j = 1; j < n - 1; ++j)
        for (int i = 1; i < n - 1; ++i) {
            const double x = m.grid.x(i), y = m.grid.y(j);
            const double e = exp_half_sq(x, y);
            err = std::max(err, std::abs(h.u11[m.grid.idx(i, j)] - e * (1 + x * x)));
            err = std::max(err, std::abs(h.u22[m.grid.idx(i, j)] - e * (1 + y * y)));
            err = std::max(err, std::abs(h.u12[m.grid.idx(i, j)] - e * x * y));
        }
    return err;
}

double divergence_defect_exp(int n) {
    DomainMask m = unit_mask(n);
    ScalarField u = field_of(m.grid, exp_half_sq);
    VectorField d = divergence_free_defect(cofactor(hessian(u, &m)), &m);
    double md = 0;
    // skip the outermost interior ring: boundary rows use one-sided second
    // derivatives there, which changes the constant in the O(h^2) error
    for (int j = 2; j < n - 2; ++j)
        for (int i = 2; i < n - 2; ++i)
            md = std::max({md, std::abs(d.r1[m.grid.idx(i, j)]), std::abs(d.r2[m.grid.idx(i, j)])});
    return md;
}

} // namespace

TEST_CASE("grid spec rejects degenerate shapes") {
    CHECK_THROWS_AS(GridSpec(4, 9, 0, 1, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(9, 9, 1, 0, 0, 1), std::invalid_argument);
}

TEST_CASE("mask classes partition the rectangle") {
    DomainMask m = unit_mask(33);
    int nb = 0, ni = 0, n0 = 0, nband = 0;
    for (int j = 0; j < 33; ++j)
        for (int i = 0; i < 33; ++i) switch (m.cls(i, j)) {
                case NodeClass::BoundaryOmega: ++nb; break;
                case NodeClass::InteriorOmega: ++ni; break;
                case NodeClass::InteriorOmega0: ++n0; break;
                case NodeClass::BoundaryOmega0Band: ++nband; break;
                default: break;
            }
    CHECK(nb == 4 * 32);
    CHECK(n0 + nband == 17 * 17);
    CHECK(nband == 4 * 16);
    CHECK(nb + ni + n0 + nband == 33 * 33);
    // boundary normals are unit vectors
    for (int j = 0; j < 33; ++j)
        for (int i = 0; i < 33; ++i)
            if (m.is_boundary(i, j))
                CHECK(m.normal[m.grid.idx(i, j)].norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("disk inner domain carries radial band normals") {
    GridSpec g(65, 65, -1, 1, -1, 1);
    DomainMask m = build_domain({RectShape{-1, 1, -1, 1}, DiskShape{{0, 0}, 0.5}}, g);
    CHECK(m.n_interior_omega0 >= 9);
    for (int j = 0; j < 65; ++j)
        for (int i = 0; i < 65; ++i)
            if (m.cls(i, j) == NodeClass::BoundaryOmega0Band) {
                const Vec2 nu = m.normal[g.idx(i, j)];
                const Vec2 x{g.x(i), g.y(j)};
                CHECK(dot(nu, x) > 0); // outward
                CHECK(nu.norm() == doctest::Approx(1.0).epsilon(1e-12));
            }
}

TEST_CASE("superellipse mask classifies and keeps the box margin") {
    GridSpec g(65, 65, -1.2, 1.2, -1.2, 1.2);
    DomainMask m = build_domain(
        {SuperellipseShape{1.0, 1.0, 4.0}, DiskShape{{0, 0}, 0.4}}, g);
    CHECK(m.rect_outer == false);
    int next = 0, nbnd = 0;
    for (int j = 0; j < 65; ++j)
        for (int i = 0; i < 65; ++i) {
            if (m.cls(i, j) == NodeClass::Exterior) ++next;
            if (m.is_boundary(i, j)) ++nbnd;
        }
    CHECK(next > 0);
    CHECK(nbnd > 40);
    CHECK(m.area_omega == doctest::Approx(3.7081493546).epsilon(1e-6)); // 4*Gamma(5/4)^2/Gamma(3/2)
}

TEST_CASE("quadrature partitions the area") {
    DomainMask m = unit_mask(33);
    QuadratureWeights q = quadrature(m);
    double s_omega = 0, s_in = 0, s_out = 0;
    for (int k = 0; k < m.grid.size(); ++k) {
        s_omega += q.w_omega[k];
        s_in += q.w_omega0[k];
        s_out += q.w_outside[k];
    }
    CHECK(s_omega == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(s_in == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(s_out == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("hessian second-order convergence on the exponential field") {
    const double e33 = hessian_linf_error_exp(33);
    const double e65 = hessian_linf_error_exp(65);
    CHECK(e33 / e65 > 3.0);
    CHECK(e33 / e65 < 5.0);
}

TEST_CASE("cofactor divergence defect refines at second order") {
    const double d33 = divergence_defect_exp(33);
    const double d65 = divergence_defect_exp(65);
    CHECK(d33 / d65 > 3.0);
    CHECK(d33 / d65 < 5.0);
}

TEST_CASE("cone estimate on the centered paraboloid") {
    DomainMask m = unit_mask(65);
    ScalarField u = field_of(m.grid, [](double x, double y) { return 0.5 * (x * x + y * y) - 1.0; });
    ConeBound cb = cone_linf_bound(u, m);
    CHECK(cb.lhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cb.rhs == doctest::Approx(2.0).epsilon(5e-3)); // (3/4) * 8/3
    CHECK(cb.holds);
}

TEST_CASE("cone estimate is near-tight on the square pyramid") {
    DomainMask m = unit_mask(65);
    ScalarField u = field_of(m.grid, [](double x, double y) {
        return std::max(std::abs(x), std::abs(y)) - 1.0;
    });
    ConeBound cb = cone_linf_bound(u, m);
    CHECK(cb.lhs == doctest::Approx(1.0));
    CHECK(cb.rhs == doctest::Approx(1.0).epsilon(2e-2)); // pyramid volume 4/3 times 3/4
    CHECK(cb.holds);
}

TEST_CASE("euclidean cone is rejected: positive at the corners") {
    DomainMask m = unit_mask(33);
    ScalarField u = field_of(m.grid, [](double x, double y) { return std::hypot(x, y) - 1.0; });
    CHECK_THROWS_AS(cone_linf_bound(u, m), std::invalid_argument);
}

TEST_CASE("both convex-function estimates hold on random max-affine fields") {
    DomainMask m = unit_mask(33);
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        ScalarField u = random_max_affine(m.grid, rng);
        CHECK(is_discretely_convex(u, m, 1e-10));
        GradientBound gb = interior_gradient_bound(u, m);
        CHECK(gb.holds);
        shift_below_boundary(u, m);
        ConeBound cb = cone_linf_bound(u, m);
        CHECK(cb.holds);
    }
}

TEST_CASE("discrete convexity is preserved under convex combinations") {
    DomainMask m = unit_mask(17);
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        ScalarField u = random_max_affine(m.grid, rng);
        ScalarField v = random_max_affine(m.grid, rng);
        for (double lam : {0.0, 0.25, 0.5, 0.9, 1.0}) {
            ScalarField w(m.grid);
            for (int k = 0; k < m.grid.size(); ++k)
                w.at(k) = lam * u.at(k) + (1 - lam) * v.at(k);
            CHECK(is_discretely_convex(w, m, 1e-10));
        }
    }
}
