#include "abreu/fd.hpp"

#include <algorithm>
#include <cmath>

namespace abreu {

namespace {

struct Stencil1D {
    // second difference along one axis at offset positions o0..o3 with
    // weights w0..w3 (4th entry unused for the centered form)
    int o[4];
    double w[4];
    int n;
};

// centered (1,-2,1) or one-sided (2,-5,4,-1), both exact through cubics
bool second_difference(const std::function<bool(int)>& valid, int c, int nmax, Stencil1D& s) {
    if (valid(c - 1) && valid(c + 1)) {
        s = {{-1, 0, 1, 0}, {1.0, -2.0, 1.0, 0.0}, 3};
        return true;
    }
    if (valid(c + 1) && valid(c + 2) && valid(c + 3)) {
        s = {{0, 1, 2, 3}, {2.0, -5.0, 4.0, -1.0}, 4};
        return true;
    }
    if (valid(c - 1) && valid(c - 2) && valid(c - 3)) {
        s = {{0, -1, -2, -3}, {2.0, -5.0, 4.0, -1.0}, 4};
        return true;
    }
    (void)nmax;
    return false;
}

} // namespace

HessianField hessian(const ScalarField& u, const DomainMask* mask) {
    const GridSpec& g = u.grid;
    HessianField h(g);
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    const double ihxy = 1.0 / (g.hx() * g.hy());

    auto node_ok = [&](int i, int j) {
        return g.in_grid(i, j) && (mask == nullptr || mask->in_omega(i, j));
    };

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!node_ok(i, j)) continue;
            const int k = g.idx(i, j);

            Stencil1D sx{};
            if (second_difference([&](int ii) { return node_ok(ii, j); }, i, g.nx, sx)) {
                double acc = 0;
                for (int t = 0; t < sx.n; ++t) acc += sx.w[t] * u(i + sx.o[t], j);
                h.u11[k] = acc * ihx2;
            }
            Stencil1D sy{};
            if (second_difference([&](int jj) { return node_ok(i, jj); }, j, g.ny, sy)) {
                double acc = 0;
                for (int t = 0; t < sy.n; ++t) acc += sy.w[t] * u(i, j + sy.o[t]);
                h.u22[k] = acc * ihy2;
            }

            // cross derivative: centered 4-corner stencil when available,
            // otherwise the mean of the valid one-sided 2x2 blocks
            if (node_ok(i - 1, j - 1) && node_ok(i + 1, j - 1) && node_ok(i - 1, j + 1) &&
                node_ok(i + 1, j + 1)) {
                h.u12[k] = 0.25 * ihxy *
                           (u(i + 1, j + 1) - u(i + 1, j - 1) - u(i - 1, j + 1) + u(i - 1, j - 1));
            } else {
                double acc = 0;
                int cnt = 0;
                for (int s = -1; s <= 1; s += 2)
                    for (int t = -1; t <= 1; t += 2) {
                        if (!node_ok(i + s, j) || !node_ok(i, j + t) || !node_ok(i + s, j + t))
                            continue;
                        acc += s * t * ihxy *
                               (u(i + s, j + t) - u(i + s, j) - u(i, j + t) + u(i, j));
                        ++cnt;
                    }
                h.u12[k] = (cnt > 0) ? acc / cnt : 0.0;
            }
        }
    return h;
}

CofactorField cofactor(const HessianField& h) {
    CofactorField c(h.grid);
    const int n = h.grid.size();
    for (int k = 0; k < n; ++k) {
        c.c11[k] = h.u22[k];
        c.c12[k] = -h.u12[k];
        c.c22[k] = h.u11[k];
    }
    return c;
}

VectorField divergence_free_defect(const CofactorField& U, const DomainMask* mask) {
    const GridSpec& g = U.grid;
    VectorField d;
    d.grid = g;
    d.r1.assign(g.size(), 0.0);
    d.r2.assign(g.size(), 0.0);
    const double i2hx = 0.5 / g.hx(), i2hy = 0.5 / g.hy();

    auto ok = [&](int i, int j) {
        return g.in_grid(i, j) && (mask == nullptr || mask->is_interior(i, j));
    };

    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            if (!ok(i, j) || !ok(i - 1, j) || !ok(i + 1, j) || !ok(i, j - 1) || !ok(i, j + 1))
                continue;
            const int k = g.idx(i, j);
            const int xl = g.idx(i - 1, j), xr = g.idx(i + 1, j);
            const int yl = g.idx(i, j - 1), yr = g.idx(i, j + 1);
            d.r1[k] = (U.c11[xr] - U.c11[xl]) * i2hx + (U.c12[yr] - U.c12[yl]) * i2hy;
            d.r2[k] = (U.c12[xr] - U.c12[xl]) * i2hx + (U.c22[yr] - U.c22[yl]) * i2hy;
        }
    return d;
}

Vec2 centered_gradient(const ScalarField& u, int i, int j) {
    const GridSpec& g = u.grid;
    return {(u(i + 1, j) - u(i - 1, j)) * 0.5 / g.hx(),
            (u(i, j + 1) - u(i, j - 1)) * 0.5 / g.hy()};
}

double laplacian5(const ScalarField& u, int i, int j) {
    const GridSpec& g = u.grid;
    const double hx2 = g.hx() * g.hx(), hy2 = g.hy() * g.hy();
    return (u(i - 1, j) - 2 * u(i, j) + u(i + 1, j)) / hx2 +
           (u(i, j - 1) - 2 * u(i, j) + u(i, j + 1)) / hy2;
}

ScalarField hessian_determinant(const ScalarField& u, const DomainMask& mask) {
    HessianField h = hessian(u, &mask);
    ScalarField d(u.grid);
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i)
            if (mask.in_omega(i, j)) d(i, j) = h.det(i, j);
    return d;
}

std::vector<ConvexityViolation> check_discrete_convexity(const ScalarField& u,
                                                         const DomainMask& mask, double tol) {
    const GridSpec& g = u.grid;
    const double hx = g.hx(), hy = g.hy();
    static const int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
    const double len2[4] = {hx * hx, hy * hy, hx * hx + hy * hy, hx * hx + hy * hy};

    std::vector<ConvexityViolation> out;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            if (!mask.is_interior(i, j)) continue;
            for (int d = 0; d < 4; ++d) {
                const int di = dirs[d][0], dj = dirs[d][1];
                if (!mask.in_omega(i + di, j + dj) || !mask.in_omega(i - di, j - dj)) continue;
                const double s =
                    (u(i + di, j + dj) - 2 * u(i, j) + u(i - di, j - dj)) / len2[d];
                if (s < -tol) out.push_back({i, j, d, s});
            }
        }
    return out;
}

bool is_discretely_convex(const ScalarField& u, const DomainMask& mask, double tol) {
    return check_discrete_convexity(u, mask, tol).empty();
}

ConeBound cone_linf_bound(const ScalarField& u, const DomainMask& mask) {
    const GridSpec& g = u.grid;
    double linf = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (mask.in_omega(i, j)) linf = std::max(linf, std::abs(u(i, j)));

    const double bnd_tol = 1e-12 * std::max(1.0, linf);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (mask.is_boundary(i, j) && u(i, j) > bnd_tol)
                throw std::invalid_argument("cone_linf_bound: u > 0 on the boundary");

    QuadratureWeights q = quadrature(mask);
    double l1 = 0;
    for (int k = 0; k < g.size(); ++k) l1 += q.w_omega[k] * std::abs(u.at(k));

    ConeBound b;
    b.lhs = linf;
    b.rhs = 3.0 / mask.area_omega * l1; // (n+1)/|Omega| with n = 2
    const double h = std::max(g.hx(), g.hy());
    b.holds = b.lhs <= b.rhs * (1.0 + 10.0 * h) + 1e-14;
    return b;
}

GradientBound interior_gradient_bound(const ScalarField& u, const DomainMask& mask) {
    const GridSpec& g = u.grid;
    double max_grad = 0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i)
            if (mask.in_omega0(i, j)) max_grad = std::max(max_grad, centered_gradient(u, i, j).norm());

    double max_bnd = -1e300, linf = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!mask.in_omega(i, j)) continue;
            linf = std::max(linf, std::abs(u(i, j)));
            if (mask.is_boundary(i, j)) max_bnd = std::max(max_bnd, u(i, j));
        }

    GradientBound b;
    b.max_grad = max_grad;
    b.bound = (max_bnd + linf) / mask.dist_omega0_bnd;
    const double h = std::max(g.hx(), g.hy());
    b.holds = max_grad <= b.bound * (1.0 + 10.0 * h) + 1e-14;
    return b;
}

} // namespace abreu
