#include "abreu/grid.hpp"

#include <algorithm>
#include <cmath>

namespace abreu {

const char* node_class_name(NodeClass c) {
    switch (c) {
        case NodeClass::Exterior: return "exterior";
        case NodeClass::InteriorOmega: return "interior_omega";
        case NodeClass::InteriorOmega0: return "interior_omega0";
        case NodeClass::BoundaryOmega: return "boundary_omega";
        case NodeClass::BoundaryOmega0Band: return "boundary_omega0_band";
    }
    return "?";
}

namespace {

bool superellipse_inside(const SuperellipseShape& s, double x, double y) {
    return std::pow(std::abs(x / s.a), s.m) + std::pow(std::abs(y / s.b), s.m) <= 1.0;
}

Vec2 superellipse_normal(const SuperellipseShape& s, double x, double y) {
    auto d = [&](double t, double c) {
        const double r = std::abs(t / c);
        return (s.m / c) * ((t >= 0) ? 1.0 : -1.0) * std::pow(r, s.m - 1.0);
    };
    Vec2 g{d(x, s.a), d(y, s.b)};
    const double n = g.norm();
    if (n < 1e-300) return {1, 0};
    return {g.x / n, g.y / n};
}

bool inner_contains(const InnerShape& s, double x, double y, double tol) {
    if (std::holds_alternative<RectShape>(s)) {
        const auto& r = std::get<RectShape>(s);
        return x >= r.x0 - tol && x <= r.x1 + tol && y >= r.y0 - tol && y <= r.y1 + tol;
    }
    const auto& d = std::get<DiskShape>(s);
    return std::hypot(x - d.center.x, y - d.center.y) <= d.radius + tol;
}

Vec2 inner_outward_normal(const InnerShape& s, double x, double y) {
    if (std::holds_alternative<RectShape>(s)) {
        const auto& r = std::get<RectShape>(s);
        const double cx = 0.5 * (r.x0 + r.x1), cy = 0.5 * (r.y0 + r.y1);
        const double wx = 0.5 * (r.x1 - r.x0), wy = 0.5 * (r.y1 - r.y0);
        const double rx = std::abs(x - cx) / wx, ry = std::abs(y - cy) / wy;
        const double sx = (x >= cx) ? 1.0 : -1.0, sy = (y >= cy) ? 1.0 : -1.0;
        if (std::abs(rx - ry) < 1e-12) {
            const double inv = 1.0 / std::sqrt(2.0);
            return {sx * inv, sy * inv};
        }
        return (rx > ry) ? Vec2{sx, 0.0} : Vec2{0.0, sy};
    }
    const auto& d = std::get<DiskShape>(s);
    Vec2 g{x - d.center.x, y - d.center.y};
    const double n = g.norm();
    if (n < 1e-300) return {1, 0};
    return {g.x / n, g.y / n};
}

double superellipse_area(const SuperellipseShape& s) {
    const double g1 = std::tgamma(1.0 + 1.0 / s.m);
    const double g2 = std::tgamma(1.0 + 2.0 / s.m);
    return 4.0 * s.a * s.b * g1 * g1 / g2;
}

double inner_area(const InnerShape& s) {
    if (std::holds_alternative<RectShape>(s)) {
        const auto& r = std::get<RectShape>(s);
        return (r.x1 - r.x0) * (r.y1 - r.y0);
    }
    const auto& d = std::get<DiskShape>(s);
    return M_PI * d.radius * d.radius;
}

double dist_inner_to_outer(const DomainShape& shape) {
    if (std::holds_alternative<RectShape>(shape.omega)) {
        const auto& o = std::get<RectShape>(shape.omega);
        if (std::holds_alternative<RectShape>(shape.omega0)) {
            const auto& r = std::get<RectShape>(shape.omega0);
            return std::min({r.x0 - o.x0, o.x1 - r.x1, r.y0 - o.y0, o.y1 - r.y1});
        }
        const auto& d = std::get<DiskShape>(shape.omega0);
        return std::min({d.center.x - d.radius - o.x0, o.x1 - (d.center.x + d.radius),
                         d.center.y - d.radius - o.y0, o.y1 - (d.center.y + d.radius)});
    }
    // superellipse outer, disk inner: sample the boundary curve
    const auto& se = std::get<SuperellipseShape>(shape.omega);
    const auto& d = std::get<DiskShape>(shape.omega0);
    double best = 1e300;
    const int n = 4096;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * M_PI * k / n;
        const double c = std::cos(t), s = std::sin(t);
        const double px = se.a * ((c >= 0) ? 1 : -1) * std::pow(std::abs(c), 2.0 / se.m);
        const double py = se.b * ((s >= 0) ? 1 : -1) * std::pow(std::abs(s), 2.0 / se.m);
        best = std::min(best, std::hypot(px - d.center.x, py - d.center.y) - d.radius);
    }
    return best;
}

} // namespace

DomainMask build_domain(const DomainShape& shape, const GridSpec& grid) {
    const bool outer_rect = std::holds_alternative<RectShape>(shape.omega);
    if (!outer_rect && std::holds_alternative<RectShape>(shape.omega0))
        throw std::invalid_argument("build_domain: superellipse Omega requires disk Omega0");

    DomainMask mask;
    mask.grid = grid;
    mask.shape = shape;
    mask.rect_outer = outer_rect;
    mask.node_class.assign(grid.size(), NodeClass::Exterior);
    mask.normal.assign(grid.size(), Vec2{});

    const double tol = 1e-12 * std::max({std::abs(grid.x1 - grid.x0), std::abs(grid.y1 - grid.y0), 1.0});

    if (outer_rect) {
        const auto& r = std::get<RectShape>(shape.omega);
        if (std::abs(r.x0 - grid.x0) > tol || std::abs(r.x1 - grid.x1) > tol ||
            std::abs(r.y0 - grid.y0) > tol || std::abs(r.y1 - grid.y1) > tol)
            throw std::invalid_argument("build_domain: rectangle Omega must coincide with the grid box");
        mask.area_omega = (r.x1 - r.x0) * (r.y1 - r.y0);
    } else {
        const auto& se = std::get<SuperellipseShape>(shape.omega);
        if (se.m < 2.0) throw std::invalid_argument("build_domain: superellipse exponent must be >= 2");
        mask.area_omega = superellipse_area(se);
    }

    // classify in/out of Omega; mark Dirichlet boundary
    std::vector<char> in(grid.size(), 0);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            if (outer_rect) {
                in[grid.idx(i, j)] = 1;
            } else {
                const auto& se = std::get<SuperellipseShape>(shape.omega);
                in[grid.idx(i, j)] = superellipse_inside(se, grid.x(i), grid.y(j)) ? 1 : 0;
            }
        }

    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const int k = grid.idx(i, j);
            if (!in[k]) continue;
            bool bnd;
            if (outer_rect) {
                bnd = (i == 0 || i == grid.nx - 1 || j == 0 || j == grid.ny - 1);
            } else {
                if (i == 0 || i == grid.nx - 1 || j == 0 || j == grid.ny - 1)
                    throw std::invalid_argument(
                        "build_domain: superellipse touches the grid box; enlarge the box");
                bnd = !in[grid.idx(i - 1, j)] || !in[grid.idx(i + 1, j)] ||
                      !in[grid.idx(i, j - 1)] || !in[grid.idx(i, j + 1)];
            }
            mask.node_class[k] = bnd ? NodeClass::BoundaryOmega : NodeClass::InteriorOmega;
        }

    // normals on the Dirichlet boundary
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const int k = grid.idx(i, j);
            if (mask.node_class[k] != NodeClass::BoundaryOmega) continue;
            if (outer_rect) {
                double nxm = 0, nym = 0;
                if (i == 0) nxm = -1;
                if (i == grid.nx - 1) nxm = 1;
                if (j == 0) nym = -1;
                if (j == grid.ny - 1) nym = 1;
                const double n = std::hypot(nxm, nym);
                mask.normal[k] = {nxm / n, nym / n};
            } else {
                const auto& se = std::get<SuperellipseShape>(shape.omega);
                mask.normal[k] = superellipse_normal(se, grid.x(i), grid.y(j));
            }
        }

    // classify Omega0 among interior nodes
    std::vector<char> in0(grid.size(), 0);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const int k = grid.idx(i, j);
            if (mask.node_class[k] != NodeClass::InteriorOmega) continue;
            if (inner_contains(shape.omega0, grid.x(i), grid.y(j), tol)) in0[k] = 1;
        }
    // Omega0 nodes with boundary-of-Omega neighbors got excluded above; verify
    // Omega0 does not reach non-interior nodes at all.
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const int k = grid.idx(i, j);
            if (mask.node_class[k] == NodeClass::InteriorOmega) continue;
            if (inner_contains(shape.omega0, grid.x(i), grid.y(j), tol) && in[k])
                throw std::invalid_argument("build_domain: Omega0 reaches the boundary of Omega");
        }

    for (int j = 1; j < grid.ny - 1; ++j)
        for (int i = 1; i < grid.nx - 1; ++i) {
            const int k = grid.idx(i, j);
            if (!in0[k]) continue;
            const bool band = !in0[grid.idx(i - 1, j)] || !in0[grid.idx(i + 1, j)] ||
                              !in0[grid.idx(i, j - 1)] || !in0[grid.idx(i, j + 1)];
            mask.node_class[k] = band ? NodeClass::BoundaryOmega0Band : NodeClass::InteriorOmega0;
            if (band) mask.normal[k] = inner_outward_normal(shape.omega0, grid.x(i), grid.y(j));
        }

    for (int k = 0; k < grid.size(); ++k) {
        if (mask.node_class[k] == NodeClass::InteriorOmega0) ++mask.n_interior_omega0;
        if (mask.node_class[k] == NodeClass::InteriorOmega0 ||
            mask.node_class[k] == NodeClass::InteriorOmega ||
            mask.node_class[k] == NodeClass::BoundaryOmega0Band)
            ++mask.n_interior;
    }

    if (mask.n_interior_omega0 < 9)
        throw std::invalid_argument(
            "build_domain: grid too coarse, Omega0 has fewer than 9 interior nodes");

    // 2-node buffer between Omega0 and the boundary of Omega
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            if (!in0[grid.idx(i, j)]) continue;
            for (int dj = -2; dj <= 2; ++dj)
                for (int di = -2; di <= 2; ++di) {
                    const int ii = i + di, jj = j + dj;
                    if (!grid.in_grid(ii, jj)) continue;
                    if (mask.node_class[grid.idx(ii, jj)] == NodeClass::BoundaryOmega)
                        throw std::invalid_argument(
                            "build_domain: Omega0 violates the 2-node buffer to the boundary of Omega");
                }
        }

    mask.area_omega0 = inner_area(shape.omega0);
    mask.dist_omega0_bnd = dist_inner_to_outer(shape);
    if (mask.dist_omega0_bnd <= 0)
        throw std::invalid_argument("build_domain: Omega0 is not strictly inside Omega");
    return mask;
}

double max_abs(const ScalarField& u, const std::function<bool(int, int)>& pred) {
    double m = 0;
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i)
            if (pred(i, j)) m = std::max(m, std::abs(u(i, j)));
    return m;
}

double max_abs_diff(const ScalarField& u, const ScalarField& w,
                    const std::function<bool(int, int)>& pred) {
    double m = 0;
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i)
            if (pred(i, j)) m = std::max(m, std::abs(u(i, j) - w(i, j)));
    return m;
}

bool all_finite(const ScalarField& u, const DomainMask& mask) {
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i)
            if (mask.in_omega(i, j) && !std::isfinite(u(i, j))) return false;
    return true;
}

QuadratureWeights quadrature(const DomainMask& mask) {
    const GridSpec& g = mask.grid;
    const double hx = g.hx(), hy = g.hy();
    QuadratureWeights q;
    q.w_omega.assign(g.size(), 0.0);
    q.w_omega0.assign(g.size(), 0.0);
    q.w_outside.assign(g.size(), 0.0);

    auto axis_weight = [](int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; };

    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int k = g.idx(i, j);
            if (mask.node_class[k] == NodeClass::Exterior) continue;
            if (mask.rect_outer) {
                q.w_omega[k] = hx * hy * axis_weight(i, g.nx) * axis_weight(j, g.ny);
            } else {
                q.w_omega[k] = hx * hy * (mask.node_class[k] == NodeClass::BoundaryOmega ? 0.5 : 1.0);
            }
        }

    const double tol = 1e-12 * std::max(g.x1 - g.x0, g.y1 - g.y0);
    const bool rect0 = std::holds_alternative<RectShape>(mask.shape.omega0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int k = g.idx(i, j);
            if (!mask.in_omega0(i, j)) continue;
            if (rect0) {
                const auto& r = std::get<RectShape>(mask.shape.omega0);
                const double x = g.x(i), y = g.y(j);
                const double wx = (std::abs(x - r.x0) < tol || std::abs(x - r.x1) < tol) ? 0.5 : 1.0;
                const double wy = (std::abs(y - r.y0) < tol || std::abs(y - r.y1) < tol) ? 0.5 : 1.0;
                q.w_omega0[k] = hx * hy * wx * wy;
            } else {
                q.w_omega0[k] = hx * hy;
            }
        }

    for (int k = 0; k < g.size(); ++k)
        q.w_outside[k] = std::max(0.0, q.w_omega[k] - q.w_omega0[k]);
    return q;
}

} // namespace abreu
