#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace abreu {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Symmetric 2x2 matrix, stored as the three independent entries.
struct Sym2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a12; }

    /// Eigenvalues in ascending order.
    std::pair<double, double> eigenvalues() const {
        const double mean = 0.5 * (a11 + a22);
        const double r = std::hypot(0.5 * (a11 - a22), a12);
        return {mean - r, mean + r};
    }

    /// Clip both eigenvalues from below at `floor`, keeping eigenvectors.
    Sym2 clipped_below(double floor) const {
        const double mean = 0.5 * (a11 + a22);
        const double half = 0.5 * (a11 - a22);
        const double r = std::hypot(half, a12);
        double lo = mean - r, hi = mean + r;
        if (lo >= floor) return *this;
        const double lo_c = std::max(lo, floor);
        const double hi_c = std::max(hi, floor);
        if (r < 1e-300) return {lo_c, 0.0, hi_c};
        // eigenvector for hi is (cos t, sin t) with cos2t = half/r, sin2t = a12/r
        const double c2 = half / r, s2 = a12 / r;
        // reassemble: A = m*I + d*(c2, s2; s2, -c2) with m = (hi_c+lo_c)/2, d = (hi_c-lo_c)/2
        const double m = 0.5 * (hi_c + lo_c);
        const double d = 0.5 * (hi_c - lo_c);
        return {m + d * c2, d * s2, m - d * c2};
    }
};

inline Sym2 cofactor2(const Sym2& h) { return {h.a22, -h.a12, h.a11}; }

/// Uniform Cartesian grid over an axis-aligned box. Nodes are stored
/// row-major: index = j*nx + i, x = x0 + i*hx, y = y0 + j*hy.
struct GridSpec {
    int nx = 0, ny = 0;
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;

    GridSpec() = default;
    GridSpec(int nx_, int ny_, double ax, double bx, double ay, double by)
        : nx(nx_), ny(ny_), x0(ax), x1(bx), y0(ay), y1(by) {
        if (nx < 5 || ny < 5)
            throw std::invalid_argument("GridSpec: nx and ny must be >= 5");
        if (!(x1 > x0) || !(y1 > y0))
            throw std::invalid_argument("GridSpec: bounds must be increasing");
    }

    double hx() const { return (x1 - x0) / (nx - 1); }
    double hy() const { return (y1 - y0) / (ny - 1); }
    double x(int i) const { return x0 + i * hx(); }
    double y(int j) const { return y0 + j * hy(); }
    int idx(int i, int j) const { return j * nx + i; }
    int size() const { return nx * ny; }
    bool in_grid(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    bool same_as(const GridSpec& o) const {
        return nx == o.nx && ny == o.ny && x0 == o.x0 && x1 == o.x1 && y0 == o.y0 && y1 == o.y1;
    }
};

enum class NodeClass : std::uint8_t {
    Exterior = 0,
    InteriorOmega = 1,      // interior of Omega, outside Omega0
    InteriorOmega0 = 2,     // strictly inside Omega0
    BoundaryOmega = 3,      // Dirichlet boundary of Omega
    BoundaryOmega0Band = 4, // outermost layer of Omega0 nodes
};

const char* node_class_name(NodeClass c);

// ---- domain shape descriptors -------------------------------------------

struct RectShape {
    double x0, x1, y0, y1;
};

struct DiskShape {
    Vec2 center;
    double radius;
};

/// |x/a|^m + |y/b|^m <= 1, centered at the origin of the grid box.
struct SuperellipseShape {
    double a, b;
    double m; // exponent, m >= 2
};

using OuterShape = std::variant<RectShape, SuperellipseShape>;
using InnerShape = std::variant<RectShape, DiskShape>;

struct DomainShape {
    OuterShape omega;
    InnerShape omega0;
};

/// Per-node classification of the grid into Omega / Omega0 / boundary bands,
/// with outward unit normals on the Dirichlet boundary and the Omega0 band.
struct DomainMask {
    GridSpec grid;
    DomainShape shape;
    std::vector<NodeClass> node_class;
    std::vector<Vec2> normal; // valid at BoundaryOmega (nu) and BoundaryOmega0Band (nu0)

    // geometry summaries used by diagnostics
    double area_omega = 0;        // |Omega| (analytic)
    double area_omega0 = 0;       // |Omega0| (analytic)
    double dist_omega0_bnd = 0;   // dist(Omega0, dOmega) (analytic)
    bool rect_outer = true;       // Omega is the grid box
    int n_interior = 0;           // count of interior nodes (both classes)
    int n_interior_omega0 = 0;

    NodeClass cls(int i, int j) const { return node_class[grid.idx(i, j)]; }
    bool in_omega(int i, int j) const { return cls(i, j) != NodeClass::Exterior; }
    bool is_interior(int i, int j) const {
        const NodeClass c = cls(i, j);
        return c == NodeClass::InteriorOmega || c == NodeClass::InteriorOmega0 ||
               c == NodeClass::BoundaryOmega0Band;
    }
    bool is_boundary(int i, int j) const { return cls(i, j) == NodeClass::BoundaryOmega; }
    /// Closure of Omega0 on the grid: strict interior plus the band.
    bool in_omega0(int i, int j) const {
        const NodeClass c = cls(i, j);
        return c == NodeClass::InteriorOmega0 || c == NodeClass::BoundaryOmega0Band;
    }
};

/// Classify all nodes, set normals, and validate the Omega0 buffer.
/// Throws std::invalid_argument on shape/grid violations (see spec of the
/// rejection rules in the README).
DomainMask build_domain(const DomainShape& shape, const GridSpec& grid);

// ---- scalar fields -------------------------------------------------------

struct ScalarField {
    GridSpec grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& g, double fill = 0.0)
        : grid(g), v(static_cast<std::size_t>(g.size()), fill) {}

    double& operator()(int i, int j) { return v[grid.idx(i, j)]; }
    double operator()(int i, int j) const { return v[grid.idx(i, j)]; }
    double& at(int k) { return v[k]; }
    double at(int k) const { return v[k]; }

    static ScalarField from_function(const GridSpec& g,
                                     const std::function<double(double, double)>& f) {
        ScalarField out(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) out(i, j) = f(g.x(i), g.y(j));
        return out;
    }
};

/// max |u| over nodes selected by pred(i,j).
double max_abs(const ScalarField& u, const std::function<bool(int, int)>& pred);

/// max |u - w| over nodes selected by pred(i,j).
double max_abs_diff(const ScalarField& u, const ScalarField& w,
                    const std::function<bool(int, int)>& pred);

/// Verify all values on Omega nodes are finite.
bool all_finite(const ScalarField& u, const DomainMask& mask);

// ---- quadrature ----------------------------------------------------------

/// Nodal quadrature weights. w_omega integrates over Omega, w_omega0 over
/// Omega0, w_outside over Omega \ Omega0; w_omega = w_omega0 + w_outside
/// nodewise so the three integrals are consistent.
struct QuadratureWeights {
    std::vector<double> w_omega;
    std::vector<double> w_omega0;
    std::vector<double> w_outside;
};

QuadratureWeights quadrature(const DomainMask& mask);

} // namespace abreu
