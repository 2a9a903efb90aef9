#pragma once

#include "abreu/grid.hpp"

namespace abreu {

/// Nodewise second derivatives of a grid function (u12 stored once).
struct HessianField {
    GridSpec grid;
    std::vector<double> u11, u12, u22;

    explicit HessianField(const GridSpec& g)
        : grid(g),
          u11(static_cast<std::size_t>(g.size()), 0.0),
          u12(static_cast<std::size_t>(g.size()), 0.0),
          u22(static_cast<std::size_t>(g.size()), 0.0) {}

    Sym2 at(int i, int j) const {
        const int k = grid.idx(i, j);
        return {u11[k], u12[k], u22[k]};
    }
    double det(int i, int j) const {
        const int k = grid.idx(i, j);
        return u11[k] * u22[k] - u12[k] * u12[k];
    }
};

/// Cofactor matrix of the Hessian, n = 2: U11 = u22, U12 = -u12, U22 = u11.
struct CofactorField {
    GridSpec grid;
    std::vector<double> c11, c12, c22;

    explicit CofactorField(const GridSpec& g)
        : grid(g),
          c11(static_cast<std::size_t>(g.size()), 0.0),
          c12(static_cast<std::size_t>(g.size()), 0.0),
          c22(static_cast<std::size_t>(g.size()), 0.0) {}

    Sym2 at(int i, int j) const {
        const int k = grid.idx(i, j);
        return {c11[k], c12[k], c22[k]};
    }
};

/// Centered 3-point second differences for u11/u22, centered 4-point cross
/// stencil for u12; second-order one-sided stencils at nodes missing a
/// neighbor. With a mask, stencils only read nodes inside Omega; without one
/// the whole grid is used. Values at exterior nodes are zero.
HessianField hessian(const ScalarField& u, const DomainMask* mask = nullptr);

CofactorField cofactor(const HessianField& h);

/// Row divergences D1 U^{i1} + D2 U^{i2} by centered first differences;
/// computed where both neighbors carry cofactor values, zero elsewhere.
struct VectorField {
    GridSpec grid;
    std::vector<double> r1, r2; // one component per cofactor row
};
VectorField divergence_free_defect(const CofactorField& U, const DomainMask* mask = nullptr);

/// Centered gradient at an interior node.
Vec2 centered_gradient(const ScalarField& u, int i, int j);

/// 5-point Laplacian at an interior node.
double laplacian5(const ScalarField& u, int i, int j);

/// det D^2 u nodewise (interior nodes of the mask; 0 elsewhere).
ScalarField hessian_determinant(const ScalarField& u, const DomainMask& mask);

// ---- discrete convexity and the convex-function estimates -----------------

struct ConvexityViolation {
    int i, j;
    int direction;  // 0: x-axis, 1: y-axis, 2: (1,1) diagonal, 3: (1,-1) diagonal
    double value;   // directional second difference / squared step (< -tol)
};

/// Directional second differences along both axes and both diagonals,
/// normalized by the squared step so tol has curvature units. Interior
/// nodes only; a node is checked in a direction only when both stencil
/// neighbors are inside Omega.
std::vector<ConvexityViolation> check_discrete_convexity(const ScalarField& u,
                                                         const DomainMask& mask, double tol);

bool is_discretely_convex(const ScalarField& u, const DomainMask& mask, double tol);

/// Comparison-with-cone estimate for convex u with u <= 0 on the boundary:
/// lhs = max |u|, rhs = (n+1)/|Omega| * integral of |u| (n = 2).
/// Throws std::invalid_argument when u > 0 somewhere on the boundary.
struct ConeBound {
    double lhs;
    double rhs;
    bool holds; // lhs <= rhs * (1 + 10 h)
};
ConeBound cone_linf_bound(const ScalarField& u, const DomainMask& mask);

/// Convex-gradient estimate on Omega0: max of |Du| (centered differences)
/// against (max_bnd u + max|u|) / dist(Omega0, dOmega).
struct GradientBound {
    double max_grad;
    double bound;
    bool holds; // max_grad <= bound * (1 + 10 h)
};
GradientBound interior_gradient_bound(const ScalarField& u, const DomainMask& mask);

} // namespace abreu
