#pragma once

#include "abreu/grid.hpp"

#include <memory>
#include <vector>

namespace abreu {

struct LinearSolveResult {
    ScalarField solution;   // full field: boundary values filled from bc
    double rel_residual = 0;
    bool ok = false;
};

/// Dirichlet solver for the non-divergence operator
///   L u = a u_11 + 2 b u_12 + c u_22
/// discretized with centered stencils on the interior nodes of the mask.
/// Boundary values are eliminated into the right-hand side. The sparsity
/// pattern is fixed by the mask; coefficients may change between solves.
class NinePointDirichlet {
public:
    explicit NinePointDirichlet(const DomainMask& mask);
    ~NinePointDirichlet();
    NinePointDirichlet(NinePointDirichlet&&) noexcept;
    NinePointDirichlet& operator=(NinePointDirichlet&&) noexcept;

    int n_unknowns() const;

    /// Coefficient fields indexed by node; only interior entries are read.
    void set_coefficients(const std::vector<double>& a, const std::vector<double>& b,
                          const std::vector<double>& c);

    /// Constant-coefficient Laplacian (a = c = 1, b = 0).
    void set_laplacian();

    /// f holds the right-hand side at interior nodes, bc the Dirichlet data
    /// at boundary nodes.
    LinearSolveResult solve(const ScalarField& f, const ScalarField& bc) const;

    /// Apply the current operator to a full field (interior rows only).
    ScalarField apply(const ScalarField& u) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace abreu
