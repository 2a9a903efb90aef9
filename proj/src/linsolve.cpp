#include "abreu/linsolve.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>

namespace abreu {

struct NinePointDirichlet::Impl {
    const DomainMask* mask;
    std::vector<int> unknown_of_node; // -1 outside the unknown set
    std::vector<int> node_of_unknown;
    Eigen::SparseMatrix<double> A;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool pattern_done = false;
    bool factor_ok = false;
    // boundary couplings per row: (boundary node, coefficient)
    std::vector<std::vector<std::pair<int, double>>> bc_terms;

    void assemble(const std::vector<double>& a, const std::vector<double>& b,
                  const std::vector<double>& c);
};

namespace {

// distribute one stencil coupling onto (node) with weight w; exterior corner
// nodes are completed bilinearly from the two axis neighbors and the center
struct RowBuilder {
    const DomainMask& mask;
    std::vector<Eigen::Triplet<double>>& trips;
    std::vector<std::pair<int, double>>& bc;
    const std::vector<int>& unknown_of_node;
    int row;

    void add(int i, int j, double w) {
        const int k = mask.grid.idx(i, j);
        const int u = unknown_of_node[k];
        if (u >= 0) {
            trips.emplace_back(row, u, w);
        } else {
            bc.emplace_back(k, w);
        }
    }

    void add_corner(int i, int j, int ci, int cj, double w) {
        if (mask.in_omega(ci, cj)) {
            add(ci, cj, w);
            return;
        }
        add(ci, j, w);
        add(i, cj, w);
        add(i, j, -w);
    }
};

} // namespace

void NinePointDirichlet::Impl::assemble(const std::vector<double>& a,
                                        const std::vector<double>& b,
                                        const std::vector<double>& c) {
    const GridSpec& g = mask->grid;
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    const double ihxy = 1.0 / (g.hx() * g.hy());

    const int n = static_cast<int>(node_of_unknown.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * 9);
    bc_terms.assign(n, {});

    for (int r = 0; r < n; ++r) {
        const int k = node_of_unknown[r];
        const int i = k % g.nx, j = k / g.nx;
        RowBuilder rb{*mask, trips, bc_terms[r], unknown_of_node, r};

        const double ca = a[k] * ihx2;
        const double cc = c[k] * ihy2;
        rb.add(i, j, -2.0 * (ca + cc));
        rb.add(i - 1, j, ca);
        rb.add(i + 1, j, ca);
        rb.add(i, j - 1, cc);
        rb.add(i, j + 1, cc);

        // cross entries are always inserted (zeros stay structural) so the
        // sparsity pattern is independent of the coefficients
        const double cb = 2.0 * b[k] * 0.25 * ihxy;
        rb.add_corner(i, j, i + 1, j + 1, cb);
        rb.add_corner(i, j, i - 1, j - 1, cb);
        rb.add_corner(i, j, i + 1, j - 1, -cb);
        rb.add_corner(i, j, i - 1, j + 1, -cb);
    }

    A.resize(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    if (!pattern_done) {
        lu.analyzePattern(A);
        pattern_done = true;
    }
    lu.factorize(A);
    factor_ok = (lu.info() == Eigen::Success);
}

NinePointDirichlet::NinePointDirichlet(const DomainMask& mask) : impl_(new Impl) {
    impl_->mask = &mask;
    const GridSpec& g = mask.grid;
    impl_->unknown_of_node.assign(g.size(), -1);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (mask.is_interior(i, j)) {
                impl_->unknown_of_node[g.idx(i, j)] =
                    static_cast<int>(impl_->node_of_unknown.size());
                impl_->node_of_unknown.push_back(g.idx(i, j));
            }
}

NinePointDirichlet::~NinePointDirichlet() = default;
NinePointDirichlet::NinePointDirichlet(NinePointDirichlet&&) noexcept = default;
NinePointDirichlet& NinePointDirichlet::operator=(NinePointDirichlet&&) noexcept = default;

int NinePointDirichlet::n_unknowns() const {
    return static_cast<int>(impl_->node_of_unknown.size());
}

void NinePointDirichlet::set_coefficients(const std::vector<double>& a,
                                          const std::vector<double>& b,
                                          const std::vector<double>& c) {
    impl_->assemble(a, b, c);
}

void NinePointDirichlet::set_laplacian() {
    const std::size_t n = static_cast<std::size_t>(impl_->mask->grid.size());
    std::vector<double> a(n, 1.0), b(n, 0.0), c(n, 1.0);
    impl_->assemble(a, b, c);
}

LinearSolveResult NinePointDirichlet::solve(const ScalarField& f, const ScalarField& bc) const {
    const Impl& im = *impl_;
    const int n = static_cast<int>(im.node_of_unknown.size());

    LinearSolveResult out;
    out.solution = bc; // boundary (and exterior) values pass through
    if (!im.factor_ok) {
        out.ok = false;
        out.rel_residual = std::numeric_limits<double>::infinity();
        return out;
    }

    Eigen::VectorXd rhs(n);
    for (int r = 0; r < n; ++r) {
        double v = f.at(im.node_of_unknown[r]);
        for (const auto& [k, w] : im.bc_terms[r]) v -= w * bc.at(k);
        rhs[r] = v;
    }

    Eigen::VectorXd x = im.lu.solve(rhs);
    const double rnorm = (im.A * x - rhs).lpNorm<Eigen::Infinity>();
    const double bnorm = rhs.lpNorm<Eigen::Infinity>();
    out.rel_residual = rnorm / (bnorm + 1e-300);
    out.ok = std::isfinite(out.rel_residual);

    for (int r = 0; r < n; ++r) out.solution.at(im.node_of_unknown[r]) = x[r];
    return out;
}

ScalarField NinePointDirichlet::apply(const ScalarField& u) const {
    const Impl& im = *impl_;
    const int n = static_cast<int>(im.node_of_unknown.size());
    Eigen::VectorXd x(n);
    for (int r = 0; r < n; ++r) x[r] = u.at(im.node_of_unknown[r]);
    Eigen::VectorXd y = im.A * x;
    ScalarField out(u.grid);
    for (int r = 0; r < n; ++r) {
        double v = y[r];
        for (const auto& [k, w] : im.bc_terms[r]) v += w * u.at(k);
        out.at(im.node_of_unknown[r]) = v;
    }
    return out;
}

} // namespace abreu
