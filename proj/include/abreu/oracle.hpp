#pragma once

#include "abreu/grid.hpp"
#include "abreu/models.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace abreu {

/// Discrete convexity cone: one halfspace per interior node and direction,
/// the normalized second difference along the direction must be >= 0.
/// Unknowns are the interior nodes; boundary values are folded into the
/// row constants.
class ConvexityCone {
public:
    ConvexityCone(const DomainMask& mask, const ScalarField& boundary_values);

    int n_rows() const { return static_cast<int>(rows_.size()); }
    int n_unknowns() const { return static_cast<int>(node_of_unknown_.size()); }
    const std::vector<int>& node_of_unknown() const { return node_of_unknown_; }
    const std::vector<int>& unknown_of_node() const { return unknown_of_node_; }

    /// Largest constraint violation max_r (b_r - a_r.u)+.
    double max_violation(const std::vector<double>& u) const;

    /// Dykstra projection onto the cone intersection. Sweeps until the
    /// violation drops below tol or the sweep budget is exhausted; returns
    /// the final violation. Feasible inputs are returned unchanged. With
    /// warm_mu (size n_rows) the multipliers persist across calls, which
    /// accelerates sequences of nearby projections; exact projections use
    /// fresh multipliers.
    double project(std::vector<double>& u, double tol, int max_sweeps,
                   std::vector<double>* warm_mu = nullptr) const;

    /// Value of one row (for the sign invariants).
    double row_value(int r, const std::vector<double>& u) const;

    /// Cumulative sweep count across project() calls (performance probe).
    long total_sweeps() const { return total_sweeps_; }

private:
    mutable long total_sweeps_ = 0;
    struct Row {
        int idx[3];     // unknown indices, -1 when folded into the constant
        double coef[3]; // (1,-2,1) / squared step
        double b;       // row must satisfy a.u >= b
        double norm2;   // |a|^2 over the unknown coordinates
    };
    std::vector<Row> rows_;
    std::vector<int> node_of_unknown_;
    std::vector<int> unknown_of_node_;
};

/// Quadrature of F0(x,u) + F1(x,Du) over Omega0 with centered gradients.
double evaluate_J(const ScalarField& u, const LagrangianModel& model, const DomainMask& mask);

/// Penalized oracle objective: J + (1/(2 pen_eps)) integral of (u-phi)^2
/// over Omega \ Omega0. This is the function minimize_constrained descends.
double evaluate_objective(const ScalarField& u, const LagrangianModel& model,
                          const ScalarField& phi, const DomainMask& mask, double pen_eps);

/// Three-term penalized functional
///   J + (1/(2 eps)) integral (u-phi)^2 - eps integral G(det D^2 u);
/// returns nullopt (the infeasible marker) when det D^2 u <= 0 at an
/// interior node.
std::optional<double> evaluate_J_eps(const ScalarField& u, const LagrangianModel& model,
                                     const GaugeFunction& gauge, double eps,
                                     const ScalarField& phi, const DomainMask& mask);

struct OracleConfig {
    double pen_eps = 1e-4;
    int max_iters = 30000;
    double kkt_rel_tol = 1e-6;  // projected-gradient norm vs 1 + |grad(start)|
    double kkt_stop_tol = 1e-8; // actual stopping point: multi-start agreement
                                // needs a margin below the quality gate
    double viol_tol = 1e-10;
    double dykstra_tol = 1e-11;
    int dykstra_max_sweeps = 800;
    int polish_max_sweeps = 60000;
    int log_stride = 25;
};

struct OracleIterRow {
    int iter;
    double objective, pg_norm, max_violation;
};

struct OracleResult {
    ScalarField u;
    bool converged = false;
    int iterations = 0;
    double objective = 0, pg_norm = 0, max_violation = 0;
    std::vector<OracleIterRow> history;
    double frac_fail_8dir = 0; // extended-direction convexity failures of u*
};

/// Accelerated projected gradient (monotone restarts) on the penalized
/// objective over the convexity cone with u = phi on the boundary.
/// Throws std::invalid_argument for models without convex F0/F1
/// (NONCONVEX_MODEL).
OracleResult minimize_constrained(const LagrangianModel& model, const ScalarField& phi,
                                  const DomainMask& mask, const OracleConfig& cfg = {},
                                  const ScalarField* start = nullptr);

} // namespace abreu
