#pragma once

#include "abreu/grid.hpp"
#include "abreu/lma.hpp"
#include "abreu/ma.hpp"
#include "abreu/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace abreu {

enum class RhsMode { Penalized, GeneralDiv, AllenCahn };
enum class PenalizationKind { FixedDelta, Continuation };

/// Full second boundary value problem instance.
struct AbreuProblem {
    DomainMask mask;
    ScalarField phi; // C^2 data on all of Omega; Dirichlet value of u
    ScalarField psi; // Dirichlet value of w (only boundary nodes are read)
    LagrangianModel model;
    GaugeFunction gauge;
    RhsMode rhs_mode = RhsMode::Penalized;
    PenalizationKind pen_kind = PenalizationKind::FixedDelta;
    double penalization = 0.1; // delta in fixed mode, eps in continuation mode
};

/// Validates the theorem hypotheses: inf psi > 0 on the boundary,
/// penalization > 0; in continuation mode additionally rho > 0 and phi
/// uniformly convex (positive Hessian eigenvalues nodewise).
AbreuProblem make_problem(DomainMask mask, ScalarField phi, ScalarField psi,
                          LagrangianModel model, GaugeFunction gauge, RhsMode rhs_mode,
                          PenalizationKind pen_kind, double penalization);

struct HomotopyConfig {
    std::vector<double> t_schedule = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    double sigma = 0.5;      // Picard damping, adapted during the run
    double w_floor = 1e-8;
    double outer_tol = 1e-7; // fixed-point tolerance on |w_next - w|_inf
    int max_outer = 200;
    int max_bisect = 8;      // t-step bisections before giving up
    MAConfig ma;
};

enum class SolveStatus { Converged, NotConverged, Degenerate };

struct IterRecord {
    double t;
    int k;
    double defect, ma_residual, lma_residual;
    double min_w, max_w, min_det, max_det;
};

struct SolveDiagnostics {
    double linf_u = 0;
    double min_det = 0, max_det = 0;
    double bnd_unu2 = 0;          // integral of u_nu^2 over the boundary
    double pen_l2 = 0;            // integral of (u-phi)^2 / pen over Omega \ Omega0
    double J = 0;                 // gradient-Lagrangian functional over Omega0
    double J_pen = 0;             // penalized functional (NaN when infeasible)
    double eps_bnd_unu2 = 0;      // eps-scaled trio of the continuation estimates
    double rho_l2_omega0 = 0;
    double inveps_l2_outside = 0;
};

struct SolveReport {
    ScalarField u, w;
    std::vector<IterRecord> history;
    SolveDiagnostics diag;
    SolveStatus status = SolveStatus::NotConverged;
    double final_defect = 0;
    std::string hint; // e.g. schedule refinement suggestion
};

/// Right-hand side assembly.
///  Penalized: f0(x,u) - crossF1(x,Du) - hesspF1(x,Du):D2u on Omega0,
///             (u - phi)/pen outside.
///  GeneralDiv: -crossF1 - hesspF1:D2u everywhere.
///  AllenCahn: u^3 - u - lap u everywhere.
ScalarField assemble_rhs(const ScalarField& u, const AbreuProblem& prob);

struct PhiStepResult {
    ScalarField w_next;
    ScalarField u;
    MAStatus ma_status = MAStatus::NotConverged;
    double ma_residual = 0;
    double lma_residual = 0;
    double min_det = 0, max_det = 0;
};

/// One application of the homotopy map: Monge-Ampere solve at
/// det D^2 u = invert(w), then the linearized solve with right side t*f
/// (divided by eps in continuation mode) and boundary data t*psi + (1-t),
/// followed by damped averaging and the positivity floor.
/// Throws std::invalid_argument when w < w_floor on input; DegenerateError
/// when the gauge inversion leaves its range. rhs_override freezes f for
/// manufactured-solution verification.
PhiStepResult phi_t_step(const ScalarField& w, double t, const AbreuProblem& prob,
                         const HomotopyConfig& cfg, double sigma,
                         const ScalarField* rhs_override = nullptr,
                         NinePointDirichlet* shared_ma = nullptr);

/// Damped Picard iteration on phi_t_step along the t-schedule with warm
/// starts and bisection of failing t-steps. w0 overrides the w = 1 start;
/// skip_homotopy iterates at t = 1 only (continuation warm starts).
SolveReport solve_abreu(const AbreuProblem& prob, const HomotopyConfig& cfg,
                        const ScalarField* w0 = nullptr, bool skip_homotopy = false);

struct ContinuationResult {
    std::vector<double> eps_list;
    std::vector<SolveReport> reports;
    std::vector<double> diff_prev; // |u_eps - u_prev|_inf on Omega0, NaN for the first
};

/// Solve the eps-scaled system for each eps in decreasing order, warm
/// starting from the previous solution (unless cold_start).
ContinuationResult epsilon_continuation(const AbreuProblem& prob_template,
                                        const std::vector<double>& eps_list,
                                        const HomotopyConfig& cfg, bool cold_start = false);

/// eps (D^2 u)^{-1} nodewise: the computable approximation of the
/// Euler-Lagrange multiplier matrix. Throws DegenerateError if det <= 0.
struct MatrixField {
    GridSpec grid;
    std::vector<double> m11, m12, m22;
    Sym2 at(int i, int j) const {
        const int k = grid.idx(i, j);
        return {m11[k], m12[k], m22[k]};
    }
};
MatrixField multiplier_field(const ScalarField& u, double eps, const DomainMask& mask);

struct BoundaryDiagnostics {
    double unu2 = 0;        // integral of u_nu^2
    double K_psi_unu2 = 0;  // integral of K psi u_nu^2 (0 with warning on rectangles)
    double max_abs_unu = 0;
    bool curvature_warning = false; // rectangle: curvature lives at corners only
};
BoundaryDiagnostics boundary_diagnostics(const ScalarField& u, const ScalarField& psi,
                                         const DomainMask& mask);

} // namespace abreu
