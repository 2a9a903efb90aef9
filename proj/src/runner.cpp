#include "abreu/runner.hpp"

#include "abreu/config.hpp"
#include "abreu/csv.hpp"
#include "abreu/errors.hpp"
#include "abreu/expr.hpp"
#include "abreu/oracle.hpp"
#include "abreu/outer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace abreu {

namespace {

namespace fs = std::filesystem;

std::string eps_tag(double eps) {
    std::ostringstream ss;
    ss << eps;
    std::string s = ss.str();
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

int status_code(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return 0;
        case SolveStatus::NotConverged: return 1;
        case SolveStatus::Degenerate: return 2;
    }
    return 1;
}

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "CONVERGED";
        case SolveStatus::NotConverged: return "NOT_CONVERGED";
        case SolveStatus::Degenerate: return "DEGENERATE";
    }
    return "?";
}

void print_report(std::ostream& log, const SolveReport& rep, double pen) {
    log << "status=" << status_name(rep.status) << " defect=" << rep.final_defect
        << " |u|_inf=" << rep.diag.linf_u << " det in [" << rep.diag.min_det << ", "
        << rep.diag.max_det << "]"
        << " bnd_unu2=" << rep.diag.bnd_unu2 << " J=" << rep.diag.J << " J_pen=" << rep.diag.J_pen
        << " pen=" << pen << "\n";
    if (!rep.hint.empty()) log << "hint: " << rep.hint << "\n";
}

RunConfig load_with_overrides(const RunOptions& opt) {
    RunConfig cfg = load_config(opt.config_path);
    if (opt.grid_override) {
        cfg.nx = *opt.grid_override;
        cfg.ny = *opt.grid_override;
        if (cfg.nx < 5) throw ConfigError("config: --grid must be >= 5");
    }
    if (opt.seed_override) cfg.seed = *opt.seed_override;
    return cfg;
}

void warn_assumptions(std::ostream& log, const RunConfig& cfg, const AbreuProblem& prob) {
    if (prob.rhs_mode != RhsMode::Penalized) return;
    AssumptionReport rep = verify_assumptions(prob.model, prob.mask, SampleBox{}, 200, cfg.seed);
    if (!rep.all_pass())
        log << "warning: structural assumptions not satisfied on the sample box "
               "(f0_monotone="
            << rep.f0_monotone.pass << " hessp=" << rep.hessp_bounds.pass
            << " cross=" << rep.cross_growth.pass << " band=" << rep.band_growth.pass << ")\n";
}

int cmd_solve(const RunOptions& opt, std::ostream& log) {
    RunConfig cfg = load_with_overrides(opt);
    if (cfg.mode == "continuation")
        throw ConfigError("config: mode=continuation is driven by the 'continue' command");
    AbreuProblem prob = build_problem(cfg);
    warn_assumptions(log, cfg, prob);

    SolveReport rep = solve_abreu(prob, cfg.homotopy);
    fs::create_directories(opt.out_dir);
    write_report_csv(opt.out_dir + "/report.csv", rep.history);
    if (cfg.dump_fields) {
        write_field_csv(opt.out_dir + "/u.csv", rep.u, prob.mask);
        write_field_csv(opt.out_dir + "/w.csv", rep.w, prob.mask);
    }
    print_report(log, rep, prob.penalization);
    return rep.status == SolveStatus::Converged ? 0 : 3;
}

struct ContinuationArtifacts {
    ContinuationResult cont;
    std::vector<ContinuationRow> rows;
};

ContinuationArtifacts run_continuation(const RunOptions& opt, const RunConfig& cfg,
                                       std::ostream& log, const ScalarField* u_star) {
    AbreuProblem prob = build_problem(cfg);
    warn_assumptions(log, cfg, prob);

    ContinuationArtifacts art;
    art.cont = epsilon_continuation(prob, cfg.eps_list, cfg.homotopy, cfg.cold_start);

    fs::create_directories(opt.out_dir);
    for (std::size_t k = 0; k < art.cont.reports.size(); ++k) {
        const SolveReport& rep = art.cont.reports[k];
        const double eps = art.cont.eps_list[k];
        write_report_csv(opt.out_dir + "/report_eps" + eps_tag(eps) + ".csv", rep.history);
        if (cfg.dump_fields)
            write_field_csv(opt.out_dir + "/u_eps" + eps_tag(eps) + ".csv", rep.u, prob.mask);

        ContinuationRow row{};
        row.eps = eps;
        row.err_vs_prev = art.cont.diff_prev[k];
        row.err_vs_oracle = std::nan("");
        if (u_star)
            row.err_vs_oracle = max_abs_diff(rep.u, *u_star, [&](int i, int j) {
                return prob.mask.in_omega0(i, j);
            });
        row.eps_bnd_unu2 = rep.diag.eps_bnd_unu2;
        row.rho_l2_omega0 = rep.diag.rho_l2_omega0;
        row.inveps_l2_outside = rep.diag.inveps_l2_outside;
        row.status = status_code(rep.status);
        art.rows.push_back(row);

        log << "eps=" << eps << " ";
        print_report(log, rep, eps);
    }
    write_continuation_csv(opt.out_dir + "/continuation.csv", art.rows);
    return art;
}

int cmd_continue(const RunOptions& opt, std::ostream& log) {
    RunConfig cfg = load_with_overrides(opt);
    if (cfg.mode != "continuation")
        throw ConfigError("config: the 'continue' command requires mode = continuation");
    ContinuationArtifacts art = run_continuation(opt, cfg, log, nullptr);
    for (const auto& r : art.rows)
        if (r.status != 0) return 3;
    return 0;
}

OracleResult run_oracle(const RunOptions& opt, const RunConfig& cfg, std::ostream& log) {
    DomainMask mask = build_mask(cfg);
    LagrangianModel model = build_model(cfg, mask);
    Expression phi_e = Expression::parse(cfg.phi_expr);
    ScalarField phi = ScalarField::from_function(mask.grid, [&](double x, double y) {
        return phi_e.eval(x, y);
    });

    OracleResult res = minimize_constrained(model, phi, mask, cfg.oracle);
    fs::create_directories(opt.out_dir);
    write_oracle_csv(opt.out_dir + "/oracle.csv", res.history);
    if (cfg.dump_fields) write_field_csv(opt.out_dir + "/u_star.csv", res.u, mask);
    log << "oracle: converged=" << res.converged << " iters=" << res.iterations
        << " objective=" << res.objective << " pg_norm=" << res.pg_norm
        << " violation=" << res.max_violation << " frac_fail_8dir=" << res.frac_fail_8dir << "\n";
    return res;
}

int cmd_oracle(const RunOptions& opt, std::ostream& log) {
    RunConfig cfg = load_with_overrides(opt);
    OracleResult res = run_oracle(opt, cfg, log);
    return res.converged ? 0 : 3;
}

int cmd_compare(const RunOptions& opt, std::ostream& log) {
    RunConfig cfg = load_with_overrides(opt);
    if (cfg.mode != "continuation")
        throw ConfigError("config: the 'compare' command requires mode = continuation");
    OracleResult oracle = run_oracle(opt, cfg, log);
    ContinuationArtifacts art = run_continuation(opt, cfg, log, &oracle.u);

    log << "eps -> |u_eps - u*|_inf(Omega0):";
    for (const auto& r : art.rows) log << "  " << r.eps << " -> " << r.err_vs_oracle;
    log << "\n";
    bool all_ok = oracle.converged;
    for (const auto& r : art.rows) all_ok = all_ok && r.status == 0;
    return all_ok ? 0 : 3;
}

int cmd_diagnose(const RunOptions& opt, std::ostream& log) {
    RunConfig cfg = load_with_overrides(opt);
    DomainMask mask = build_mask(cfg);
    LagrangianModel model = build_model(cfg, mask);

    AssumptionReport rep = verify_assumptions(model, mask, SampleBox{}, 400, cfg.seed);
    auto line = [&](const char* name, const AssumptionCheck& c) {
        log << name << ": " << (c.pass ? "pass" : "FAIL") << " worst_margin=" << c.worst_margin
            << " at x=(" << c.witness_x.x << "," << c.witness_x.y << ")";
        if (c.witness_z != 0 || c.witness_z2 != 0)
            log << " z=" << c.witness_z << " z~=" << c.witness_z2;
        if (c.witness_p.x != 0 || c.witness_p.y != 0)
            log << " p=(" << c.witness_p.x << "," << c.witness_p.y << ")";
        log << "\n";
    };
    line("f0_monotone", rep.f0_monotone);
    line("f0_growth", rep.f0_growth);
    line("hessp_bounds", rep.hessp_bounds);
    line("cross_growth", rep.cross_growth);
    line("band_growth", rep.band_growth);
    line("gradp_growth", rep.gradp_growth);

    ScalarField u(mask.grid);
    if (!opt.field_path.empty()) {
        FieldDump d = read_field_csv(opt.field_path);
        if (!d.grid.same_as(mask.grid))
            throw ConfigError("diagnose: field dump grid does not match the config grid");
        u = d.field;
    } else {
        Expression phi_e = Expression::parse(cfg.phi_expr);
        u = ScalarField::from_function(mask.grid,
                                       [&](double x, double y) { return phi_e.eval(x, y); });
    }
    Expression psi_e = Expression::parse(cfg.psi_expr);
    ScalarField psi = ScalarField::from_function(mask.grid, [&](double x, double y) {
        return psi_e.eval(x, y);
    });

    BoundaryDiagnostics bd = boundary_diagnostics(u, psi, mask);
    log << "boundary: unu2=" << bd.unu2 << " K_psi_unu2=" << bd.K_psi_unu2
        << " max|u_nu|=" << bd.max_abs_unu
        << (bd.curvature_warning ? " (flat faces: curvature lives at corners)" : "") << "\n";

    const bool convex = is_discretely_convex(u, mask, 1e-8);
    log << "field: discretely_convex=" << convex;
    if (convex) {
        ScalarField shifted = u;
        double mb = -1e300;
        for (int j = 0; j < mask.grid.ny; ++j)
            for (int i = 0; i < mask.grid.nx; ++i)
                if (mask.is_boundary(i, j)) mb = std::max(mb, u(i, j));
        for (double& v : shifted.v) v -= mb;
        ConeBound cb = cone_linf_bound(shifted, mask);
        GradientBound gb = interior_gradient_bound(u, mask);
        log << " cone_bound=[" << cb.lhs << " <= " << cb.rhs << " " << (cb.holds ? "ok" : "FAIL")
            << "] grad_bound=[" << gb.max_grad << " <= " << gb.bound << " "
            << (gb.holds ? "ok" : "FAIL") << "]";
    }
    log << "\n";

    fs::create_directories(opt.out_dir);
    std::ofstream txt(opt.out_dir + "/diagnose.txt");
    txt << "see run log\n";
    return 0;
}

} // namespace

int run(const RunOptions& opt, std::ostream& log) {
    try {
        if (opt.command == "selftest") {
            std::ostringstream buf;
            const int failures = selftest(buf);
            log << buf.str();
            if (!opt.out_dir.empty()) {
                fs::create_directories(opt.out_dir);
                std::ofstream f(opt.out_dir + "/selftest.txt");
                f << buf.str();
            }
            return failures == 0 ? 0 : 4;
        }
        if (opt.config_path.empty()) throw ConfigError("config: --config is required");
        if (opt.command == "solve") return cmd_solve(opt, log);
        if (opt.command == "continue") return cmd_continue(opt, log);
        if (opt.command == "oracle") return cmd_oracle(opt, log);
        if (opt.command == "compare") return cmd_compare(opt, log);
        if (opt.command == "diagnose") return cmd_diagnose(opt, log);
        throw ConfigError("unknown command: " + opt.command);
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace abreu
