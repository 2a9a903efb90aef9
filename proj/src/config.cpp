#include "abreu/config.hpp"

#include "abreu/expr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace abreu {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& v, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("");
        } catch (...) {
            throw ConfigError("config: bad number '" + item + "' in list for key " + key);
        }
    }
    if (out.empty()) throw ConfigError("config: empty list for key " + key);
    return out;
}

double parse_num(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ConfigError("config: bad number '" + v + "' for key " + key);
    }
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("config: expected true/false for key " + key + ", got '" + v + "'");
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(lineno));
        if (kv.count(key)) throw ConfigError("config: duplicate key " + key);
        kv[key] = val;
    }

    RunConfig cfg;
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("domain.shape")) cfg.shape = *v;
    if (auto v = take("domain.omega")) cfg.omega = parse_list(*v, "domain.omega");
    if (auto v = take("domain.omega0_rect")) cfg.omega0_rect = parse_list(*v, "domain.omega0_rect");
    if (auto v = take("domain.omega0_center")) {
        auto c = parse_list(*v, "domain.omega0_center");
        if (c.size() != 2) throw ConfigError("config: domain.omega0_center needs 2 numbers");
        cfg.omega0_center = {c[0], c[1]};
    }
    if (auto v = take("domain.omega0_radius")) cfg.omega0_radius = parse_num(*v, "domain.omega0_radius");
    if (auto v = take("domain.superellipse")) {
        auto c = parse_list(*v, "domain.superellipse");
        if (c.size() != 3) throw ConfigError("config: domain.superellipse needs a,b,m");
        cfg.se_a = c[0];
        cfg.se_b = c[1];
        cfg.se_m = c[2];
    }
    if (auto v = take("grid.nx")) cfg.nx = static_cast<int>(parse_num(*v, "grid.nx"));
    if (auto v = take("grid.ny")) cfg.ny = static_cast<int>(parse_num(*v, "grid.ny"));

    if (auto v = take("model")) cfg.model = *v;
    if (auto v = take("model.rho")) cfg.rho = parse_num(*v, "model.rho");
    if (auto v = take("model.gamma_const")) cfg.gamma_const = parse_num(*v, "model.gamma_const");
    if (auto v = take("model.gamma_expr")) cfg.gamma_expr = *v;
    if (auto v = take("model.s")) cfg.s = static_cast<int>(parse_num(*v, "model.s"));
    if (auto v = take("model.theta")) cfg.theta = parse_num(*v, "model.theta");
    if (auto v = take("theta")) cfg.theta = parse_num(*v, "theta");

    if (auto v = take("mode")) cfg.mode = *v;
    if (auto v = take("delta")) cfg.delta = parse_num(*v, "delta");
    if (auto v = take("eps_list")) cfg.eps_list = parse_list(*v, "eps_list");

    if (auto v = take("problem.phi")) cfg.phi_expr = *v;
    if (auto v = take("problem.psi")) cfg.psi_expr = *v;

    if (auto v = take("homotopy.t_schedule")) cfg.homotopy.t_schedule = parse_list(*v, "homotopy.t_schedule");
    if (auto v = take("homotopy.sigma")) cfg.homotopy.sigma = parse_num(*v, "homotopy.sigma");
    if (auto v = take("homotopy.w_floor")) cfg.homotopy.w_floor = parse_num(*v, "homotopy.w_floor");
    if (auto v = take("homotopy.outer_tol")) cfg.homotopy.outer_tol = parse_num(*v, "homotopy.outer_tol");
    if (auto v = take("homotopy.max_outer")) cfg.homotopy.max_outer = static_cast<int>(parse_num(*v, "homotopy.max_outer"));
    if (auto v = take("homotopy.max_bisect")) cfg.homotopy.max_bisect = static_cast<int>(parse_num(*v, "homotopy.max_bisect"));

    if (auto v = take("ma.newton_tol")) cfg.homotopy.ma.newton_tol = parse_num(*v, "ma.newton_tol");
    if (auto v = take("ma.max_newton")) cfg.homotopy.ma.max_newton = static_cast<int>(parse_num(*v, "ma.max_newton"));
    if (auto v = take("ma.damping")) cfg.homotopy.ma.damping = parse_num(*v, "ma.damping");
    if (auto v = take("ma.eig_floor")) cfg.homotopy.ma.eig_floor = parse_num(*v, "ma.eig_floor");

    if (auto v = take("oracle.pen_eps")) cfg.oracle.pen_eps = parse_num(*v, "oracle.pen_eps");
    if (auto v = take("oracle.max_iters")) cfg.oracle.max_iters = static_cast<int>(parse_num(*v, "oracle.max_iters"));
    if (auto v = take("oracle.kkt_rel_tol")) cfg.oracle.kkt_rel_tol = parse_num(*v, "oracle.kkt_rel_tol");

    if (auto v = take("continue.cold_start")) cfg.cold_start = parse_bool(*v, "continue.cold_start");
    if (auto v = take("output.fields")) cfg.dump_fields = parse_bool(*v, "output.fields");
    if (auto v = take("seed")) cfg.seed = static_cast<std::uint64_t>(parse_num(*v, "seed"));

    if (!kv.empty()) {
        std::string unknown;
        for (auto& [k, v] : kv) unknown += (unknown.empty() ? "" : ", ") + k;
        throw ConfigError("config: unknown keys: " + unknown);
    }

    // ---- validation ----------------------------------------------------
    if (cfg.shape != "rect_rect" && cfg.shape != "rect_disk" && cfg.shape != "superellipse_disk")
        throw ConfigError("config: domain.shape must be rect_rect | rect_disk | superellipse_disk");
    if (cfg.omega.size() != 4) throw ConfigError("config: domain.omega needs x0,x1,y0,y1");
    if (cfg.omega0_rect.size() != 4) throw ConfigError("config: domain.omega0_rect needs 4 numbers");
    if (cfg.nx < 5 || cfg.ny < 5) throw ConfigError("config: grid.nx and grid.ny must be >= 5");
    if (cfg.model != "rochet_chone" && cfg.model != "allen_cahn" && cfg.model != "power" &&
        cfg.model != "exp")
        throw ConfigError("config: model must be rochet_chone | allen_cahn | power | exp");
    if (cfg.rho < 0) throw ConfigError("config: model.rho must be >= 0");
    if (cfg.s < 2) throw ConfigError("config: model.s must be an integer >= 2");
    if (cfg.theta < 0.0 || cfg.theta >= 0.5)
        throw ConfigError("config: theta = " + std::to_string(cfg.theta) +
                          " outside the admissible range [0, 0.5) for n = 2");
    if (cfg.mode != "fixed_delta" && cfg.mode != "continuation" && cfg.mode != "general_div" &&
        cfg.mode != "allen_cahn")
        throw ConfigError("config: mode must be fixed_delta | continuation | general_div | allen_cahn");
    if (!(cfg.delta > 0)) throw ConfigError("config: delta must be positive");
    for (std::size_t k = 0; k < cfg.eps_list.size(); ++k) {
        if (!(cfg.eps_list[k] > 0)) throw ConfigError("config: eps_list entries must be positive");
        if (k > 0 && !(cfg.eps_list[k] < cfg.eps_list[k - 1]))
            throw ConfigError("config: eps_list must be strictly decreasing");
    }
    if (!(cfg.homotopy.sigma > 0) || cfg.homotopy.sigma > 1)
        throw ConfigError("config: homotopy.sigma must lie in (0, 1]");
    if (cfg.homotopy.t_schedule.size() < 2 || cfg.homotopy.t_schedule.front() != 0.0 ||
        cfg.homotopy.t_schedule.back() != 1.0)
        throw ConfigError("config: homotopy.t_schedule must run from 0 to 1");
    for (std::size_t k = 1; k < cfg.homotopy.t_schedule.size(); ++k)
        if (!(cfg.homotopy.t_schedule[k] > cfg.homotopy.t_schedule[k - 1]))
            throw ConfigError("config: homotopy.t_schedule must increase");
    if (!(cfg.oracle.pen_eps > 0)) throw ConfigError("config: oracle.pen_eps must be positive");

    // expressions must parse
    try {
        Expression::parse(cfg.phi_expr);
        Expression::parse(cfg.psi_expr);
        if (!cfg.gamma_expr.empty()) Expression::parse(cfg.gamma_expr);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.gamma_const && !cfg.gamma_expr.empty())
        throw ConfigError("config: set model.gamma_const or model.gamma_expr, not both");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

DomainMask build_mask(const RunConfig& cfg) {
    GridSpec grid(cfg.nx, cfg.ny, cfg.omega[0], cfg.omega[1], cfg.omega[2], cfg.omega[3]);
    DomainShape shape;
    if (cfg.shape == "superellipse_disk")
        shape.omega = SuperellipseShape{cfg.se_a, cfg.se_b, cfg.se_m};
    else
        shape.omega = RectShape{cfg.omega[0], cfg.omega[1], cfg.omega[2], cfg.omega[3]};
    if (cfg.shape == "rect_rect")
        shape.omega0 =
            RectShape{cfg.omega0_rect[0], cfg.omega0_rect[1], cfg.omega0_rect[2], cfg.omega0_rect[3]};
    else
        shape.omega0 = DiskShape{cfg.omega0_center, cfg.omega0_radius};
    return build_domain(shape, grid);
}

LagrangianModel build_model(const RunConfig& cfg, const DomainMask& mask) {
    if (cfg.model == "rochet_chone") {
        if (!cfg.gamma_expr.empty()) {
            Expression e = Expression::parse(cfg.gamma_expr);
            return rochet_chone([e](Vec2 x) { return e.eval(x.x, x.y); }, cfg.rho, mask);
        }
        const double gc = cfg.gamma_const.value_or(1.0);
        return rochet_chone([gc](Vec2) { return gc; }, cfg.rho, mask,
                            [](Vec2) { return Vec2{0, 0}; });
    }
    if (cfg.model == "allen_cahn") return allen_cahn();
    if (cfg.model == "power") return power_lagrangian(cfg.s);
    return exp_lagrangian();
}

GaugeFunction build_gauge(const RunConfig& cfg) { return GaugeFunction::power(cfg.theta); }

AbreuProblem build_problem(const RunConfig& cfg) {
    DomainMask mask = build_mask(cfg);
    Expression phi_e = Expression::parse(cfg.phi_expr);
    Expression psi_e = Expression::parse(cfg.psi_expr);
    ScalarField phi = ScalarField::from_function(mask.grid, [&](double x, double y) {
        return phi_e.eval(x, y);
    });
    ScalarField psi = ScalarField::from_function(mask.grid, [&](double x, double y) {
        return psi_e.eval(x, y);
    });
    LagrangianModel model = build_model(cfg, mask);
    GaugeFunction gauge = build_gauge(cfg);

    RhsMode rhs_mode = RhsMode::Penalized;
    PenalizationKind kind = PenalizationKind::FixedDelta;
    double pen = cfg.delta;
    if (cfg.mode == "continuation") {
        kind = PenalizationKind::Continuation;
        pen = cfg.eps_list.front();
    } else if (cfg.mode == "general_div") {
        rhs_mode = RhsMode::GeneralDiv;
    } else if (cfg.mode == "allen_cahn") {
        rhs_mode = RhsMode::AllenCahn;
    }
    return make_problem(std::move(mask), std::move(phi), std::move(psi), std::move(model),
                        std::move(gauge), rhs_mode, kind, pen);
}

} // namespace abreu
