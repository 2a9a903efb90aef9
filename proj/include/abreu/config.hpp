#pragma once

#include "abreu/grid.hpp"
#include "abreu/oracle.hpp"
#include "abreu/outer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace abreu {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parsed and validated key/value configuration (flat `section.key = value`
/// lines, `#` comments, comma-separated lists). Unknown keys are rejected.
struct RunConfig {
    // domain
    std::string shape = "rect_rect";
    std::vector<double> omega = {-1, 1, -1, 1};
    std::vector<double> omega0_rect = {-0.5, 0.5, -0.5, 0.5};
    Vec2 omega0_center{0, 0};
    double omega0_radius = 0.5;
    double se_a = 1, se_b = 1, se_m = 4;

    // grid
    int nx = 65, ny = 65;

    // model
    std::string model = "rochet_chone";
    double rho = 0.0;
    std::optional<double> gamma_const;
    std::string gamma_expr;
    int s = 2;
    double theta = 0.0;

    // mode and penalization
    std::string mode = "fixed_delta";
    double delta = 0.1;
    std::vector<double> eps_list = {0.2, 0.1, 0.05};

    // boundary/extension data
    std::string phi_expr = "x1^2+x2^2";
    std::string psi_expr = "1";

    HomotopyConfig homotopy;
    OracleConfig oracle;
    bool cold_start = false;
    bool dump_fields = true;
    std::uint64_t seed = 12345;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// builders from a validated config
DomainMask build_mask(const RunConfig& cfg);
LagrangianModel build_model(const RunConfig& cfg, const DomainMask& mask);
GaugeFunction build_gauge(const RunConfig& cfg);
AbreuProblem build_problem(const RunConfig& cfg);

} // namespace abreu
