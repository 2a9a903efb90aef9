#pragma once

#include "abreu/grid.hpp"

#include <functional>
#include <optional>
#include <random>
#include <string>

namespace abreu {

/// Lagrangian F(x,z,p) = F0(x,z) + F1(x,p) with the derivative callbacks the
/// solver needs, plus the structural constants of the growth assumptions.
struct LagrangianModel {
    std::string name;

    std::function<double(Vec2, double)> F0;      // energy density in z
    std::function<double(Vec2, double)> f0;      // dF0/dz
    std::function<double(Vec2, Vec2)> F1;        // energy density in p
    std::function<Vec2(Vec2, Vec2)> gradpF1;     // dF1/dp
    std::function<Sym2(Vec2, Vec2)> hesspF1;     // d2F1/dp2
    std::function<double(Vec2, Vec2)> crossF1;   // sum_i d/dx_i [F1_{p_i}](x, p frozen)

    double rho = 0.0;     // convexity modulus of f0 in z
    double c0 = 0.0;      // |F1_{p_i x_i}| <= c0|p| + Cstar on Omega0
    double Cstar = 0.0;   // hesspF1 <= Cstar I
    double c0_bar = 0.0;  // |F1_{p_i}| <= c0_bar|p| + Cstar_bar on the Omega0 band
    double Cstar_bar = 0.0;

    std::function<double(double)> eta; // increasing growth bound

    bool non_convex_F0 = false; // set for the double-well model
};

/// Perturbed monopolist model: F0 = gamma z + rho/2 z^2,
/// F1 = gamma(|p|^2/2 - x.p). gamma must be positive on the interior of
/// Omega0 (it may vanish on the band). Constants are derived from bounds of
/// gamma and its gradient sampled over Omega0. grad_gamma is optional; when
/// absent the gradient is taken by central differences of gamma.
LagrangianModel rochet_chone(const std::function<double(Vec2)>& gamma, double rho,
                             const DomainMask& mask,
                             const std::function<Vec2(Vec2)>& grad_gamma = nullptr);

/// Constant-gamma convenience overload. r0 bounds |x| over Omega0 and only
/// enters the band constants.
LagrangianModel rochet_chone_const(double gamma, double rho, double r0 = 2.0);

/// Double-well model: F0 = (z^2-1)^2/4, F1 = |p|^2/2. f0 = z^3 - z is not
/// monotone; the model carries non_convex_F0 = true.
LagrangianModel allen_cahn();

/// F1 = |p|^s / s with integer s >= 2, F0 = 0.
LagrangianModel power_lagrangian(int s);

/// F1 = exp(|p|^2/2), F0 = 0.
LagrangianModel exp_lagrangian();

// ---- gauge functions -------------------------------------------------------

/// Link between w and det D^2 u: w = deriv(det) and det = invert(w).
/// Power gauge: G(t) = (t^theta - 1)/theta, G'(t) = t^(theta-1); the log
/// gauge is the theta = 0 limit, G = log t, G' = 1/t.
class GaugeFunction {
public:
    enum class Kind { Power, Log, Custom };

    static GaugeFunction power(double theta);
    static GaugeFunction log_gauge();
    /// Strictly monotone H with explicit inverse; G_of_t optional (only
    /// needed by the penalized-functional evaluation).
    static GaugeFunction custom(std::function<double(double)> H,
                                std::function<double(double)> H_inverse,
                                std::function<double(double)> G_of_t = nullptr);

    Kind kind() const { return kind_; }
    double theta() const { return theta_; }

    /// G(d); throws std::domain_error for d <= 0 or if G is unavailable.
    double value(double d) const;
    /// G'(d) = w; throws std::domain_error for d <= 0.
    double derivative(double d) const;
    /// d with G'(d) = w; throws std::domain_error for w <= 0 or w outside range.
    double invert(double w) const;

private:
    Kind kind_ = Kind::Log;
    double theta_ = 0.0;
    std::function<double(double)> H_, Hinv_, G_;
};

// ---- structural-assumption verification ------------------------------------

struct AssumptionCheck {
    bool pass = true;
    double worst_margin = 0.0; // most negative slack seen
    Vec2 witness_x{};
    double witness_z = 0.0, witness_z2 = 0.0;
    Vec2 witness_p{};
};

struct AssumptionReport {
    AssumptionCheck f0_monotone;     // (f0(z)-f0(z~))(z-z~) >= rho |z-z~|^2
    AssumptionCheck f0_growth;       // |f0| <= eta(|z|)
    AssumptionCheck hessp_bounds;    // 0 <= hesspF1 <= Cstar I
    AssumptionCheck cross_growth;    // |crossF1| <= 2(c0|p| + Cstar)
    AssumptionCheck band_growth;     // |F1_{p_i}| <= c0_bar|p| + Cstar_bar on the band
    AssumptionCheck gradp_growth;    // |gradpF1| <= eta(|p|)
    bool all_pass() const {
        return f0_monotone.pass && f0_growth.pass && hessp_bounds.pass && cross_growth.pass &&
               band_growth.pass && gradp_growth.pass;
    }
};

struct SampleBox {
    double z_lo = -3.0, z_hi = 3.0;
    double p_lo = -4.0, p_hi = 4.0;
};

/// Sampling-based check of the structural assumptions over Omega0 (grid nodes
/// plus Monte-Carlo x), z and p ranges from the box. Reports, never throws.
AssumptionReport verify_assumptions(const LagrangianModel& model, const DomainMask& mask,
                                    const SampleBox& box, int n_samples, std::uint64_t seed = 1234,
                                    double tol = 1e-9);

} // namespace abreu
