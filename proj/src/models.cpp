#include "abreu/models.hpp"

#include <algorithm>
#include <cmath>

namespace abreu {

namespace {

LagrangianModel rochet_chone_core(const std::function<double(Vec2)>& gamma,
                                  const std::function<Vec2(Vec2)>& grad_gamma, double rho) {
    LagrangianModel m;
    m.name = "rochet_chone";
    m.rho = rho;
    m.F0 = [gamma, rho](Vec2 x, double z) { return gamma(x) * z + 0.5 * rho * z * z; };
    m.f0 = [gamma, rho](Vec2 x, double z) { return gamma(x) + rho * z; };
    m.F1 = [gamma](Vec2 x, Vec2 p) { return gamma(x) * (0.5 * dot(p, p) - dot(x, p)); };
    m.gradpF1 = [gamma](Vec2 x, Vec2 p) { return gamma(x) * (p - x); };
    m.hesspF1 = [gamma](Vec2 x, Vec2) {
        const double gv = gamma(x);
        return Sym2{gv, 0.0, gv};
    };
    m.crossF1 = [gamma, grad_gamma](Vec2 x, Vec2 p) {
        return dot(grad_gamma(x), p - x) - 2.0 * gamma(x);
    };
    return m;
}

std::function<Vec2(Vec2)> fd_gradient(const std::function<double(Vec2)>& f) {
    return [f](Vec2 x) {
        const double hx = 1e-6 * (1.0 + std::abs(x.x));
        const double hy = 1e-6 * (1.0 + std::abs(x.y));
        return Vec2{(f({x.x + hx, x.y}) - f({x.x - hx, x.y})) / (2 * hx),
                    (f({x.x, x.y + hy}) - f({x.x, x.y - hy})) / (2 * hy)};
    };
}

} // namespace

LagrangianModel rochet_chone(const std::function<double(Vec2)>& gamma, double rho,
                             const DomainMask& mask, const std::function<Vec2(Vec2)>& grad_gamma) {
    const auto dgamma = grad_gamma ? grad_gamma : fd_gradient(gamma);

    double gmax = 0.0, dgmax = 0.0, r0 = 0.0, gmax_band = 0.0, r0_band = 0.0;
    const GridSpec& g = mask.grid;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!mask.in_omega0(i, j)) continue;
            const Vec2 x{g.x(i), g.y(j)};
            const double gv = gamma(x);
            const NodeClass c = mask.cls(i, j);
            if (c == NodeClass::InteriorOmega0 && gv <= 0.0)
                throw std::invalid_argument("rochet_chone: gamma must be positive inside Omega0");
            if (gv < 0.0)
                throw std::invalid_argument("rochet_chone: gamma must be nonnegative on Omega0");
            gmax = std::max(gmax, gv);
            dgmax = std::max(dgmax, dgamma(x).norm());
            r0 = std::max(r0, x.norm());
            if (c == NodeClass::BoundaryOmega0Band) {
                gmax_band = std::max(gmax_band, gv);
                r0_band = std::max(r0_band, x.norm());
            }
        }

    LagrangianModel m = rochet_chone_core(gamma, dgamma, rho);
    m.c0 = dgmax;
    m.Cstar = gmax + dgmax * r0;
    m.c0_bar = gmax_band;
    m.Cstar_bar = gmax_band * r0_band;
    const double A = std::max({gmax + dgmax * r0, rho, 1.0});
    m.eta = [A](double r) { return A * (1.0 + r) * (1.0 + r); };
    return m;
}

LagrangianModel rochet_chone_const(double gamma, double rho, double r0) {
    if (gamma <= 0.0)
        throw std::invalid_argument("rochet_chone: gamma must be positive inside Omega0");
    LagrangianModel m = rochet_chone_core([gamma](Vec2) { return gamma; },
                                          [](Vec2) { return Vec2{0, 0}; }, rho);
    m.c0 = 0.0;
    m.Cstar = gamma;
    m.c0_bar = gamma;
    m.Cstar_bar = gamma * r0;
    const double A = std::max({gamma * (1.0 + r0), rho, 1.0});
    m.eta = [A](double r) { return A * (1.0 + r) * (1.0 + r); };
    return m;
}

LagrangianModel allen_cahn() {
    LagrangianModel m;
    m.name = "allen_cahn";
    m.F0 = [](Vec2, double z) {
        const double q = z * z - 1.0;
        return 0.25 * q * q;
    };
    m.f0 = [](Vec2, double z) { return z * z * z - z; };
    m.F1 = [](Vec2, Vec2 p) { return 0.5 * dot(p, p); };
    m.gradpF1 = [](Vec2, Vec2 p) { return p; };
    m.hesspF1 = [](Vec2, Vec2) { return Sym2{1.0, 0.0, 1.0}; };
    m.crossF1 = [](Vec2, Vec2) { return 0.0; };
    m.rho = 0.0;
    m.c0 = 0.0;
    m.Cstar = 1.0;
    m.c0_bar = 1.0;
    m.Cstar_bar = 0.0;
    m.eta = [](double r) { return (1.0 + r) * (1.0 + r) * (1.0 + r); };
    m.non_convex_F0 = true;
    return m;
}

LagrangianModel power_lagrangian(int s) {
    if (s < 2) throw std::invalid_argument("power_lagrangian: s must be >= 2");
    LagrangianModel m;
    m.name = "power_" + std::to_string(s);
    const double sd = s;
    m.F0 = [](Vec2, double) { return 0.0; };
    m.f0 = [](Vec2, double) { return 0.0; };
    m.F1 = [sd](Vec2, Vec2 p) { return std::pow(p.norm(), sd) / sd; };
    m.gradpF1 = [sd](Vec2, Vec2 p) {
        const double r = p.norm();
        if (r == 0.0) return Vec2{0, 0};
        return std::pow(r, sd - 2.0) * p;
    };
    m.hesspF1 = [sd](Vec2, Vec2 p) {
        const double r = p.norm();
        if (r == 0.0) return (sd == 2.0) ? Sym2{1, 0, 1} : Sym2{0, 0, 0};
        const double a = std::pow(r, sd - 2.0);
        const double b = (sd - 2.0) * std::pow(r, sd - 4.0);
        return Sym2{a + b * p.x * p.x, b * p.x * p.y, a + b * p.y * p.y};
    };
    m.crossF1 = [](Vec2, Vec2) { return 0.0; };
    // box-calibrated bounds, valid for |p| <= 4
    m.Cstar = (s == 2) ? 1.0 : (sd - 1.0) * std::pow(4.0, sd - 2.0);
    m.c0_bar = (s == 2) ? 1.0 : std::pow(4.0, sd - 2.0);
    m.eta = [sd](double r) { return std::pow(1.0 + r, sd - 1.0); };
    return m;
}

LagrangianModel exp_lagrangian() {
    LagrangianModel m;
    m.name = "exp";
    m.F0 = [](Vec2, double) { return 0.0; };
    m.f0 = [](Vec2, double) { return 0.0; };
    m.F1 = [](Vec2, Vec2 p) { return std::exp(0.5 * dot(p, p)); };
    m.gradpF1 = [](Vec2, Vec2 p) { return std::exp(0.5 * dot(p, p)) * p; };
    m.hesspF1 = [](Vec2, Vec2 p) {
        const double e = std::exp(0.5 * dot(p, p));
        return Sym2{e * (1.0 + p.x * p.x), e * p.x * p.y, e * (1.0 + p.y * p.y)};
    };
    m.crossF1 = [](Vec2, Vec2) { return 0.0; };
    // box-calibrated bounds, valid for |p| <= 4
    m.Cstar = 17.0 * std::exp(8.0);
    m.c0_bar = std::exp(8.0);
    m.eta = [](double r) { return (1.0 + r) * std::exp(0.5 * r * r); };
    return m;
}

// ---- gauges ----------------------------------------------------------------

GaugeFunction GaugeFunction::power(double theta) {
    if (theta < 0.0 || theta >= 0.5)
        throw std::invalid_argument("GaugeFunction::power: theta must lie in [0, 0.5)");
    GaugeFunction g;
    if (theta == 0.0) {
        g.kind_ = Kind::Log;
        g.theta_ = 0.0;
    } else {
        g.kind_ = Kind::Power;
        g.theta_ = theta;
    }
    return g;
}

GaugeFunction GaugeFunction::log_gauge() { return power(0.0); }

GaugeFunction GaugeFunction::custom(std::function<double(double)> H,
                                    std::function<double(double)> H_inverse,
                                    std::function<double(double)> G_of_t) {
    GaugeFunction g;
    g.kind_ = Kind::Custom;
    g.H_ = std::move(H);
    g.Hinv_ = std::move(H_inverse);
    g.G_ = std::move(G_of_t);
    return g;
}

double GaugeFunction::value(double d) const {
    if (d <= 0.0) throw std::domain_error("gauge: d must be positive");
    switch (kind_) {
        case Kind::Log: return std::log(d);
        case Kind::Power: return (std::pow(d, theta_) - 1.0) / theta_;
        case Kind::Custom:
            if (!G_) throw std::domain_error("gauge: custom gauge has no G");
            return G_(d);
    }
    return 0;
}

double GaugeFunction::derivative(double d) const {
    if (d <= 0.0) throw std::domain_error("gauge: d must be positive");
    switch (kind_) {
        case Kind::Log: return 1.0 / d;
        case Kind::Power: return std::pow(d, theta_ - 1.0);
        case Kind::Custom: return H_(d);
    }
    return 0;
}

double GaugeFunction::invert(double w) const {
    if (w <= 0.0) throw std::domain_error("gauge: w must be positive");
    switch (kind_) {
        case Kind::Log: return 1.0 / w;
        case Kind::Power: return std::pow(w, 1.0 / (theta_ - 1.0));
        case Kind::Custom: {
            const double d = Hinv_(w);
            if (!(d > 0.0) || !std::isfinite(d))
                throw std::domain_error("gauge: custom inverse left (0, inf)");
            return d;
        }
    }
    return 0;
}

// ---- assumption verification ------------------------------------------------

namespace {

void update(AssumptionCheck& c, double margin, Vec2 x, double z, double z2, Vec2 p) {
    if (margin < c.worst_margin) {
        c.worst_margin = margin;
        c.witness_x = x;
        c.witness_z = z;
        c.witness_z2 = z2;
        c.witness_p = p;
    }
    if (margin < 0.0) c.pass = false;
}

} // namespace

AssumptionReport verify_assumptions(const LagrangianModel& model, const DomainMask& mask,
                                    const SampleBox& box, int n_samples, std::uint64_t seed,
                                    double tol) {
    AssumptionReport rep;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uz(box.z_lo, box.z_hi);
    std::uniform_real_distribution<double> up(box.p_lo, box.p_hi);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const GridSpec& g = mask.grid;
    std::vector<Vec2> xs, xs_band;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (mask.in_omega0(i, j)) xs.push_back({g.x(i), g.y(j)});
            if (mask.cls(i, j) == NodeClass::BoundaryOmega0Band) xs_band.push_back({g.x(i), g.y(j)});
        }
    // thin the grid sample if it is large, keep determinism
    if (xs.size() > 400) {
        std::vector<Vec2> thin;
        const std::size_t stride = xs.size() / 400 + 1;
        for (std::size_t k = 0; k < xs.size(); k += stride) thin.push_back(xs[k]);
        xs = std::move(thin);
    }

    std::vector<double> zs;
    for (int k = 0; k <= 20; ++k) zs.push_back(box.z_lo + (box.z_hi - box.z_lo) * k / 20.0);
    std::vector<Vec2> ps;
    for (int a = 0; a <= 8; ++a)
        for (int b = 0; b <= 8; ++b)
            ps.push_back({box.p_lo + (box.p_hi - box.p_lo) * a / 8.0,
                          box.p_lo + (box.p_hi - box.p_lo) * b / 8.0});
    for (int k = 0; k < n_samples; ++k) ps.push_back({up(rng), up(rng)});

    auto slack = [tol](double rhs) { return tol * std::max(1.0, std::abs(rhs)); };

    // (i) rho-monotonicity of f0 and the eta growth bound
    for (const Vec2& x : xs) {
        for (std::size_t a = 0; a < zs.size(); ++a) {
            const double fa = model.f0(x, zs[a]);
            update(rep.f0_growth, model.eta(std::abs(zs[a])) + slack(model.eta(std::abs(zs[a]))) -
                                      std::abs(fa),
                   x, zs[a], 0, {});
            for (std::size_t b = a + 1; b < zs.size(); ++b) {
                const double dz = zs[a] - zs[b];
                const double lhs = (fa - model.f0(x, zs[b])) * dz;
                const double rhs = model.rho * dz * dz;
                update(rep.f0_monotone, lhs - rhs + slack(rhs), x, zs[a], zs[b], {});
            }
        }
        for (int k = 0; k < n_samples / 4 + 1; ++k) {
            const double z1 = uz(rng), z2 = uz(rng);
            const double dz = z1 - z2;
            const double lhs = (model.f0(x, z1) - model.f0(x, z2)) * dz;
            const double rhs = model.rho * dz * dz;
            update(rep.f0_monotone, lhs - rhs + slack(rhs), x, z1, z2, {});
        }
    }

    // (ii) 0 <= hesspF1 <= Cstar I, (iii) cross growth, eta growth of gradp
    for (const Vec2& x : xs) {
        for (const Vec2& p : ps) {
            const Sym2 H = model.hesspF1(x, p);
            const auto [lo, hi] = H.eigenvalues();
            update(rep.hessp_bounds, lo + slack(1.0), x, 0, 0, p);
            update(rep.hessp_bounds, model.Cstar + slack(model.Cstar) - hi, x, 0, 0, p);

            const double cb = 2.0 * (model.c0 * p.norm() + model.Cstar);
            update(rep.cross_growth, cb + slack(cb) - std::abs(model.crossF1(x, p)), x, 0, 0, p);

            const double eb = model.eta(p.norm());
            update(rep.gradp_growth, eb + slack(eb) - model.gradpF1(x, p).norm(), x, 0, 0, p);
        }
    }

    // (iv) band growth of the p-gradient components
    for (const Vec2& x : xs_band) {
        for (const Vec2& p : ps) {
            const Vec2 gp = model.gradpF1(x, p);
            const double bb = model.c0_bar * p.norm() + model.Cstar_bar;
            update(rep.band_growth, bb + slack(bb) - std::max(std::abs(gp.x), std::abs(gp.y)), x, 0,
                   0, p);
        }
    }
    (void)u01;
    return rep;
}

} // namespace abreu
