#pragma once

#include "abreu/fd.hpp"
#include "abreu/grid.hpp"

#include <cmath>
#include <random>

namespace abreu::testing {

inline DomainMask unit_mask(int n) {
    GridSpec g(n, n, -1, 1, -1, 1);
    return build_domain({RectShape{-1, 1, -1, 1}, RectShape{-0.5, 0.5, -0.5, 0.5}}, g);
}

inline ScalarField field_of(const GridSpec& g, double (*f)(double, double)) {
    return ScalarField::from_function(g, f);
}

/// Max of a random affine family: discretely convex by construction.
inline ScalarField random_max_affine(const GridSpec& g, std::mt19937_64& rng, int n_planes = 20) {
    std::uniform_real_distribution<double> slope(-3.0, 3.0), offset(-1.0, 1.0);
    std::vector<double> ax(n_planes), ay(n_planes), b(n_planes);
    for (int k = 0; k < n_planes; ++k) {
        ax[k] = slope(rng);
        ay[k] = slope(rng);
        b[k] = offset(rng);
    }
    ScalarField u(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double m = -1e300;
            for (int k = 0; k < n_planes; ++k)
                m = std::max(m, ax[k] * g.x(i) + ay[k] * g.y(j) + b[k]);
            u(i, j) = m;
        }
    return u;
}

/// Shift so the field is <= 0 on the boundary (cone-estimate normalization).
inline void shift_below_boundary(ScalarField& u, const DomainMask& mask) {
    double mb = -1e300;
    for (int j = 0; j < u.grid.ny; ++j)
        for (int i = 0; i < u.grid.nx; ++i)
            if (mask.is_boundary(i, j)) mb = std::max(mb, u(i, j));
    for (double& v : u.v) v -= mb;
}

inline double linf_err(const ScalarField& a, const ScalarField& b, const DomainMask& mask) {
    double m = 0;
    for (int j = 0; j < a.grid.ny; ++j)
        for (int i = 0; i < a.grid.nx; ++i)
            if (mask.in_omega(i, j)) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

} // namespace abreu::testing
