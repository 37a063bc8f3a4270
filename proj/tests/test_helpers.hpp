#ifndef M2HS_TEST_HELPERS_HPP
#define M2HS_TEST_HELPERS_HPP

#include <cmath>
#include <numbers>

#include "m2hs/grid.hpp"
#include "m2hs/madelung.hpp"
#include "m2hs/random.hpp"
#include "m2hs/sphere.hpp"

namespace m2hs::testing {

inline constexpr double kPi = std::numbers::pi;

/// Random real band-limited field: sum of modes 1..max_mode with decaying
/// random amplitudes, plus an optional mean.
inline RealGridFunction random_band_limited(int n, int max_mode, double amp, Rng& rng,
                                            double mean_value = 0.0) {
    RealGridFunction f(n, mean_value);
    for (int m = 1; m <= max_mode; ++m) {
        const double a = amp * rng.normal() / (1.0 + m * m);
        const double b = amp * rng.normal() / (1.0 + m * m);
        for (int j = 0; j < n; ++j) {
            const double x = 2.0 * kPi * m * (static_cast<double>(j) / n);
            f[j] += a * std::sin(x) + b * std::cos(x);
        }
    }
    return f;
}

inline ComplexGridFunction random_complex_band_limited(int n, int max_mode, double amp, Rng& rng) {
    return ComplexGridFunction(random_band_limited(n, max_mode, amp, rng),
                               random_band_limited(n, max_mode, amp, rng));
}

inline SpherePoint random_sphere_point(int n, Rng& rng, int max_mode = 4) {
    ComplexGridFunction f = random_complex_band_limited(n, max_mode, 0.7, rng);
    for (int j = 0; j < n; ++j) f[j] += complex(1.0, 0.0);  // keep away from zero-ish
    return SpherePoint::normalized(f);
}

inline TangentVector random_tangent(const SpherePoint& base, Rng& rng, int max_mode = 4,
                                    double amp = 1.0) {
    ComplexGridFunction F = random_complex_band_limited(base.size(), max_mode, amp, rng);
    return TangentVector::projected(base, F);
}

/// Random strictly increasing circle map: phi' = 1 + band-limited, kept > margin.
inline RealGridFunction random_phi_remainder(int n, Rng& rng, double margin = 0.25,
                                             int max_mode = 3) {
    RealGridFunction slope_pert = random_band_limited(n, max_mode, 0.8, rng);
    double sup = 0.0;
    for (double v : slope_pert.values()) sup = std::max(sup, std::abs(v));
    const double scale = sup > 0.0 ? (1.0 - margin) / sup : 0.0;
    for (int j = 0; j < n; ++j) slope_pert[j] *= scale;  // now |pert| <= 1 - margin
    RampFunction anti = antiderivative0(slope_pert);     // slope ~ 0, periodic
    RealGridFunction rem = anti.periodic;
    return rem;
}

inline LagrangianState random_lagrangian_state(int n, Rng& rng, double margin = 0.25) {
    RealGridFunction rem = random_phi_remainder(n, rng, margin);
    RealGridFunction tau = random_band_limited(n, 3, 1.2, rng, rng.uniform(-1.0, 1.0));
    return LagrangianState(std::move(rem), RampFunction{0.0, std::move(tau)});
}

inline GroupTangent random_group_tangent(int n, Rng& rng, double amp = 1.0) {
    RealGridFunction u1 = random_band_limited(n, 3, amp, rng);
    RealGridFunction u2 = random_band_limited(n, 3, amp, rng, rng.uniform(-0.7, 0.7));
    // zero-mean first slot
    const double m = mean(u1);
    for (int j = 0; j < n; ++j) u1[j] -= m;
    return GroupTangent{std::move(u1), std::move(u2)};
}

inline double linf_diff(const RealGridFunction& a, const RealGridFunction& b) {
    double m = 0.0;
    for (int j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

inline double linf_diff(const ComplexGridFunction& a, const ComplexGridFunction& b) {
    double m = 0.0;
    for (int j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

}  // namespace m2hs::testing

#endif
