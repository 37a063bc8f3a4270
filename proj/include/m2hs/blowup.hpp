#ifndef M2HS_BLOWUP_HPP
#define M2HS_BLOWUP_HPP

#include <optional>

#include "m2hs/m2hs.hpp"

namespace m2hs {

struct BlowupReport {
    bool occurs = false;
    bool reeb_degenerate = false;
    std::vector<double> witnesses_x;       // roots of rho0(x) = s
    std::optional<double> first_time;      // earliest t > 0 with min_x |gamma(t,x)| = 0
    // Recorded when occurs = false: lower bound on min phi' over the scan horizon.
    std::optional<double> min_phi_prime_lower_bound;
    double scan_horizon = 0.0;
};

/// Closed-form blow-up prediction: |gamma(t,x)| reaches 0 iff |A(x)| = |B(x)|,
/// which holds iff rho0(x) = s; the vanishing times are the phase-alignment
/// instants t = (pi - arg(A conj(B)) + 2 pi m) / (theta1 - theta2).
/// Reeb-degenerate data (u0' = 0, rho0 constant) never reaches the boundary.
BlowupReport predict_blowup(const EulerianState& state0);

/// First time the trajectory's min phi' dips below tol, refined on the closed
/// form; the refined value is the vanishing instant itself when the dip
/// reaches (numerical) zero. Requires Lagrangian data on the trajectory.
std::optional<double> detect_blowup(const Trajectory& traj, double tol = 1e-6);

/// Global conservative continuation: the exact geodesic evaluated at all
/// requested times, weak times flagged.
Trajectory weak_continue(const EulerianState& state0, const std::vector<double>& times,
                         const GeometricOptions& opts = {});

struct WeakVerifyOptions {
    // Times with min phi' above this are "non-singular": the reconstructed
    // compositions stay spectrally resolved there at n >= 256, so quadrature
    // checks are meaningful. Below it the state is treated as boundary data.
    double nonsingular_phix_min = 0.2;
    double conserve_tol = 1e-6;
    double residual_tol = 1e-3;
    double lipschitz_cap = 0.0;  // 0 = derive from the data scale
};

struct WeakVerification {
    bool h1_identity_ok = false;    // int u_x^2 = 4 c^2 - int rho^2 at checked times
    bool conserve_ok = false;       // c^2 and delta drift below tolerance
    bool time_continuity_ok = false;
    bool bounded_ok = false;        // u_x, rho uniformly bounded in L^2
    bool residual_ok = false;       // equation residual away from singular times
    double max_c2_drift = 0.0;
    double max_delta_drift = 0.0;
    double max_du_rate = 0.0;
    double max_residual_u = 0.0;
    double max_residual_rho = 0.0;
    int nonsingular_count = 0;

    bool passed() const {
        return h1_identity_ok && conserve_ok && time_continuity_ok && bounded_ok && residual_ok;
    }
};

/// Checks the defining properties of a global conservative weak solution on
/// the sampled trajectory; all quantities are re-derived from the stored
/// fields. Almost-every-t is operationalized as the non-singular sample times.
WeakVerification verify_weak(const Trajectory& traj, const WeakVerifyOptions& opts = {});

}  // namespace m2hs

#endif
