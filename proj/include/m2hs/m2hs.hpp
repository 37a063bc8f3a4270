#ifndef M2HS_M2HS_HPP
#define M2HS_M2HS_HPP

#include <optional>
#include <vector>

#include "m2hs/grid.hpp"
#include "m2hs/madelung.hpp"
#include "m2hs/sphere.hpp"

namespace m2hs {

struct BlowupEncounteredError : std::runtime_error {
    explicit BlowupEncounteredError(const std::string& what) : std::runtime_error(what) {}
};

/// Eulerian unknowns (u, rho) at the identity, with the magnetic strength s.
/// u carries the zero-mean gauge.
struct EulerianState {
    RealGridFunction u;
    RealGridFunction rho;
    double strength = 0.0;

    EulerianState() = default;
    EulerianState(RealGridFunction u_field, RealGridFunction rho_field, double s);
    int size() const { return u.size(); }
};

struct ConservedQuantities {
    double c2 = 0.0;      // (1/4) int u_x^2 + rho^2
    double delta = 0.0;   // (1/2) int rho
    double cos_psi = 0.0; // delta / sqrt(c2), the contact angle cosine
};

ConservedQuantities conserved(const EulerianState& state);

/// A^{-1} f (x) = -int_0^x int_0^y f + x int_{S^1} int_0^y f; A^{-1}f(0) = 0.
RealGridFunction inertia_inverse(const RealGridFunction& f);

struct EulerianRhs {
    RealGridFunction u_t;
    RealGridFunction rho_t;
};

/// u_t = -u u' - (1/2) A^{-1} d_x (u'^2 + rho^2) - s W(rho), projected to zero
/// mean; rho_t = -(u rho)' + s u'. W(rho)(y) = int_0^y (rho - int rho).
EulerianRhs rhs(const EulerianState& state);

struct PdeBreakdown {
    double t = 0.0;
    double sup_ux = 0.0;
    std::string reason;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<EulerianState> states;
    std::vector<ConservedQuantities> diagnostics;
    std::vector<LagrangianState> lagrangian;  // pinned lift; geometric solver only
    std::vector<double> min_phi_prime;
    std::vector<char> weak_flag;
    double strength = 0.0;
    std::optional<PdeBreakdown> breakdown;

    bool has_lagrangian() const { return !lagrangian.empty(); }
    int size() const { return static_cast<int>(times.size()); }
};

struct PdeOptions {
    double blowup_cap = 1e4;  // sup |u_x| beyond which the solver declares breakdown
    int output_stride = 1;
    bool throw_on_blowup = false;
};

/// Fixed-step RK4 method of lines with per-step zero-mean projection of u.
/// On breakdown the partial trajectory is returned with `breakdown` set
/// (or BlowupEncounteredError is thrown when opts.throw_on_blowup).
Trajectory evolve_pde(const EulerianState& state0, double dt, double t_end,
                      const PdeOptions& opts = {});

/// The reduced geodesic of the initial data: f0 = 1, F0 = (u0' + i rho0)/2.
ReducedGeodesic geodesic_from_initial_data(const EulerianState& state0);

struct ReconstructedState {
    EulerianState state;
    LagrangianState lagrangian;
    double min_phi_prime = 0.0;
    bool weak = false;
};

/// Eulerian fields from a sphere snapshot: phi' = |gamma|^2,
/// u = (d/dt phi) o phi^{-1} brought to the zero-mean gauge,
/// rho = tau_t o phi^{-1} (a.e. where |gamma| vanishes). Weak-capable.
ReconstructedState reconstruct_eulerian(const ComplexGridFunction& gamma,
                                        const ComplexGridFunction& gamma_t, double strength,
                                        double eps_mono = kEpsMono);

struct GeometricOptions {
    double eps_mono = kEpsMono;
    // Carry the closed-form frame drift that aligns the zero-mean Eulerian
    // gauge across times (exactly zero for parity-symmetric data).
    bool frame_shift = true;
};

/// Exact solver: Madelung image -> reduced closed form -> Eulerian
/// reconstruction at the requested times. Works through blow-up; weak times
/// are flagged.
Trajectory geometric_solve(const EulerianState& state0, const std::vector<double>& times,
                           const GeometricOptions& opts = {});

struct ResidualSample {
    double t = 0.0;
    double res_u = 0.0;    // L^2 residual of the u_tx equation
    double res_rho = 0.0;  // L^2 residual of rho_t = -(rho u)_x + s u_x
};

/// Centered-in-time equation residuals at interior trajectory times.
/// Throws when fewer than 3 samples are available.
std::vector<ResidualSample> residual_m2hs(const Trajectory& traj);

}  // namespace m2hs

#endif
