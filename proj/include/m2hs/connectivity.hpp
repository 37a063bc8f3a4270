#ifndef M2HS_CONNECTIVITY_HPP
#define M2HS_CONNECTIVITY_HPP

#include <optional>
#include <string>

#include "m2hs/madelung.hpp"
#include "m2hs/random.hpp"
#include "m2hs/sphere.hpp"

namespace m2hs {

struct NotClosedError : std::runtime_error {
    explicit NotClosedError(const std::string& what) : std::runtime_error(what) {}
};
struct OffSphereError : std::runtime_error {
    explicit OffSphereError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kManeCriticalValue = 0.125;  // c = (1/2) ||alpha||_inf^2

struct ConnectivityQuery {
    SpherePoint q0;
    SpherePoint q1;
    double k = 0.0;  // prescribed kinetic energy, > 0
};

enum class ConnectCase {
    AboveMane,
    AtManeConnectable,
    AtManeEmpty,
    BelowInside,
    BelowBoundaryIndeterminate,
    BelowEmpty,
};

std::string to_string(ConnectCase c);

struct Classification {
    ConnectCase outcome = ConnectCase::AboveMane;
    complex h{0.0, 0.0};     // <q0, q1>_{L^2}
    double threshold = 0.0;  // sqrt(1 - 8k) when k < 1/8
};

/// The energy trichotomy with c = 1/8; |h| within 1e-9 of the threshold is
/// reported indeterminate (the boundary phases a_k, b_k are not computable).
Classification classify(const ConnectivityQuery& query);

/// classify after mapping through the Madelung transform (weak states allowed).
Classification classify_lagrangian(const LagrangianState& p0, const LagrangianState& p1, double k);

struct ShootOptions {
    double t_max = 48.0 * std::numbers::pi;
    int a_grid = 161;         // samples of the Reeb-component a = ctilde / v
    int t_grid = 3001;        // arrival-time samples
    int refine_starts = 16;
    int refine_iters = 300;
    double tol_connect = 1e-6;
    int threads = 1;
};

struct ShootingResult {
    bool found = false;
    std::optional<ReducedGeodesic> rg;
    double arrival_time = 0.0;
    double residual = 0.0;  // ||gamma(T) - q1||; the floor over the budget when not found
    long evaluations = 0;
};

/// Constructive counterpart of the trichotomy: searches energy-k geodesics of
/// the unit-strength system inside S(span_C{q0, q1}). The initial velocity is
/// v (a i q0 + b e2 + c i e2); the e2-phase is optimized in closed form, so the
/// search runs over (a, T) and the best candidates are polished by
/// Nelder-Mead. Colinear pairs are matched by Reeb-type phase rotation.
ShootingResult shoot(const ConnectivityQuery& query, const ShootOptions& opts = {});

/// Closed curve on the sphere sampled at m uniform times t_j = j T / m
/// (implicit wrap; node m equals node 0).
struct SphereLoop {
    std::vector<ComplexGridFunction> nodes;
    double period = 0.0;

    /// Builds from samples that include the closing endpoint; checks
    /// ||last - first|| < 1e-8 and drops the duplicate.
    static SphereLoop from_samples(std::vector<ComplexGridFunction> samples, double period);
};

/// Free-period action S_{L+k} = sum dt (|F|^2/2 - alpha(F) + k) with
/// centered-difference velocities projected to the tangent spaces.
/// Throws OffSphereError when a node leaves the sphere by more than 1e-8.
double mane_action(const SphereLoop& loop, double k);

/// The witness loop gamma(t, x) = e^{2 pi i x} e^{i t/2}, T = 4 pi, whose
/// action is 4 pi (k - 1/8) < 0; requires k < 1/8.
SphereLoop mane_witness(double k, int n, int time_nodes = 512);

/// Random band-limited loop on the sphere (pointwise-normalized in t).
SphereLoop random_sphere_loop(int n, int time_nodes, double period, Rng& rng, int x_modes = 3,
                              int t_modes = 3);

}  // namespace m2hs

#endif
