#include "m2hs/madelung.hpp"

#include <algorithm>
#include <cmath>

namespace m2hs {

LagrangianState::LagrangianState(RealGridFunction phi_rem, RampFunction tau_field)
    : phi_remainder(std::move(phi_rem)), tau(std::move(tau_field)) {
    if (std::abs(phi_remainder[0]) > 1e-10)
        throw InvalidGridError("phi(0) must be 0, remainder(0) = " +
                               std::to_string(phi_remainder[0]));
    if (tau.size() != phi_remainder.size())
        throw SizeMismatchError("phi and tau grids differ");
    // weak regime allows flats but never decreasing maps
    const double floor = min_phi_prime();
    if (floor < -1e-10)
        throw NonMonotoneError("phi must be nondecreasing, min phi' = " + std::to_string(floor));
}

LagrangianState LagrangianState::identity(int n) {
    return LagrangianState(RealGridFunction(n), RampFunction{0.0, RealGridFunction(n)});
}

RealGridFunction LagrangianState::phi_prime() const {
    RealGridFunction d = differentiate(phi_remainder);
    for (int j = 0; j < d.size(); ++j) d[j] += 1.0;
    return d;
}

long LagrangianState::tau_winding() const {
    return std::lround(tau.slope / (4.0 * std::numbers::pi));
}

double LagrangianState::min_phi_prime() const {
    const RealGridFunction d = phi_prime();
    return *std::min_element(d.values().begin(), d.values().end());
}

SpherePoint madelung(const LagrangianState& state) {
    const int n = state.size();
    const RealGridFunction dphi = state.phi_prime();
    ComplexGridFunction f(n);
    for (int j = 0; j < n; ++j) {
        const double amp = std::sqrt(std::max(0.0, dphi[j]));
        f[j] = std::polar(amp, 0.5 * state.tau.node_value(j));
    }
    // int phi' = 1 makes ||f|| = 1 up to quadrature rounding
    return SpherePoint::normalized(f);
}

TangentVector madelung_derivative(const TangentLagrangian& v, double eps_mono) {
    const LagrangianState& st = v.base;
    const int n = st.size();
    const RealGridFunction dphi = st.phi_prime();
    const double min_dphi = *std::min_element(dphi.values().begin(), dphi.values().end());
    if (min_dphi <= eps_mono)
        throw NonMonotoneError("madelung_derivative requires the strict regime");

    const RealGridFunction du1 = differentiate(v.vec.u1);
    ComplexGridFunction F(n);
    for (int j = 0; j < n; ++j) {
        const complex interior(du1[j], v.vec.u2[j] * dphi[j]);
        F[j] = interior / (2.0 * std::sqrt(dphi[j])) * std::polar(1.0, 0.5 * st.tau.node_value(j));
    }
    return TangentVector(madelung(st), std::move(F));
}

LagrangianState madelung_inverse(const SpherePoint& f, bool strict, double eps_zero) {
    const RampFunction phi = antiderivative0(f.value.abs2());
    // ||f|| = 1 gives slope 1 up to quadrature rounding
    RealGridFunction rem = phi.periodic;
    const UnwrappedPhase ph =
        strict ? unwrap_phase(f.value, eps_zero) : unwrap_phase_weak(f.value, eps_zero);
    RampFunction tau{2.0 * ph.theta.slope, RealGridFunction(rem.size())};
    for (int j = 0; j < rem.size(); ++j) tau.periodic[j] = 2.0 * ph.theta.periodic[j];
    return LagrangianState(std::move(rem), std::move(tau));
}

double hdot_metric(const LagrangianState& state, const GroupTangent& u, const GroupTangent& v,
                   double eps_mono) {
    const RealGridFunction dphi = state.phi_prime();
    const double min_dphi = *std::min_element(dphi.values().begin(), dphi.values().end());
    if (min_dphi <= eps_mono) throw NonMonotoneError("hdot_metric requires the strict regime");
    const RealGridFunction du = differentiate(u.u1);
    const RealGridFunction dv = differentiate(v.u1);
    double s = 0.0;
    const int n = state.size();
    for (int j = 0; j < n; ++j) s += du[j] * dv[j] / dphi[j] + u.u2[j] * v.u2[j] * dphi[j];
    return 0.25 * s / n;
}

double pullback_contact(const LagrangianState& state, const GroupTangent& u) {
    return -0.5 * quadrature(u.u2 * state.phi_prime());
}

GroupTangent g_contact_projection(const LagrangianState& state, const GroupTangent& u) {
    const double weighted_mean = quadrature(u.u2 * state.phi_prime());
    RealGridFunction u2 = u.u2;
    for (int j = 0; j < u2.size(); ++j) u2[j] -= weighted_mean;
    return GroupTangent{u.u1, std::move(u2)};
}

namespace {

GroupTangent acs_core(const LagrangianState& state, const GroupTangent& u, double eps_mono) {
    const RealGridFunction dphi = state.phi_prime();
    const double min_dphi = *std::min_element(dphi.values().begin(), dphi.values().end());
    if (min_dphi <= eps_mono) throw NonMonotoneError("J requires the strict regime");

    RampFunction first = antiderivative0(u.u2 * dphi);
    RealGridFunction w1 = (-1.0) * first.periodic;  // contact input: slope ~ 0
    const double m = mean(w1);
    for (int j = 0; j < w1.size(); ++j) w1[j] -= m;

    const RealGridFunction du1 = differentiate(u.u1);
    RealGridFunction w2(u.u1.size());
    for (int j = 0; j < w2.size(); ++j) w2[j] = du1[j] / dphi[j];
    return GroupTangent{std::move(w1), std::move(w2)};
}

}  // namespace

GroupTangent g_acs_J(const LagrangianState& state, const GroupTangent& u, double eps_mono) {
    const double alpha = pullback_contact(state, u);
    if (std::abs(alpha) > 1e-10 * std::max(1.0, l2_norm(u.u2)))
        throw NotInContactPlaneError("J is defined on ker of the pulled-back contact form");
    return acs_core(state, u, eps_mono);
}

GroupTangent g_lorentz_force(const LagrangianState& state, const GroupTangent& u,
                             double eps_mono) {
    return acs_core(state, g_contact_projection(state, u), eps_mono);
}

}  // namespace m2hs
