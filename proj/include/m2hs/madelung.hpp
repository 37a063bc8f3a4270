#ifndef M2HS_MADELUNG_HPP
#define M2HS_MADELUNG_HPP

#include "m2hs/grid.hpp"
#include "m2hs/sphere.hpp"

namespace m2hs {

struct NotInContactPlaneError : std::runtime_error {
    explicit NotInContactPlaneError(const std::string& what) : std::runtime_error(what) {}
};

/// Element (phi, tau) of the group (strict regime, min phi' > eps_mono) or of
/// its completion by nondecreasing maps (weak regime). phi(x) = x + remainder,
/// remainder(0) = 0; tau is unwrapped with its 4pi-winding carried by the slope.
struct LagrangianState {
    RealGridFunction phi_remainder;
    RampFunction tau;

    LagrangianState() = default;
    LagrangianState(RealGridFunction phi_rem, RampFunction tau_field);
    static LagrangianState identity(int n);

    int size() const { return phi_remainder.size(); }
    RampFunction phi() const { return RampFunction{1.0, phi_remainder}; }
    RealGridFunction phi_prime() const;
    long tau_winding() const;

    double min_phi_prime() const;
    bool strict(double eps_mono = kEpsMono) const { return min_phi_prime() > eps_mono; }
};

/// Tangent slot pair (U1, U2); U1 constants are gauge (the metric and the
/// magnetic form only see U1').
struct GroupTangent {
    RealGridFunction u1;
    RealGridFunction u2;
};

struct TangentLagrangian {
    LagrangianState base;
    GroupTangent vec;
};

/// Phi(phi, tau) = sqrt(phi') e^{i tau / 2}; defined in the weak regime too.
SpherePoint madelung(const LagrangianState& state);

/// D Phi (U1, U2) = (1 / (2 sqrt(phi'))) (U1' + i U2 phi') e^{i tau / 2}.
/// The phase factor makes the output an honest tangent vector at Phi(state).
TangentVector madelung_derivative(const TangentLagrangian& v, double eps_mono = kEpsMono);

/// phi = int_0^x |f|^2, tau = 2 * unwrapped phase. Strict mode requires
/// min |f| > eps_zero; weak mode fills phases across zeros from the left.
LagrangianState madelung_inverse(const SpherePoint& f, bool strict = true,
                                 double eps_zero = kEpsZero);

/// (1/4) int (U1' V1' / phi' + U2 V2 phi') dx.
double hdot_metric(const LagrangianState& state, const GroupTangent& u, const GroupTangent& v,
                   double eps_mono = kEpsMono);

/// Pulled-back contact form, kept verbatim from the group-side formula:
/// -(1/2) int U2 phi' dx. (Numerically this equals -2 times the sphere-side
/// contact form of the Madelung derivative; the tests pin that factor.)
double pullback_contact(const LagrangianState& state, const GroupTangent& u);

/// (U1, U2 - int U2 phi' dx): orthogonal projection onto the contact plane.
GroupTangent g_contact_projection(const LagrangianState& state, const GroupTangent& u);

/// Almost complex structure on the contact plane:
/// J(U1, U2) = ((y -> -int_0^y U2 phi'), U1'/phi'), first slot mean-normalized
/// so that J o J = -id holds exactly on the zero-mean tangent model.
GroupTangent g_acs_J(const LagrangianState& state, const GroupTangent& u,
                     double eps_mono = kEpsMono);

/// Lorentz force J o pi_contact.
GroupTangent g_lorentz_force(const LagrangianState& state, const GroupTangent& u,
                             double eps_mono = kEpsMono);

}  // namespace m2hs

#endif
