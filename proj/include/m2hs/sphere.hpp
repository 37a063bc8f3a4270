#ifndef M2HS_SPHERE_HPP
#define M2HS_SPHERE_HPP

#include <array>
#include <cstdint>
#include <optional>

#include "m2hs/grid.hpp"

namespace m2hs {

struct ZeroVelocityError : std::runtime_error {
    explicit ZeroVelocityError(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateAngleError : std::runtime_error {
    explicit DegenerateAngleError(const std::string& what) : std::runtime_error(what) {}
};

/// Point of the unit sphere in L^2(S^1, C). Construction checks ||f|| = 1.
struct SpherePoint {
    ComplexGridFunction value;

    SpherePoint() = default;
    explicit SpherePoint(ComplexGridFunction f);
    static SpherePoint normalized(const ComplexGridFunction& f);
    int size() const { return value.size(); }
};

/// Tangent vector (f, F) with Re<f, F> = 0. Construction checks tangency.
struct TangentVector {
    SpherePoint base;
    ComplexGridFunction dir;

    TangentVector() = default;
    TangentVector(SpherePoint f, ComplexGridFunction F);
    static TangentVector projected(SpherePoint f, const ComplexGridFunction& F);
};

/// alpha_f(F) = (1/2) Re<i f, F>.
double contact_form(const TangentVector& v);

/// Y_f(F) = i (F - Re<i f, F> i f); 90-degree rotation of the contact projection.
TangentVector lorentz_force(const TangentVector& v);

/// Orthogonal projection onto ker(alpha).
TangentVector project_contact(const TangentVector& v);

struct GeodesicState {
    ComplexGridFunction point;
    ComplexGridFunction velocity;
};

/// Magnetic geodesic of strength s through (gamma(0), gamma'(0)), reduced to
/// the 3-sphere cut out by span_C{gamma(0), gamma'(0)}. Closed form
///   gamma(t) = A e^{i theta1 t} + B e^{i theta2 t},
/// theta_{1,2} roots of theta^2 - s theta - (v^2 - s*ctilde) = 0, theta1 > theta2.
/// Immutable after construction; evaluation at any t is safe concurrently.
class ReducedGeodesic {
  public:
    static constexpr double kDegenerateDiscriminant = 1e-12;

    ReducedGeodesic() = default;

    const ComplexGridFunction& e1() const { return e1_; }
    const std::optional<ComplexGridFunction>& e2() const { return e2_; }
    std::array<complex, 2> a0() const { return a0_; }
    std::array<complex, 2> b0() const { return b0_; }
    std::array<complex, 2> coef_a() const { return coefA_; }
    std::array<complex, 2> coef_b() const { return coefB_; }
    double theta1() const { return theta1_; }
    double theta2() const { return theta2_; }
    double strength() const { return strength_; }
    double speed() const { return speed_; }
    double ctilde() const { return ctilde_; }
    bool degenerate() const { return degenerate_; }
    int size() const { return e1_.size(); }

    /// Frame coordinates z(t) and dz/dt(t) of gamma.
    std::array<complex, 2> coords(double t) const;
    std::array<complex, 2> coords_velocity(double t) const;
    std::array<complex, 2> coords_accel(double t) const;

    GeodesicState eval(double t) const;
    ComplexGridFunction from_coords(const std::array<complex, 2>& z) const;

    /// |gamma(t,x)|^2 = p(x) + 2 Re(q(x) e^{i (theta1-theta2) t}) per node.
    double modulus2_at(int node, double t) const;
    double modulus2_interp(double x, double t) const;

    /// Per-node closed-form coefficients gamma(t,x) = A(x) e^{i theta1 t} + B(x) e^{i theta2 t}.
    const std::vector<complex>& node_coef_a() const { return nodeA_; }
    const std::vector<complex>& node_coef_b() const { return nodeB_; }
    /// (A(x), B(x)) by trigonometric interpolation.
    std::pair<complex, complex> closed_form_pair(double x) const;

    friend ReducedGeodesic reduce(const TangentVector& v, double strength);

  private:
    ComplexGridFunction e1_;
    std::optional<ComplexGridFunction> e2_;
    std::array<complex, 2> a0_{}, b0_{};
    std::array<complex, 2> coefA_{}, coefB_{};
    double theta1_ = 0.0, theta2_ = 0.0;
    double strength_ = 0.0, speed_ = 0.0, ctilde_ = 0.0;
    bool degenerate_ = false;
    // per-node closed-form ingredients A(x), B(x) for modulus scans
    std::vector<complex> nodeA_, nodeB_;
    // cached interpolants for off-node modulus refinement
    std::vector<complex> specA_, specB_;
};

/// Frame + closed-form coefficients from initial data; throws ZeroVelocityError
/// when ||F|| = 0.
ReducedGeodesic reduce(const TangentVector& v, double strength);

GeodesicState geodesic_eval(const ReducedGeodesic& rg, double t);

/// L^2 norm of gamma'' - i s gamma' + (v^2 - s ctilde) gamma from analytic
/// derivatives of the closed form.
double ode_residual(const ReducedGeodesic& rg, double t);

/// Condition 4(b) of the totally-magnetic characterization: the Lorentz force
/// leaves T N invariant for N = S(span_C{e1,e2}). Returns the max defect over
/// random tangent samples.
double check_totally_magnetic(const ReducedGeodesic& rg, int samples, std::uint64_t seed);

/// mu(f,F)[A_k] = Re<A_k f, F> - (s/2) Re<i f, A_k f> with A_k multiplication
/// by i g_k, g_k in {1, cos 2 pi j x, sin 2 pi j x : j <= max_mode}. strength=1
/// reproduces the moment map of the unit-strength system; along a strength-s
/// geodesic the conserved family is the strength-matched one.
double moment_map(const TangentVector& v, int k, double strength = 1.0, int max_mode = 4);
int moment_map_family_size(int max_mode = 4);

struct HopfCurvature {
    double measured = 0.0;
    double predicted = 0.0;  // a_s(psi) = (2 cos psi - s) / sin psi
};

/// Projects the unit-speed geodesic by the Hopf map to the sphere of radius
/// 1/2 and measures the geodesic curvature by finite differences after
/// unit-speed reparametrization. Requires |sin psi| >= 1e-6.
HopfCurvature hopf_curvature_check(const ReducedGeodesic& rg, double t0 = 0.0, double h = 1e-4);

struct MinModulus {
    double value = 0.0;
    double argmin_x = 0.0;
};

/// min_x |gamma(t,x)|, grid scan refined by interpolation near the minimum.
MinModulus min_modulus(const ReducedGeodesic& rg, double t);

}  // namespace m2hs

#endif
