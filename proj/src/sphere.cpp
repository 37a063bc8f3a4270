#include "m2hs/sphere.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace m2hs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kUnitTol = 1e-10;

complex inner(const ComplexGridFunction& f, const ComplexGridFunction& g) {
    return hermitian_inner(f, g);
}

}  // namespace

SpherePoint::SpherePoint(ComplexGridFunction f) : value(std::move(f)) {
    const double nrm = l2_norm(value);
    if (std::abs(nrm - 1.0) >= kUnitTol)
        throw InvalidGridError("sphere point has ||f|| = " + std::to_string(nrm));
}

SpherePoint SpherePoint::normalized(const ComplexGridFunction& f) {
    const double nrm = l2_norm(f);
    if (nrm <= 0.0) throw InvalidGridError("cannot normalize the zero function");
    return SpherePoint((1.0 / nrm) * f);
}

TangentVector::TangentVector(SpherePoint f, ComplexGridFunction F)
    : base(std::move(f)), dir(std::move(F)) {
    const double t = inner(base.value, dir).real();
    if (std::abs(t) >= kUnitTol)
        throw InvalidGridError("not tangent: Re<f,F> = " + std::to_string(t));
}

TangentVector TangentVector::projected(SpherePoint f, const ComplexGridFunction& F) {
    const double t = inner(f.value, F).real();
    return TangentVector(std::move(f), F - complex(t, 0.0) * f.value);
}

double contact_form(const TangentVector& v) {
    return 0.5 * inner(complex(0.0, 1.0) * v.base.value, v.dir).real();
}

TangentVector project_contact(const TangentVector& v) {
    const ComplexGridFunction iff = complex(0.0, 1.0) * v.base.value;
    const double a = inner(iff, v.dir).real();
    return TangentVector(v.base, v.dir - complex(a, 0.0) * iff);
}

TangentVector lorentz_force(const TangentVector& v) {
    TangentVector p = project_contact(v);
    return TangentVector(v.base, complex(0.0, 1.0) * p.dir);
}

ReducedGeodesic reduce(const TangentVector& v, double strength) {
    ReducedGeodesic rg;
    const ComplexGridFunction& f = v.base.value;
    const ComplexGridFunction& F = v.dir;

    const double speed = l2_norm(F);
    if (speed <= 0.0) throw ZeroVelocityError("reduce: ||F|| = 0");

    rg.e1_ = f;
    const complex f_dot_F = inner(f, F);
    ComplexGridFunction perp = F - f_dot_F * f;
    const double perp_norm = l2_norm(perp);
    if (perp_norm >= 1e-10) rg.e2_ = (1.0 / perp_norm) * perp;

    rg.a0_ = {complex(1.0, 0.0), complex(0.0, 0.0)};
    rg.b0_ = {f_dot_F, rg.e2_ ? complex(perp_norm, 0.0) : complex(0.0, 0.0)};

    rg.strength_ = strength;
    rg.speed_ = speed;
    rg.ctilde_ = inner(complex(0.0, 1.0) * f, F).real();

    const double s = strength;
    const double disc = s * s + 4.0 * (speed * speed - s * rg.ctilde_);
    rg.degenerate_ = disc < ReducedGeodesic::kDegenerateDiscriminant;
    if (rg.degenerate_) {
        rg.theta1_ = rg.theta2_ = 0.5 * s;
        // on-sphere data with vanishing discriminant is exactly Reeb-aligned,
        // so gamma(t) = e^{i theta t} gamma(0)
        rg.coefA_ = rg.a0_;
        rg.coefB_ = {complex(0.0, 0.0), complex(0.0, 0.0)};
    } else {
        const double root = std::sqrt(std::max(0.0, disc));
        rg.theta1_ = 0.5 * (s + root);
        rg.theta2_ = 0.5 * (s - root);
        const complex i(0.0, 1.0);
        for (int c = 0; c < 2; ++c) {
            rg.coefA_[c] = (rg.theta2_ * rg.a0_[c] + i * rg.b0_[c]) / (rg.theta2_ - rg.theta1_);
            rg.coefB_[c] = (rg.theta1_ * rg.a0_[c] + i * rg.b0_[c]) / (rg.theta1_ - rg.theta2_);
        }
    }

    const int n = f.size();
    rg.nodeA_.resize(n);
    rg.nodeB_.resize(n);
    for (int j = 0; j < n; ++j) {
        const complex e2j = rg.e2_ ? (*rg.e2_)[j] : complex(0.0, 0.0);
        rg.nodeA_[j] = rg.coefA_[0] * f[j] + rg.coefA_[1] * e2j;
        rg.nodeB_[j] = rg.coefB_[0] * f[j] + rg.coefB_[1] * e2j;
    }
    rg.specA_ = rg.nodeA_;
    fft(rg.specA_, false);
    for (auto& c : rg.specA_) c /= static_cast<double>(n);
    rg.specB_ = rg.nodeB_;
    fft(rg.specB_, false);
    for (auto& c : rg.specB_) c /= static_cast<double>(n);
    return rg;
}

std::array<complex, 2> ReducedGeodesic::coords(double t) const {
    const complex u1 = std::polar(1.0, theta1_ * t);
    const complex u2 = std::polar(1.0, theta2_ * t);
    return {coefA_[0] * u1 + coefB_[0] * u2, coefA_[1] * u1 + coefB_[1] * u2};
}

std::array<complex, 2> ReducedGeodesic::coords_velocity(double t) const {
    const complex d1 = complex(0.0, theta1_) * std::polar(1.0, theta1_ * t);
    const complex d2 = complex(0.0, theta2_) * std::polar(1.0, theta2_ * t);
    return {coefA_[0] * d1 + coefB_[0] * d2, coefA_[1] * d1 + coefB_[1] * d2};
}

std::array<complex, 2> ReducedGeodesic::coords_accel(double t) const {
    const complex d1 = complex(-theta1_ * theta1_, 0.0) * std::polar(1.0, theta1_ * t);
    const complex d2 = complex(-theta2_ * theta2_, 0.0) * std::polar(1.0, theta2_ * t);
    return {coefA_[0] * d1 + coefB_[0] * d2, coefA_[1] * d1 + coefB_[1] * d2};
}

ComplexGridFunction ReducedGeodesic::from_coords(const std::array<complex, 2>& z) const {
    ComplexGridFunction g = z[0] * e1_;
    if (e2_) g = g + z[1] * (*e2_);
    return g;
}

GeodesicState ReducedGeodesic::eval(double t) const {
    return GeodesicState{from_coords(coords(t)), from_coords(coords_velocity(t))};
}

double ReducedGeodesic::modulus2_at(int node, double t) const {
    const complex u = std::polar(1.0, (theta1_ - theta2_) * t);
    return std::norm(nodeA_[node] * u + nodeB_[node]);
}

std::pair<complex, complex> ReducedGeodesic::closed_form_pair(double x) const {
    const int n = size();
    complex a{0.0, 0.0}, b{0.0, 0.0};
    const complex w = std::polar(1.0, kTwoPi * x);
    complex wk{1.0, 0.0};
    for (int k = 0; k < n / 2; ++k) {
        a += specA_[k] * wk;
        b += specB_[k] * wk;
        wk *= w;
    }
    const complex winv = std::conj(w);
    complex wneg = winv;
    for (int k = 1; k < n / 2; ++k) {
        a += specA_[n - k] * wneg;
        b += specB_[n - k] * wneg;
        wneg *= winv;
    }
    const double cn = std::cos(std::numbers::pi * n * x);
    a += specA_[n / 2] * cn;
    b += specB_[n / 2] * cn;
    return {a, b};
}

double ReducedGeodesic::modulus2_interp(double x, double t) const {
    const auto [a, b] = closed_form_pair(x);
    const complex u = std::polar(1.0, (theta1_ - theta2_) * t);
    return std::norm(a * u + b);
}

GeodesicState geodesic_eval(const ReducedGeodesic& rg, double t) { return rg.eval(t); }

double ode_residual(const ReducedGeodesic& rg, double t) {
    const auto z = rg.coords(t);
    const auto dz = rg.coords_velocity(t);
    const auto ddz = rg.coords_accel(t);
    const double c = rg.speed() * rg.speed() - rg.strength() * rg.ctilde();
    const complex is(0.0, rg.strength());
    double r2 = 0.0;
    for (int k = 0; k < 2; ++k) {
        const complex rk = ddz[k] - is * dz[k] + c * z[k];
        r2 += std::norm(rk);
    }
    return std::sqrt(r2);
}

double check_totally_magnetic(const ReducedGeodesic& rg, int samples, std::uint64_t seed) {
    if (!rg.e2()) throw InvalidGridError("check_totally_magnetic needs a 2-dimensional frame");
    std::mt19937_64 gen(seed);
    auto uniform = [&gen]() { return std::ldexp(static_cast<double>(gen()), -64); };

    const ComplexGridFunction& e1 = rg.e1();
    const ComplexGridFunction& e2 = *rg.e2();
    const complex i(0.0, 1.0);

    double max_defect = 0.0;
    for (int s = 0; s < samples; ++s) {
        // random point q of N = S(span{e1,e2}) and random tangent w at q
        std::array<complex, 2> qc, wc;
        for (int c = 0; c < 2; ++c) {
            qc[c] = complex(uniform() - 0.5, uniform() - 0.5);
            wc[c] = complex(uniform() - 0.5, uniform() - 0.5);
        }
        double qn = std::sqrt(std::norm(qc[0]) + std::norm(qc[1]));
        if (qn < 1e-3) continue;
        qc[0] /= qn;
        qc[1] /= qn;
        const ComplexGridFunction q = qc[0] * e1 + qc[1] * e2;
        ComplexGridFunction w = wc[0] * e1 + wc[1] * e2;
        const double tang = hermitian_inner(q, w).real();
        w = w - complex(tang, 0.0) * q;

        const TangentVector yw = lorentz_force(TangentVector(SpherePoint(q), w));

        // distance of Y(w) to T_q N: leak out of span + radial component in span
        const complex c1 = hermitian_inner(e1, yw.dir);
        const complex c2 = hermitian_inner(e2, yw.dir);
        const ComplexGridFunction in_span = c1 * e1 + c2 * e2;
        const double off_span = l2_norm(yw.dir - in_span);
        const double radial = hermitian_inner(q, yw.dir).real();
        max_defect = std::max(max_defect, std::hypot(off_span, radial));
    }
    return max_defect;
}

int moment_map_family_size(int max_mode) { return 1 + 2 * max_mode; }

double moment_map(const TangentVector& v, int k, double strength, int max_mode) {
    if (k < 0 || k >= moment_map_family_size(max_mode))
        throw std::out_of_range("moment_map: unknown generator index " + std::to_string(k));
    const int n = v.base.size();
    RealGridFunction g(n);
    if (k == 0) {
        for (int j = 0; j < n; ++j) g[j] = 1.0;
    } else {
        const int mode = (k + 1) / 2;
        const bool is_cos = (k % 2) == 1;
        for (int j = 0; j < n; ++j) {
            const double x = kTwoPi * mode * (static_cast<double>(j) / n);
            g[j] = is_cos ? std::cos(x) : std::sin(x);
        }
    }
    const complex i(0.0, 1.0);
    ComplexGridFunction Af(n);
    for (int j = 0; j < n; ++j) Af[j] = i * g[j] * v.base.value[j];
    const double kinetic = hermitian_inner(Af, v.dir).real();
    const double alpha_term = 0.5 * hermitian_inner(i * v.base.value, Af).real();
    return kinetic - strength * alpha_term;
}

namespace {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};
Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double c, Vec3 a) { return {c * a.x, c * a.y, c * a.z}; }
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm3(Vec3 a) { return std::sqrt(dot(a, a)); }

// Hopf map scaled to the radius-1/2 sphere (Fubini-Study normalization).
Vec3 hopf_point(const std::array<complex, 2>& z) {
    const complex c = std::conj(z[0]) * z[1];
    return {c.real(), c.imag(), 0.5 * (std::norm(z[0]) - std::norm(z[1]))};
}

}  // namespace

HopfCurvature hopf_curvature_check(const ReducedGeodesic& rg, double t0, double h) {
    if (!rg.e2()) throw InvalidGridError("hopf_curvature_check needs a 2-dimensional frame");
    const double cospsi = rg.ctilde() / rg.speed();
    const double sinpsi = std::sqrt(std::max(0.0, 1.0 - cospsi * cospsi));
    if (sinpsi < 1e-6) throw DegenerateAngleError("sin(psi) too small for the Hopf projection");

    HopfCurvature out;
    out.predicted = (2.0 * cospsi - rg.strength()) / sinpsi;

    const Vec3 pm = hopf_point(rg.coords(t0 - h));
    const Vec3 p0 = hopf_point(rg.coords(t0));
    const Vec3 pp = hopf_point(rg.coords(t0 + h));

    const Vec3 vel = (0.5 / h) * (pp - pm);
    const Vec3 acc = (1.0 / (h * h)) * (pp - 2.0 * p0 + pm);

    const double sigma = norm3(vel);
    const Vec3 tangent = (1.0 / sigma) * vel;
    const double sigma_dot = dot(tangent, acc);
    // d^2P/ds^2 after unit-speed reparametrization
    const Vec3 acc_s = (1.0 / (sigma * sigma)) * (acc - sigma_dot * tangent);
    const Vec3 normal = 2.0 * p0;  // |P| = 1/2
    out.measured = dot(acc_s, cross(tangent, normal));
    return out;
}

MinModulus min_modulus(const ReducedGeodesic& rg, double t) {
    const int n = rg.size();
    std::vector<double> m2(static_cast<size_t>(n));
    double best_val = std::numeric_limits<double>::infinity();
    int best = 0;
    for (int j = 0; j < n; ++j) {
        m2[j] = rg.modulus2_at(j, t);
        if (m2[j] < best_val) {
            best_val = m2[j];
            best = j;
        }
    }

    // A boundary-touching notch can be narrower than a grid cell, so its node
    // values need not be the global grid minimum. Refine every competitive
    // local minimum (values within 6x of the best in modulus).
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    const double admit = best_val * 36.0 + 1e-300;
    double out_val = best_val;
    double out_x = static_cast<double>(best) / n;
    for (int j = 0; j < n; ++j) {
        const bool local_min = m2[j] <= m2[(j + n - 1) % n] && m2[j] <= m2[(j + 1) % n];
        if (!local_min || m2[j] > admit) continue;
        double lo = (j - 1.0) / n, hi = (j + 1.0) / n;
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = rg.modulus2_interp(x1, t), f2 = rg.modulus2_interp(x2, t);
        for (int it = 0; it < 60; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = rg.modulus2_interp(x1, t);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = rg.modulus2_interp(x2, t);
            }
        }
        const double xm = 0.5 * (lo + hi);
        const double fm = rg.modulus2_interp(xm, t);
        if (fm < out_val) {
            out_val = fm;
            out_x = xm;
        }
    }
    out_x -= std::floor(out_x);
    return MinModulus{std::sqrt(std::max(0.0, out_val)), out_x};
}

}  // namespace m2hs
