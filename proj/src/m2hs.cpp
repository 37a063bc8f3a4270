#include "m2hs/m2hs.hpp"

#include <algorithm>
#include <cmath>

namespace m2hs {

namespace {

void project_zero_mean(RealGridFunction& f) {
    const double m = mean(f);
    for (int j = 0; j < f.size(); ++j) f[j] -= m;
}

double sup_abs(const RealGridFunction& f) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

EulerianState::EulerianState(RealGridFunction u_field, RealGridFunction rho_field, double s)
    : u(std::move(u_field)), rho(std::move(rho_field)), strength(s) {
    if (u.size() != rho.size()) throw SizeMismatchError("u and rho grids differ");
    if (std::abs(mean(u)) >= 1e-10)
        throw InvalidGridError("u must have zero mean, got " + std::to_string(mean(u)));
}

ConservedQuantities conserved(const EulerianState& state) {
    const RealGridFunction ux = differentiate(state.u);
    ConservedQuantities q;
    q.c2 = 0.25 * quadrature(ux * ux + state.rho * state.rho);
    q.delta = 0.5 * quadrature(state.rho);
    q.cos_psi = q.c2 > 0.0 ? q.delta / std::sqrt(q.c2) : 0.0;
    return q;
}

RealGridFunction inertia_inverse(const RealGridFunction& f) {
    const int n = f.size();
    // inner antiderivative int_0^y f = P(y) + m y
    const RampFunction inner = antiderivative0(f);
    // int_0^x P and the constant int_{S^1} int_0^y f
    const RampFunction outer = antiderivative0(inner.periodic);
    const double total = quadrature(inner.periodic) + 0.5 * inner.slope;
    RealGridFunction out(n);
    for (int j = 0; j < n; ++j) {
        const double x = static_cast<double>(j) / n;
        const double int0x = outer.node_value(j) + 0.5 * inner.slope * x * x;
        out[j] = -int0x + x * total;
    }
    return out;
}

EulerianRhs rhs(const EulerianState& state) {
    const int n = state.size();
    const RealGridFunction ux = differentiate(state.u);
    const RealGridFunction g = ux * ux + state.rho * state.rho;
    const RealGridFunction a_inv = inertia_inverse(differentiate(g));
    const RealGridFunction w = antiderivative0(state.rho).periodic;  // int_0^y (rho - mean rho)

    RealGridFunction u_t(n);
    for (int j = 0; j < n; ++j)
        u_t[j] = -state.u[j] * ux[j] - 0.5 * a_inv[j] - state.strength * w[j];
    project_zero_mean(u_t);

    RealGridFunction rho_t = (-1.0) * differentiate(state.u * state.rho);
    for (int j = 0; j < n; ++j) rho_t[j] += state.strength * ux[j];
    return EulerianRhs{std::move(u_t), std::move(rho_t)};
}

namespace {

void record_pde_sample(Trajectory& traj, double t, const EulerianState& s) {
    traj.times.push_back(t);
    traj.states.push_back(s);
    traj.diagnostics.push_back(conserved(s));
}

}  // namespace

Trajectory evolve_pde(const EulerianState& state0, double dt, double t_end,
                      const PdeOptions& opts) {
    if (dt <= 0.0) throw InvalidGridError("dt must be positive");
    if (t_end <= 0.0) throw InvalidGridError("t_end must be positive");
    const int n = state0.size();

    Trajectory traj;
    traj.strength = state0.strength;
    EulerianState s = state0;
    record_pde_sample(traj, 0.0, s);

    const long steps = std::lround(std::ceil(t_end / dt - 1e-12));
    double t = 0.0;
    for (long step = 1; step <= steps; ++step) {
        const double h = std::min(dt, t_end - t);
        const EulerianRhs k1 = rhs(s);
        EulerianState s2(s);
        for (int j = 0; j < n; ++j) {
            s2.u[j] = s.u[j] + 0.5 * h * k1.u_t[j];
            s2.rho[j] = s.rho[j] + 0.5 * h * k1.rho_t[j];
        }
        const EulerianRhs k2 = rhs(s2);
        EulerianState s3(s);
        for (int j = 0; j < n; ++j) {
            s3.u[j] = s.u[j] + 0.5 * h * k2.u_t[j];
            s3.rho[j] = s.rho[j] + 0.5 * h * k2.rho_t[j];
        }
        const EulerianRhs k3 = rhs(s3);
        EulerianState s4(s);
        for (int j = 0; j < n; ++j) {
            s4.u[j] = s.u[j] + h * k3.u_t[j];
            s4.rho[j] = s.rho[j] + h * k3.rho_t[j];
        }
        const EulerianRhs k4 = rhs(s4);
        for (int j = 0; j < n; ++j) {
            s.u[j] += h / 6.0 * (k1.u_t[j] + 2.0 * k2.u_t[j] + 2.0 * k3.u_t[j] + k4.u_t[j]);
            s.rho[j] += h / 6.0 * (k1.rho_t[j] + 2.0 * k2.rho_t[j] + 2.0 * k3.rho_t[j] + k4.rho_t[j]);
        }
        project_zero_mean(s.u);
        t += h;

        const double sup_ux = sup_abs(differentiate(s.u));
        const bool bad = !s.u.all_finite() || !s.rho.all_finite() || sup_ux > opts.blowup_cap;
        if (bad) {
            traj.breakdown = PdeBreakdown{t, sup_ux, sup_ux > opts.blowup_cap
                                                         ? "sup |u_x| exceeded the blow-up cap"
                                                         : "non-finite field values"};
            if (opts.throw_on_blowup)
                throw BlowupEncounteredError(traj.breakdown->reason + " at t = " +
                                             std::to_string(t));
            return traj;
        }
        if (step % opts.output_stride == 0 || step == steps)
            record_pde_sample(traj, t, s);
    }
    return traj;
}

ReducedGeodesic geodesic_from_initial_data(const EulerianState& state0) {
    const int n = state0.size();
    const RealGridFunction ux = differentiate(state0.u);
    ComplexGridFunction f0(n, complex(1.0, 0.0));
    ComplexGridFunction F0(n);
    for (int j = 0; j < n; ++j) F0[j] = 0.5 * complex(ux[j], state0.rho[j]);
    return reduce(TangentVector(SpherePoint(std::move(f0)), std::move(F0)), state0.strength);
}

ReconstructedState reconstruct_eulerian(const ComplexGridFunction& gamma,
                                        const ComplexGridFunction& gamma_t, double strength,
                                        double eps_mono) {
    const int n = gamma.size();
    const RealGridFunction phix = gamma.abs2();

    RealGridFunction num(n);   // tau_t numerator 2 Im(conj(gamma) gamma_t)
    RealGridFunction hdot(n);  // d/dt |gamma|^2 = 2 Re(conj(gamma) gamma_t)
    for (int j = 0; j < n; ++j) {
        const complex prod = std::conj(gamma[j]) * gamma_t[j];
        hdot[j] = 2.0 * prod.real();
        num[j] = 2.0 * prod.imag();
    }

    const RampFunction phi_full = antiderivative0(phix);
    RampFunction phi{1.0, phi_full.periodic};  // slope is 1 up to rounding since ||gamma|| = 1
    const RampFunction phi_t = antiderivative0(hdot);

    const double min_phix = *std::min_element(phix.values().begin(), phix.values().end());
    const bool weak = min_phix <= eps_mono;

    const RampFunction psi = weak ? invert_monotone_weak(phi, eps_mono)
                                  : invert_monotone(phi, eps_mono);

    const TrigInterpolant interp_phi_t(phi_t.periodic);
    const TrigInterpolant interp_num(num);
    const TrigInterpolant interp_den(phix);

    RealGridFunction u(n), rho(n);
    double last_rho = 0.0;
    for (int j = 0; j < n; ++j) {
        const double x = psi.node_value(j);
        u[j] = phi_t.slope * x + interp_phi_t.eval_real(x);
        const double den = interp_den.eval_real(x);
        if (den > 1e-12) {
            rho[j] = interp_num.eval_real(x) / den;
            last_rho = rho[j];
        } else {
            rho[j] = last_rho;  // a.e. definition: carry the left value
        }
    }
    project_zero_mean(u);

    const UnwrappedPhase ph = unwrap_phase_weak(gamma);
    RampFunction tau{2.0 * ph.theta.slope, (2.0 * ph.theta.periodic)};

    ReconstructedState out;
    out.state = EulerianState(std::move(u), std::move(rho), strength);
    out.lagrangian = LagrangianState(phi.periodic, std::move(tau));
    out.min_phi_prime = min_phix;
    out.weak = weak;
    return out;
}

namespace {

// Closed-form gauge drift: the zero-mean Eulerian frame rotates relative to
// the pinned Lagrangian lift with velocity C(t) = int (d/dt phi) phi_x dx,
// a degree-2 trigonometric polynomial in (theta1 - theta2) t.
struct FrameShift {
    double delta = 0.0;
    double c0 = 0.0, a1 = 0.0, b1 = 0.0, a2 = 0.0, b2 = 0.0;
    bool active = false;

    double shift_at(double t) const {
        if (!active) return 0.0;
        const double d = delta;
        return c0 * t + (a1 / d) * std::sin(d * t) + (b1 / d) * (1.0 - std::cos(d * t)) +
               (a2 / (2.0 * d)) * std::sin(2.0 * d * t) +
               (b2 / (2.0 * d)) * (1.0 - std::cos(2.0 * d * t));
    }
};

FrameShift frame_shift_coefficients(const ReducedGeodesic& rg) {
    FrameShift fs;
    if (rg.degenerate()) return fs;  // |gamma| is t-independent, no drift
    const int n = rg.size();
    const auto& A = rg.node_coef_a();
    const auto& B = rg.node_coef_b();
    RealGridFunction p(n), qr(n), qi(n);
    for (int j = 0; j < n; ++j) {
        p[j] = std::norm(A[j]) + std::norm(B[j]);
        const complex q = A[j] * std::conj(B[j]);
        qr[j] = q.real();
        qi[j] = q.imag();
    }
    RealGridFunction Qr(n), Qi(n);
    const RampFunction aqr = antiderivative0(qr), aqi = antiderivative0(qi);
    for (int j = 0; j < n; ++j) {
        Qr[j] = aqr.node_value(j);
        Qi[j] = aqi.node_value(j);
    }
    const double I1 = quadrature(Qr * p), I2 = quadrature(Qi * p);
    const double I3 = quadrature(Qr * qr), I4 = quadrature(Qr * qi);
    const double I5 = quadrature(Qi * qr), I6 = quadrature(Qi * qi);

    fs.delta = rg.theta1() - rg.theta2();
    fs.c0 = -2.0 * fs.delta * (I5 - I4);
    fs.a1 = -2.0 * fs.delta * I2;
    fs.b1 = -2.0 * fs.delta * I1;
    fs.a2 = -2.0 * fs.delta * (I4 + I5);
    fs.b2 = -2.0 * fs.delta * (I3 - I6);
    const double scale = std::abs(fs.c0) + std::abs(fs.a1) + std::abs(fs.b1) +
                         std::abs(fs.a2) + std::abs(fs.b2);
    fs.active = scale > 1e-13;
    return fs;
}

}  // namespace

Trajectory geometric_solve(const EulerianState& state0, const std::vector<double>& times,
                           const GeometricOptions& opts) {
    for (size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw InvalidGridError("trajectory times must be strictly increasing");
    Trajectory traj;
    traj.strength = state0.strength;

    const RealGridFunction ux0 = differentiate(state0.u);
    const double f0_norm = std::sqrt(quadrature(ux0 * ux0 + state0.rho * state0.rho)) * 0.5;
    if (f0_norm <= 0.0) {
        // stationary point of the flow
        const int n = state0.size();
        for (double t : times) {
            traj.times.push_back(t);
            traj.states.push_back(state0);
            traj.diagnostics.push_back(conserved(state0));
            traj.lagrangian.push_back(LagrangianState::identity(n));
            traj.min_phi_prime.push_back(1.0);
            traj.weak_flag.push_back(0);
        }
        return traj;
    }

    const ReducedGeodesic rg = geodesic_from_initial_data(state0);
    const FrameShift fs = opts.frame_shift ? frame_shift_coefficients(rg) : FrameShift{};

    for (double t : times) {
        const GeodesicState gs = rg.eval(t);
        ReconstructedState rec =
            reconstruct_eulerian(gs.point, gs.velocity, state0.strength, opts.eps_mono);
        const double a = fs.shift_at(t);
        if (std::abs(a) > 1e-14) {
            rec.state.u = shift(rec.state.u, a);
            rec.state.rho = shift(rec.state.rho, a);
        }
        traj.times.push_back(t);
        traj.diagnostics.push_back(conserved(rec.state));
        traj.states.push_back(std::move(rec.state));
        traj.lagrangian.push_back(std::move(rec.lagrangian));
        traj.min_phi_prime.push_back(rec.min_phi_prime);
        traj.weak_flag.push_back(rec.weak ? 1 : 0);
    }
    return traj;
}

std::vector<ResidualSample> residual_m2hs(const Trajectory& traj) {
    if (traj.size() < 3)
        throw InvalidGridError("residual_m2hs needs at least 3 consecutive samples");
    std::vector<ResidualSample> out;
    for (int i = 1; i + 1 < traj.size(); ++i) {
        const double dtm = traj.times[i] - traj.times[i - 1];
        const double dtp = traj.times[i + 1] - traj.times[i];
        if (std::abs(dtp - dtm) > 1e-10 * std::max(1.0, std::abs(dtp))) continue;
        const double dt2 = dtp + dtm;

        const EulerianState& s = traj.states[i];
        const RealGridFunction ux = differentiate(s.u);
        const RealGridFunction uxx = differentiate(ux);
        const RealGridFunction ux_next = differentiate(traj.states[i + 1].u);
        const RealGridFunction ux_prev = differentiate(traj.states[i - 1].u);
        const double c2 = traj.diagnostics[i].c2;
        const double delta = traj.diagnostics[i].delta;
        const double s_mag = traj.strength;

        RealGridFunction res_u(s.size());
        for (int j = 0; j < s.size(); ++j) {
            const double utx = (ux_next[j] - ux_prev[j]) / dt2;
            const double target = -0.5 * ux[j] * ux[j] - s.u[j] * uxx[j] +
                                  0.5 * s.rho[j] * s.rho[j] -
                                  (s_mag * s.rho[j] + 2.0 * (c2 - s_mag * delta));
            res_u[j] = utx - target;
        }

        const RealGridFunction flux = differentiate(s.u * s.rho);
        RealGridFunction res_rho(s.size());
        for (int j = 0; j < s.size(); ++j) {
            const double rho_t = (traj.states[i + 1].rho[j] - traj.states[i - 1].rho[j]) / dt2;
            res_rho[j] = rho_t + flux[j] - s_mag * ux[j];
        }
        out.push_back(ResidualSample{traj.times[i], l2_norm(res_u), l2_norm(res_rho)});
    }
    return out;
}

}  // namespace m2hs
