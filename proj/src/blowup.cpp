#include "m2hs/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace m2hs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Refine a sign change of w on [lo, hi] by bisection on the interpolant.
double refine_root(const TrigInterpolant& w, double lo, double hi) {
    double flo = w.eval_real(lo);
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = w.eval_real(mid);
        if ((flo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        }
    }
    return 0.5 * (lo + hi);
}

// Least positive vanishing instant of |A e^{i Delta t} + B| for |A| = |B|.
double vanish_time(complex a, complex b, double delta) {
    double phase = std::numbers::pi - std::arg(a * std::conj(b));
    phase = std::fmod(phase, kTwoPi);
    if (phase <= 1e-15) phase += kTwoPi;
    return phase / delta;
}

}  // namespace

BlowupReport predict_blowup(const EulerianState& state0) {
    BlowupReport report;
    const int n = state0.size();

    // Reeb-degenerate data: F0 = (u0' + i rho0)/2 constant (1-dim complex span)
    const RealGridFunction ux0 = differentiate(state0.u);
    double dev = 0.0, scale = 0.0;
    const double rho_mean = mean(state0.rho);
    for (int j = 0; j < n; ++j) {
        dev = std::max(dev, std::hypot(ux0[j], state0.rho[j] - rho_mean));
        scale = std::max(scale, std::hypot(ux0[j], state0.rho[j]));
    }
    if (dev <= 1e-12 * std::max(1.0, scale)) {
        report.reeb_degenerate = true;
        return report;
    }

    const ReducedGeodesic rg = geodesic_from_initial_data(state0);
    const double delta = rg.theta1() - rg.theta2();

    // witnesses: roots of rho0 - s (sign changes + grazing tangencies)
    const double s = state0.strength;
    RealGridFunction w(n);
    for (int j = 0; j < n; ++j) w[j] = state0.rho[j] - s;
    const TrigInterpolant wi(w);
    for (int j = 0; j < n; ++j) {
        const double wl = w[j], wr = w[(j + 1) % n];
        const double xl = static_cast<double>(j) / n, xr = static_cast<double>(j + 1) / n;
        if (wl == 0.0) {
            report.witnesses_x.push_back(xl);
        } else if ((wl < 0.0) != (wr < 0.0)) {
            report.witnesses_x.push_back(refine_root(wi, xl, xr));
        } else {
            // grazing: interior minimum of w^2 touching zero
            const double wm = wi.eval_real(0.5 * (xl + xr));
            if (std::abs(wm) < std::abs(wl) && std::abs(wm) < std::abs(wr)) {
                const double x0 = golden_min(
                    [&](double x) { const double v = wi.eval_real(x); return v * v; }, xl, xr, 70);
                if (std::abs(wi.eval_real(x0)) < 1e-9) report.witnesses_x.push_back(x0);
            }
        }
    }
    std::sort(report.witnesses_x.begin(), report.witnesses_x.end());

    if (report.witnesses_x.empty()) {
        // dense lower bound on min phi' over three relative periods
        report.scan_horizon = 3.0 * kTwoPi / delta;
        const int nt = 2048;
        double lb = std::numeric_limits<double>::infinity();
        for (int it = 0; it <= nt; ++it) {
            const double t = report.scan_horizon * it / nt;
            double m2 = std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j) m2 = std::min(m2, rg.modulus2_at(j, t));
            lb = std::min(lb, m2);
        }
        report.min_phi_prime_lower_bound = lb;
        return report;
    }

    report.occurs = true;
    double first = std::numeric_limits<double>::infinity();
    for (double x0 : report.witnesses_x) {
        const auto [a, b] = rg.closed_form_pair(x0);
        first = std::min(first, vanish_time(a, b, delta));
    }
    report.first_time = first;
    report.scan_horizon = 3.0 * kTwoPi / delta;
    return report;
}

std::optional<double> detect_blowup(const Trajectory& traj, double tol) {
    if (!traj.has_lagrangian())
        throw InvalidGridError("detect_blowup needs a trajectory with Lagrangian data");

    const ReducedGeodesic rg = geodesic_from_initial_data(traj.states[0]);
    // min phi' = (interpolation-refined min |gamma|)^2; the grid-node minimum
    // alone can hide a notch narrower than a grid cell
    auto phix_min = [&](double t) {
        const MinModulus mm = min_modulus(rg, t);
        return mm.value * mm.value;
    };

    // walk the below-tolerance windows; the earliest one containing an actual
    // boundary touch decides, otherwise report the first crossing of tol
    std::optional<double> first_crossing;
    int scan_from = 0;
    while (true) {
        int hit = -1;
        for (int i = scan_from; i < traj.size(); ++i) {
            if (traj.min_phi_prime[i] < tol) {
                hit = i;
                break;
            }
        }
        if (hit < 0) break;
        int tail = hit;
        while (tail + 1 < traj.size() && traj.min_phi_prime[tail + 1] < tol) ++tail;
        const double lo = hit > 0 ? traj.times[hit - 1] : 0.0;
        const double hi = tail + 1 < traj.size() ? traj.times[tail + 1] : traj.times[tail];

        if (!first_crossing) {
            double a = lo, b = traj.times[hit];
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (a + b);
                if (phix_min(mid) < tol)
                    b = mid;
                else
                    a = mid;
            }
            first_crossing = 0.5 * (a + b);
        }

        const int nscan = 200;
        std::vector<double> vals(static_cast<size_t>(nscan) + 1);
        for (int i = 0; i <= nscan; ++i) vals[i] = phix_min(lo + (hi - lo) * i / nscan);
        for (int i = 1; i < nscan; ++i) {
            if (vals[i] > vals[i - 1] || vals[i] > vals[i + 1]) continue;
            const double t_dip = golden_min(phix_min, lo + (hi - lo) * (i - 1) / nscan,
                                            lo + (hi - lo) * (i + 1) / nscan, 90);
            if (phix_min(t_dip) < 1e-12) return t_dip;
        }
        scan_from = tail + 1;
    }
    return first_crossing;
}

Trajectory weak_continue(const EulerianState& state0, const std::vector<double>& times,
                         const GeometricOptions& opts) {
    return geometric_solve(state0, times, opts);
}

WeakVerification verify_weak(const Trajectory& traj, const WeakVerifyOptions& opts) {
    if (!traj.has_lagrangian())
        throw InvalidGridError("verify_weak needs a trajectory with Lagrangian data");
    if (traj.size() < 3) throw InvalidGridError("verify_weak needs at least 3 samples");

    WeakVerification out;

    // baseline re-derived from the stored fields
    const RealGridFunction ux0 = differentiate(traj.states[0].u);
    const double a0 = quadrature(ux0 * ux0);
    const double b0 = quadrature(traj.states[0].rho * traj.states[0].rho);
    const double c2_0 = 0.25 * (a0 + b0);
    const double delta_0 = 0.5 * quadrature(traj.states[0].rho);
    const double s = traj.strength;

    std::vector<bool> nonsingular(traj.size());
    for (int i = 0; i < traj.size(); ++i)
        nonsingular[i] = traj.min_phi_prime[i] > opts.nonsingular_phix_min;

    out.h1_identity_ok = true;
    out.conserve_ok = true;
    out.bounded_ok = true;
    for (int i = 0; i < traj.size(); ++i) {
        if (!nonsingular[i]) continue;
        ++out.nonsingular_count;
        const RealGridFunction ux = differentiate(traj.states[i].u);
        const double a = quadrature(ux * ux);
        const double b = quadrature(traj.states[i].rho * traj.states[i].rho);
        if (!std::isfinite(a) || std::abs(a - (4.0 * c2_0 - b)) > opts.conserve_tol * (1.0 + 4.0 * c2_0))
            out.h1_identity_ok = false;
        const double c2_drift = std::abs(0.25 * (a + b) - c2_0);
        const double delta_drift = std::abs(0.5 * quadrature(traj.states[i].rho) - delta_0);
        out.max_c2_drift = std::max(out.max_c2_drift, c2_drift);
        out.max_delta_drift = std::max(out.max_delta_drift, delta_drift);
        if (c2_drift > opts.conserve_tol * (1.0 + c2_0) ||
            delta_drift > opts.conserve_tol * (1.0 + std::abs(delta_0)))
            out.conserve_ok = false;
        if (a > 4.0 * c2_0 * (1.0 + 1e-3) + 1e-3 || b > 4.0 * c2_0 * (1.0 + 1e-3) + 1e-3)
            out.bounded_ok = false;
    }

    // absolute continuity proxy: L^2 increments at the sampled rate, across
    // singular times as well (u itself stays continuous through blow-up)
    const double cap = opts.lipschitz_cap > 0.0
                           ? opts.lipschitz_cap
                           : 50.0 * (1.0 + c2_0 + std::abs(s) * (1.0 + std::sqrt(c2_0)));
    out.time_continuity_ok = true;
    for (int i = 0; i + 1 < traj.size(); ++i) {
        const double dt = traj.times[i + 1] - traj.times[i];
        if (dt <= 0.0) continue;
        const double rate = l2_norm(traj.states[i + 1].u - traj.states[i].u) / dt;
        out.max_du_rate = std::max(out.max_du_rate, rate);
        if (rate > cap) out.time_continuity_ok = false;
    }

    // equation residual on interior samples whose full stencil is non-singular
    out.residual_ok = true;
    const auto residuals = residual_m2hs(traj);
    for (const auto& r : residuals) {
        int i = -1;
        for (int k = 1; k + 1 < traj.size(); ++k)
            if (std::abs(traj.times[k] - r.t) < 1e-14) i = k;
        if (i < 0) continue;
        if (!(nonsingular[i - 1] && nonsingular[i] && nonsingular[i + 1])) continue;
        out.max_residual_u = std::max(out.max_residual_u, r.res_u);
        out.max_residual_rho = std::max(out.max_residual_rho, r.res_rho);
        if (r.res_u > opts.residual_tol || r.res_rho > opts.residual_tol) out.residual_ok = false;
    }
    return out;
}

}  // namespace m2hs
