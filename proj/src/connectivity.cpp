#include "m2hs/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace m2hs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAtManeBand = 1e-12;    // |k - 1/8| below this is "= 1/8"
constexpr double kBoundaryBand = 1e-9;   // | |h| - threshold | band for case (3b)
constexpr double kZeroProductBand = 1e-9;

}  // namespace

std::string to_string(ConnectCase c) {
    switch (c) {
        case ConnectCase::AboveMane: return "AboveMane";
        case ConnectCase::AtManeConnectable: return "AtMane_Connectable";
        case ConnectCase::AtManeEmpty: return "AtMane_Empty";
        case ConnectCase::BelowInside: return "Below_Inside";
        case ConnectCase::BelowBoundaryIndeterminate: return "Below_Boundary_Indeterminate";
        case ConnectCase::BelowEmpty: return "Below_Empty";
    }
    return "?";
}

Classification classify(const ConnectivityQuery& query) {
    if (!(query.k > 0.0)) throw InvalidGridError("classify requires k > 0");
    Classification out;
    out.h = hermitian_inner(query.q0.value, query.q1.value);
    if (std::abs(query.k - kManeCriticalValue) < kAtManeBand) {
        out.outcome = std::abs(out.h) < kZeroProductBand ? ConnectCase::AtManeEmpty
                                                         : ConnectCase::AtManeConnectable;
        return out;
    }
    if (query.k > kManeCriticalValue) {
        out.outcome = ConnectCase::AboveMane;
        return out;
    }
    out.threshold = std::sqrt(1.0 - 8.0 * query.k);
    const double mag = std::abs(out.h);
    if (std::abs(mag - out.threshold) < kBoundaryBand)
        out.outcome = ConnectCase::BelowBoundaryIndeterminate;
    else if (mag > out.threshold)
        out.outcome = ConnectCase::BelowInside;
    else
        out.outcome = ConnectCase::BelowEmpty;
    return out;
}

Classification classify_lagrangian(const LagrangianState& p0, const LagrangianState& p1,
                                   double k) {
    return classify(ConnectivityQuery{madelung(p0), madelung(p1), k});
}

namespace {

struct CoordProblem {
    double v = 0.0;  // speed sqrt(2k)
    complex h{0.0, 0.0};
    double w = 0.0;  // |q1 - h q0|, real > 0 in general position

    // g1(a, T): the q0-coordinate of gamma(T); the e2 magnitude is
    // M(a, T) = 2 v sqrt(1-a^2) |sin(Delta T / 2)| / Delta.
    complex g1(double a, double T) const {
        const double disc = 1.0 + 4.0 * (v * v - v * a);
        if (disc < 1e-14) return std::polar(1.0, v * T);  // Reeb corner
        const double delta = std::sqrt(disc);
        const double th1 = 0.5 * (1.0 + delta), th2 = 0.5 * (1.0 - delta);
        return ((v * a - th2) * std::polar(1.0, th1 * T) +
                (th1 - v * a) * std::polar(1.0, th2 * T)) /
               delta;
    }
    double e2_magnitude(double a, double T) const {
        const double disc = 1.0 + 4.0 * (v * v - v * a);
        if (disc < 1e-14) return 0.0;
        const double delta = std::sqrt(disc);
        return 2.0 * v * std::sqrt(std::max(0.0, 1.0 - a * a)) *
               std::abs(std::sin(0.5 * delta * T)) / delta;
    }
    double residual2(double a, double T) const {
        const complex d = g1(a, T) - h;
        const double m = e2_magnitude(a, T) - w;
        return std::norm(d) + m * m;
    }
};

struct Candidate {
    double a = 0.0, T = 0.0, f = 0.0;
};

// 2-simplex Nelder-Mead on residual2 with a clamped to [-1, 1], T to (0, t_max].
Candidate nelder_mead(const CoordProblem& pb, Candidate start, double t_max, int iters,
                      long& evals) {
    auto clamp_pt = [&](Candidate& c) {
        c.a = std::clamp(c.a, -1.0, 1.0);
        c.T = std::clamp(c.T, 1e-9, t_max);
    };
    auto eval = [&](Candidate& c) {
        clamp_pt(c);
        c.f = pb.residual2(c.a, c.T);
        ++evals;
    };
    std::array<Candidate, 3> simplex{start, start, start};
    simplex[1].a += 0.02;
    simplex[2].T += 0.05;
    for (auto& s : simplex) eval(s);

    for (int it = 0; it < iters; ++it) {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Candidate& x, const Candidate& y) { return x.f < y.f; });
        if (simplex[0].f < 1e-30) break;
        const double ca = 0.5 * (simplex[0].a + simplex[1].a);
        const double cT = 0.5 * (simplex[0].T + simplex[1].T);
        Candidate refl{ca + (ca - simplex[2].a), cT + (cT - simplex[2].T), 0.0};
        eval(refl);
        if (refl.f < simplex[0].f) {
            Candidate exp_{ca + 2.0 * (ca - simplex[2].a), cT + 2.0 * (cT - simplex[2].T), 0.0};
            eval(exp_);
            simplex[2] = exp_.f < refl.f ? exp_ : refl;
        } else if (refl.f < simplex[1].f) {
            simplex[2] = refl;
        } else {
            Candidate con{ca + 0.5 * (simplex[2].a - ca), cT + 0.5 * (simplex[2].T - cT), 0.0};
            eval(con);
            if (con.f < simplex[2].f) {
                simplex[2] = con;
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[i].a = 0.5 * (simplex[i].a + simplex[0].a);
                    simplex[i].T = 0.5 * (simplex[i].T + simplex[0].T);
                    eval(simplex[i]);
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(),
              [](const Candidate& x, const Candidate& y) { return x.f < y.f; });
    return simplex[0];
}

ShootingResult shoot_colinear(const ConnectivityQuery& query, const ShootOptions& opts) {
    // the reduced manifold is the circle e^{i beta} q0; candidates beta = +-v
    ShootingResult out;
    const double v = std::sqrt(2.0 * query.k);
    const complex h = hermitian_inner(query.q0.value, query.q1.value);
    double sigma = std::arg(h);

    double pos = std::fmod(sigma, kTwoPi);
    if (pos <= 0.0) pos += kTwoPi;
    double neg = std::fmod(-sigma, kTwoPi);
    if (neg <= 0.0) neg += kTwoPi;

    const double beta = pos <= neg ? v : -v;
    out.arrival_time = std::min(pos, neg) / v;
    const ComplexGridFunction vel = complex(0.0, beta) * query.q0.value;
    out.rg = reduce(TangentVector(query.q0, vel), 1.0);
    out.residual = l2_norm(out.rg->eval(out.arrival_time).point - query.q1.value);
    out.found = out.residual < opts.tol_connect;
    out.evaluations = 2;
    return out;
}

}  // namespace

ShootingResult shoot(const ConnectivityQuery& query, const ShootOptions& opts) {
    if (!(query.k > 0.0)) throw InvalidGridError("shoot requires k > 0");

    CoordProblem pb;
    pb.v = std::sqrt(2.0 * query.k);
    pb.h = hermitian_inner(query.q0.value, query.q1.value);
    const ComplexGridFunction perp = query.q1.value - pb.h * query.q0.value;
    pb.w = l2_norm(perp);
    if (pb.w < 1e-8) return shoot_colinear(query, opts);
    const ComplexGridFunction e2 = (1.0 / pb.w) * perp;

    ShootingResult out;

    // coarse scan of the (a, T) rectangle
    const int na = std::max(3, opts.a_grid);
    const int nt = std::max(3, opts.t_grid);
    const int nthreads = std::max(1, opts.threads);
    std::vector<Candidate> best_per_slice(static_cast<size_t>(nthreads),
                                          Candidate{0.0, 0.0, 1e300});
    std::vector<long> evals_per_slice(static_cast<size_t>(nthreads), 0);

    auto scan_slice = [&](int slice) {
        Candidate& best = best_per_slice[slice];
        long& evals = evals_per_slice[slice];
        for (int ia = slice; ia < na; ia += nthreads) {
            const double a = -1.0 + 2.0 * ia / (na - 1.0);
            for (int it = 1; it <= nt; ++it) {
                const double T = opts.t_max * it / nt;
                const double f = pb.residual2(a, T);
                ++evals;
                if (f < best.f) best = Candidate{a, T, f};
            }
        }
    };
    if (nthreads == 1) {
        scan_slice(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int s = 0; s < nthreads; ++s) pool.emplace_back(scan_slice, s);
        for (auto& th : pool) th.join();
    }
    Candidate best{0.0, 0.0, 1e300};
    for (int s = 0; s < nthreads; ++s) {
        out.evaluations += evals_per_slice[s];
        if (best_per_slice[s].f < best.f) best = best_per_slice[s];
    }

    // polish from jittered copies of the best coarse cell
    Candidate polished = best;
    const double da = 2.0 / (na - 1.0), dT = opts.t_max / nt;
    for (int r = 0; r < opts.refine_starts; ++r) {
        Candidate start = best;
        start.a += da * (((r % 4) - 1.5) / 1.5);
        start.T += dT * (((r / 4) % 4 - 1.5) / 1.5);
        const Candidate c = nelder_mead(pb, start, opts.t_max, opts.refine_iters, out.evaluations);
        if (c.f < polished.f) polished = c;
        if (polished.f < 1e-18) break;
    }

    // recover the e2 phase and assemble the full-space geodesic
    const double a = polished.a;
    const double T = polished.T;
    const double bc_mag = std::sqrt(std::max(0.0, 1.0 - a * a));
    const double disc = 1.0 + 4.0 * (pb.v * pb.v - pb.v * a);
    complex bc(bc_mag, 0.0);
    if (disc >= 1e-14) {
        const double delta = std::sqrt(disc);
        const double th1 = 0.5 * (1.0 + delta), th2 = 0.5 * (1.0 - delta);
        const complex osc = complex(0.0, 1.0) *
                            (std::polar(1.0, th2 * T) - std::polar(1.0, th1 * T));
        if (std::abs(osc) > 1e-14) bc = bc_mag * std::polar(1.0, -std::arg(osc));
    }
    const ComplexGridFunction vel =
        complex(0.0, pb.v * a) * query.q0.value + (pb.v * bc) * e2;
    out.rg = reduce(TangentVector::projected(query.q0, vel), 1.0);
    out.arrival_time = T;
    out.residual = l2_norm(out.rg->eval(T).point - query.q1.value);
    out.found = out.residual < opts.tol_connect;
    return out;
}

SphereLoop SphereLoop::from_samples(std::vector<ComplexGridFunction> samples, double period) {
    if (samples.size() < 4) throw NotClosedError("a loop needs at least 4 samples");
    const double gap = l2_norm(samples.back() - samples.front());
    if (gap >= 1e-8)
        throw NotClosedError("loop endpoints differ by " + std::to_string(gap));
    samples.pop_back();
    return SphereLoop{std::move(samples), period};
}

double mane_action(const SphereLoop& loop, double k) {
    const int m = static_cast<int>(loop.nodes.size());
    if (m < 3) throw NotClosedError("loop too short");
    const double dt = loop.period / m;
    double action = 0.0;
    for (int j = 0; j < m; ++j) {
        const ComplexGridFunction& q = loop.nodes[j];
        const double off = std::abs(l2_norm(q) - 1.0);
        if (off >= 1e-8)
            throw OffSphereError("loop node " + std::to_string(j) + " off the sphere by " +
                                 std::to_string(off));
        const ComplexGridFunction& nxt = loop.nodes[(j + 1) % m];
        const ComplexGridFunction& prv = loop.nodes[(j + m - 1) % m];
        ComplexGridFunction vel = (1.0 / (2.0 * dt)) * (nxt - prv);
        const double radial = hermitian_inner(q, vel).real();
        vel = vel - complex(radial, 0.0) * q;
        const double speed2 = hermitian_inner(vel, vel).real();
        const double alpha = 0.5 * hermitian_inner(complex(0.0, 1.0) * q, vel).real();
        action += dt * (0.5 * speed2 - alpha + k);
    }
    return action;
}

SphereLoop mane_witness(double k, int n, int time_nodes) {
    if (!(k < kManeCriticalValue))
        throw InvalidGridError("the witness loop certifies only k < 1/8");
    SphereLoop loop;
    loop.period = 4.0 * std::numbers::pi;
    loop.nodes.reserve(time_nodes);
    for (int j = 0; j < time_nodes; ++j) {
        const double t = loop.period * j / time_nodes;
        const complex rot = std::polar(1.0, 0.5 * t);
        loop.nodes.push_back(ComplexGridFunction::sample(
            n, [&](double x) { return rot * std::polar(1.0, kTwoPi * x); }));
    }
    return loop;
}

SphereLoop random_sphere_loop(int n, int time_nodes, double period, Rng& rng, int x_modes,
                              int t_modes) {
    // band-limited random field over (x, t), then pointwise normalization in t
    const int nx = 2 * x_modes + 1, nt = 2 * t_modes + 1;
    std::vector<complex> amp(static_cast<size_t>(nx) * nt);
    for (int ix = 0; ix < nx; ++ix)
        for (int it = 0; it < nt; ++it) {
            const int jx = ix - x_modes, jt = it - t_modes;
            const double scale = (jx == 0 && jt == 0) ? 2.0 : 0.5 / (1.0 + jx * jx + jt * jt);
            amp[ix * nt + it] = scale * complex(rng.normal(), rng.normal());
        }

    // factorized evaluation: node = sum_jx X[jx] * (sum_jt amp e^{2 pi i jt t})
    std::vector<complex> xfac(static_cast<size_t>(nx) * n);
    for (int ix = 0; ix < nx; ++ix)
        for (int j = 0; j < n; ++j)
            xfac[ix * n + j] = std::polar(1.0, kTwoPi * (ix - x_modes) * j / double(n));

    SphereLoop loop;
    loop.period = period;
    loop.nodes.reserve(time_nodes);
    std::vector<complex> tsum(static_cast<size_t>(nx));
    for (int j = 0; j < time_nodes; ++j) {
        const double t = static_cast<double>(j) / time_nodes;  // normalized time
        for (int ix = 0; ix < nx; ++ix) {
            complex g{0.0, 0.0};
            for (int it = 0; it < nt; ++it)
                g += amp[ix * nt + it] * std::polar(1.0, kTwoPi * (it - t_modes) * t);
            tsum[ix] = g;
        }
        ComplexGridFunction node(n);
        for (int ix = 0; ix < nx; ++ix)
            for (int jj = 0; jj < n; ++jj) node[jj] += tsum[ix] * xfac[ix * n + jj];
        const double nrm = l2_norm(node);
        loop.nodes.push_back((1.0 / nrm) * node);
    }
    return loop;
}

}  // namespace m2hs
