#include <doctest.h>

#include <cmath>

#include "m2hs/connectivity.hpp"
#include "test_helpers.hpp"

using namespace m2hs;
using namespace m2hs::testing;

namespace {

constexpr int kN = 64;

// pair with prescribed |<q0,q1>| = mag and random phase
ConnectivityQuery engineered_pair(int n, double k, double mag, Rng& rng) {
    SpherePoint q0 = random_sphere_point(n, rng);
    ComplexGridFunction raw = random_complex_band_limited(n, 4, 1.0, rng);
    const complex c = hermitian_inner(q0.value, raw);
    ComplexGridFunction perp = raw - c * q0.value;
    const ComplexGridFunction e2 = (1.0 / l2_norm(perp)) * perp;
    const complex phase = std::polar(1.0, rng.uniform(0.0, 2.0 * kPi));
    ComplexGridFunction q1 =
        (mag * phase) * q0.value + complex(std::sqrt(1.0 - mag * mag), 0.0) * e2;
    return ConnectivityQuery{q0, SpherePoint::normalized(q1), k};
}

}  // namespace

TEST_CASE("classify: the energy trichotomy") {
    Rng rng(51);
    // k > 1/8: connectable regardless of the pair
    CHECK(classify(engineered_pair(kN, 0.2, 0.1, rng)).outcome == ConnectCase::AboveMane);

    // k = 1/8: decided by <q0, q1> != 0
    ConnectivityQuery at_mane = engineered_pair(kN, 0.125, 0.0, rng);
    CHECK(classify(at_mane).outcome == ConnectCase::AtManeEmpty);
    CHECK(classify(engineered_pair(kN, 0.125, 0.4, rng)).outcome ==
          ConnectCase::AtManeConnectable);

    // k = 0.1: threshold sqrt(0.2) ~ 0.4472
    Classification inside = classify(engineered_pair(kN, 0.1, 0.9, rng));
    CHECK(inside.outcome == ConnectCase::BelowInside);
    CHECK(inside.threshold == doctest::Approx(std::sqrt(0.2)).epsilon(1e-12));
    CHECK(classify(engineered_pair(kN, 0.1, 0.3, rng)).outcome == ConnectCase::BelowEmpty);
    CHECK(classify(engineered_pair(kN, 0.1, std::sqrt(0.2), rng)).outcome ==
          ConnectCase::BelowBoundaryIndeterminate);

    CHECK_THROWS_AS(classify(engineered_pair(kN, -1.0, 0.5, rng)), InvalidGridError);
}

TEST_CASE("classify is invariant under simultaneous unitary rotation") {
    Rng rng(52);
    ConnectivityQuery q = engineered_pair(kN, 0.1, 0.35, rng);
    const Classification base = classify(q);

    // multiplication by a fixed unimodular function is unitary on L^2
    auto rot = ComplexGridFunction::sample(
        kN, [](double x) { return std::polar(1.0, 2.0 * kPi * x + 0.7); });
    ComplexGridFunction r0(kN), r1(kN);
    for (int j = 0; j < kN; ++j) {
        r0[j] = rot[j] * q.q0.value[j];
        r1[j] = rot[j] * q.q1.value[j];
    }
    const Classification rotated = classify(
        ConnectivityQuery{SpherePoint::normalized(r0), SpherePoint::normalized(r1), q.k});
    CHECK(rotated.outcome == base.outcome);
    CHECK(std::abs(rotated.h - base.h) < 1e-12);
}

TEST_CASE("shoot: supercritical pairs connect") {
    Rng rng(53);
    for (int rep = 0; rep < 4; ++rep) {
        ConnectivityQuery q = engineered_pair(kN, 0.2, rng.uniform(0.05, 0.95), rng);
        const ShootingResult r = shoot(q);
        CHECK(r.found);
        CHECK(r.residual < 1e-6);
        CHECK(r.arrival_time > 0.0);
        // consistency: found implies a connectable classification
        const Classification c = classify(q);
        CHECK((c.outcome == ConnectCase::AboveMane || c.outcome == ConnectCase::BelowInside ||
               c.outcome == ConnectCase::AtManeConnectable));
        // the connecting curve is an energy-k magnetic geodesic through q0
        REQUIRE(r.rg.has_value());
        CHECK(std::abs(0.5 * r.rg->speed() * r.rg->speed() - q.k) < 1e-12);
        CHECK(ode_residual(*r.rg, 0.5 * r.arrival_time) < 1e-9);
        CHECK(l2_norm(r.rg->eval(0.0).point - q.q0.value) < 1e-10);
    }
}

TEST_CASE("shoot: subcritical far pairs report an honest residual floor") {
    Rng rng(54);
    ConnectivityQuery q = engineered_pair(kN, 0.1, 0.3, rng);
    CHECK(classify(q).outcome == ConnectCase::BelowEmpty);
    const ShootingResult r = shoot(q);
    CHECK_FALSE(r.found);
    CHECK(r.residual > 0.05);
    CHECK(r.evaluations > 100000);
}

TEST_CASE("shoot: Reeb-orbit pairs connect by phase rotation") {
    Rng rng(55);
    SpherePoint q0 = random_sphere_point(kN, rng);
    const double t0 = 0.8;
    ComplexGridFunction q1v = std::polar(1.0, 2.0 * t0) * q0.value;
    ConnectivityQuery q{q0, SpherePoint::normalized(q1v), 2.0};  // speed 2 = Reeb speed
    const ShootingResult r = shoot(q);
    REQUIRE(r.found);
    CHECK(r.residual < 1e-9);
    CHECK(r.arrival_time == doctest::Approx(t0).epsilon(1e-10));
    REQUIRE(r.rg.has_value());
    // the connecting geodesic is the Reeb orbit e^{2 i t} q0
    const GeodesicState gs = r.rg->eval(0.4);
    CHECK(linf_diff(gs.point, std::polar(1.0, 0.8) * q0.value) < 1e-9);
}

TEST_CASE("strength-energy dictionary: rescaled geodesics have unit speed") {
    Rng rng(56);
    ConnectivityQuery q = engineered_pair(kN, 0.18, 0.5, rng);
    const ShootingResult r = shoot(q);
    REQUIRE(r.found);
    const double v = std::sqrt(2.0 * q.k);
    const double s = 1.0 / v;  // strength of the unit-speed reparametrization
    CHECK(s == doctest::Approx(1.0 / std::sqrt(2.0 * 0.18)));

    const GeodesicState init = r.rg->eval(0.0);
    const ReducedGeodesic unit_speed =
        reduce(TangentVector(SpherePoint::normalized(init.point), (1.0 / v) * init.velocity), s);
    CHECK(std::abs(unit_speed.speed() - 1.0) < 1e-10);
    for (double t : {0.3, 1.1, 2.9}) {
        CHECK(ode_residual(unit_speed, t) < 1e-9);
        // same curve up to the time rescaling
        CHECK(linf_diff(unit_speed.eval(v * t).point, r.rg->eval(t).point) < 1e-9);
    }
    // s0 = 2 corresponds to k = 1/8
    CHECK(1.0 / std::sqrt(2.0 * kManeCriticalValue) == doctest::Approx(2.0));
}

TEST_CASE("mane_action: witness values") {
    const int n = kN;
    SphereLoop witness = mane_witness(0.1, n);
    CHECK(mane_action(witness, 0.1) == doctest::Approx(-kPi / 10.0).epsilon(1e-9));
    CHECK(std::abs(mane_action(witness, 0.125)) < 1e-9);
    CHECK(mane_action(mane_witness(0.12, n), 0.12) ==
          doctest::Approx(4.0 * kPi * (0.12 - 0.125)).epsilon(1e-7));
    CHECK_THROWS_AS(mane_witness(0.125, n), InvalidGridError);
    CHECK_THROWS_AS(mane_witness(0.2, n), InvalidGridError);
}

TEST_CASE("mane_action: constant loops cost k per unit time") {
    Rng rng(57);
    SpherePoint q = random_sphere_point(kN, rng);
    SphereLoop loop;
    loop.period = 3.0;
    for (int j = 0; j < 64; ++j) loop.nodes.push_back(q.value);
    CHECK(mane_action(loop, 0.37) == doctest::Approx(0.37 * 3.0).epsilon(1e-12));
}

TEST_CASE("mane_action: input validation") {
    SphereLoop bad;
    bad.period = 1.0;
    for (int j = 0; j < 16; ++j)
        bad.nodes.push_back(ComplexGridFunction(kN, complex(1.1, 0.0)));  // off the sphere
    CHECK_THROWS_AS(mane_action(bad, 0.2), OffSphereError);

    std::vector<ComplexGridFunction> samples(10, ComplexGridFunction(kN, complex(1.0, 0.0)));
    samples.push_back(ComplexGridFunction(kN, complex(0.0, 1.0)));  // endpoint far from start
    CHECK_THROWS_AS(SphereLoop::from_samples(samples, 1.0), NotClosedError);
}

TEST_CASE("action certificate at the critical energy") {
    Rng rng(59);
    double min_action = 1e300;
    for (int rep = 0; rep < 100; ++rep) {
        const SphereLoop loop = random_sphere_loop(kN, 96, rng.uniform(0.5, 20.0), rng);
        const double a = mane_action(loop, kManeCriticalValue);
        min_action = std::min(min_action, a);

        // pointwise bound: L + 1/8 >= (1/2)(|F| - 1/2)^2 per node
        const int m = static_cast<int>(loop.nodes.size());
        const double dt = loop.period / m;
        for (int j = 0; j < m; j += 7) {
            const ComplexGridFunction& qn = loop.nodes[j];
            ComplexGridFunction vel = (1.0 / (2.0 * dt)) *
                                      (loop.nodes[(j + 1) % m] - loop.nodes[(j + m - 1) % m]);
            const double radial = hermitian_inner(qn, vel).real();
            vel = vel - complex(radial, 0.0) * qn;
            const double speed = l2_norm(vel);
            const double alpha = 0.5 * hermitian_inner(complex(0.0, 1.0) * qn, vel).real();
            const double lagr = 0.5 * speed * speed - alpha + kManeCriticalValue;
            CHECK(lagr >= 0.5 * (speed - 0.5) * (speed - 0.5) - 1e-12);
            CHECK(lagr >= -1e-12);
        }
    }
    CHECK(min_action >= -1e-8);
}

TEST_CASE("classify_lagrangian goes through the Madelung transform") {
    const int n = kN;
    LagrangianState id = LagrangianState::identity(n);
    Classification c = classify_lagrangian(id, id, 0.05);
    CHECK(std::abs(c.h - complex(1.0, 0.0)) < 1e-12);
    CHECK(c.outcome == ConnectCase::BelowInside);  // |h| = 1 beats every threshold

    // tau = 2 pi: image is -1, h = -1, still connectable
    LagrangianState flipped(RealGridFunction(n),
                            RampFunction{0.0, RealGridFunction(n, 2.0 * kPi)});
    Classification c2 = classify_lagrangian(id, flipped, 0.05);
    CHECK(std::abs(c2.h - complex(-1.0, 0.0)) < 1e-12);
    CHECK(c2.outcome == ConnectCase::BelowInside);

    // orthogonal images at the critical energy: tau jumps by 2 pi over half
    // the circle, so e^{i tau / 2} = +-1 in halves and h = 0
    auto tau_step = RealGridFunction::sample(n, [](double x) {
        return x < 0.5 ? 0.0 : 2.0 * kPi;
    });
    LagrangianState halved(RealGridFunction(n), RampFunction{0.0, tau_step});
    Classification c3 = classify_lagrangian(id, halved, 0.125);
    CHECK(std::abs(c3.h) < 1e-9);
    CHECK(c3.outcome == ConnectCase::AtManeEmpty);
}
