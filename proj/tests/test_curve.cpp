#include <doctest.h>

#include <cmath>
#include <random>

#include "binormal/curve.hpp"
#include "binormal/error.hpp"
#include "oracles.hpp"

using namespace binormal;

namespace {

// random admissible data: any T0 on the sphere, G0 adjusted so the
// admissibility product vanishes
std::pair<Vec3, Vec3> random_admissible(std::mt19937_64& rng, double a) {
    std::normal_distribution<double> N(0.0, 1.0);
    Vec3 T0 = Vec3{N(rng), N(rng), N(rng)}.normalized();
    Vec3 G0{N(rng), N(rng), N(rng)};
    // remove the component of (I+A)G0 along T0:  G0 -= c (I+A)^{-1} T0
    double c = dot(apply_I_plus_A(a, G0), T0) / dot(apply_I_plus_A(a, apply_inv_I_plus_A(a, T0)), T0);
    G0 -= c * apply_inv_I_plus_A(a, T0);
    return {G0, T0};
}

} // namespace

TEST_CASE("ode_rhs examples") {
    // straight line along z is stationary for any a
    auto [dG1, dT1] = ode_rhs({0.0, {0, 0, 5}, {0, 0, 1}}, 3.0);
    CHECK(dG1.z == 1.0);
    CHECK(dT1.norm() == 0.0);
    // a=0: dT = 1/2 (0,0,2) x (1,0,0) = (0,1,0)
    auto [dG2, dT2] = ode_rhs({0.0, {0, 0, 2}, {1, 0, 0}}, 0.0);
    CHECK((dG2 - Vec3{1, 0, 0}).norm() == 0.0);
    CHECK((dT2 - Vec3{0, 1, 0}).norm() < 1e-15);
    // a=10: A annihilates e3, same answer
    auto [dG3, dT3] = ode_rhs({0.0, {0, 0, 2}, {1, 0, 0}}, 10.0);
    (void)dG3;
    CHECK((dT3 - Vec3{0, 1, 0}).norm() < 1e-15);
}

TEST_CASE("straight line stays a straight line") {
    CurveTrajectory traj = integrate({0, 0, 0}, {0, 0, 1}, 7.0, 30.0, 1e-10);
    for (double s : {-25.0, -3.0, 0.0, 1.5, 29.0}) {
        CHECK((traj.G(s) - Vec3{0, 0, s}).norm() < 1e-9);
        CHECK(traj.curvature(s) < 1e-10);
    }
    auto [c, tau] = curvature_torsion(traj, 4.0);
    CHECK(c < 1e-10);
    CHECK(!tau.has_value());
}

TEST_CASE("a=0 baseline family: c = c0, tau = s/2") {
    CurveTrajectory traj = integrate({0, 0, 2}, {1, 0, 0}, 0.0, 20.0, 1e-11);
    CHECK(traj.params.c0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(traj.params.alpha == doctest::Approx(-1.0).epsilon(1e-12));
    for (int i = 0; i <= 200; ++i) {
        double s = -20.0 + 40.0 * i / 200.0;
        auto [c, tau] = curvature_torsion(traj, s);
        CHECK(std::abs(c - 1.0) < 1e-8);
        REQUIRE(tau.has_value());
        CHECK(std::abs(*tau) < 1e-6);  // tau - s/2 = 0
        auto [y, h] = compute_yh(traj, s);
        CHECK(std::abs(y) < 1e-8);
        CHECK(std::abs(h) < 1e-8);
    }
}

TEST_CASE("figure-1 parameters: invariant drifts at S_max = 40") {
    CurveTrajectory traj = integrate({0, 0, 2}, {1, 0, 0}, 10.0, 40.0, 1e-11);
    CHECK(traj.drift.tangent_norm <= 1e-8);
    CHECK(traj.drift.first_integral <= 1e-8);
    CHECK(traj.drift.curvature_law <= 1e-8);
    CHECK(traj.drift.energy <= 1e-6);
    CHECK(traj.params.E0 == doctest::Approx(25.0));
}

TEST_CASE("curvature law cross-check at s = 5 (a=10, c0=1)") {
    CurveTrajectory traj = integrate({0, 0, 2}, {1, 0, 0}, 10.0, 20.0, 1e-11);
    double c2 = traj.curvature(5.0);
    c2 *= c2;
    double rhs = -10.0 * traj.T(5.0).z - traj.params.alpha;
    CHECK(std::abs(c2 - rhs) < 1e-9);
}

TEST_CASE("shift_origin normalizes inadmissible data") {
    // already admissible: unchanged
    ShiftResult r0 = shift_origin({0, 0, 0}, {0, 0, 1}, 0.0);
    CHECK(r0.s0 == 0.0);
    CHECK((r0.G - Vec3{0, 0, 0}).norm() == 0.0);

    for (double a : {0.0, 4.0}) {
        Vec3 G0{2, 0, 2}, T0{1, 0, 0};
        double prod = dot(apply_I_plus_A(a, G0), T0);
        CHECK(prod == doctest::Approx(2.0));
        ShiftResult r = shift_origin(G0, T0, a, 1e-12);
        CHECK(r.s0 == doctest::Approx(2.0));
        CHECK(std::abs(dot(apply_I_plus_A(a, r.G), r.T)) <= 1e-10);
    }
}

TEST_CASE("compute_yh: dual h formulas and system residual") {
    CurveTrajectory traj = integrate({0, 0, 2}, {1, 0, 0}, 10.0, 20.0, 1e-11);
    double E0 = traj.params.E0, alpha = traj.params.alpha;
    for (double s : {-17.0, -3.0, 0.4, 3.0, 11.0}) {
        CHECK(std::abs(traj.h(s) - traj.h_alt(s)) < 1e-8);
        auto [y, h] = compute_yh(traj, s);
        double c2 = traj.Tp(s).norm2();
        double g = 2.0 * E0 - (3.0 * c2 + alpha) * (c2 + alpha) / 2.0;
        // y' = s h + g, with y' both from the closed derivative and from
        // numerical differentiation of the dense output
        CHECK(std::abs(traj.yprime(s) - (s * h + g)) < 1e-6);
        double dd = 1e-5;
        double y_num = (traj.y(s + dd) - traj.y(s - dd)) / (2.0 * dd);
        CHECK(std::abs(y_num - (s * h + g)) < 1e-6);
        // h' = -(s/4) y, with h' = -1/2 (A T).T''
        double hp = -0.5 * dot(apply_A(10.0, traj.T(s)), traj.Tpp(s));
        CHECK(std::abs(hp + 0.25 * s * y) < 1e-6);
    }
}

TEST_CASE("semigroup: restart from an interior state reproduces the flow") {
    CurveTrajectory traj = integrate({0, 0, 2}, {1, 0, 0}, 10.0, 20.0, 1e-11);
    for (double s1 : {-6.0, 2.5}) {
        CurveTrajectory restart = integrate_raw(traj.G(s1), traj.T(s1), 10.0, -10.0, 10.0, 1e-11);
        for (double ds : {-4.0, -0.5, 1.0, 7.0}) {
            CHECK((restart.G(ds) - traj.G(s1 + ds)).norm() < 1e-8);
            CHECK((restart.T(ds) - traj.T(s1 + ds)).norm() < 1e-8);
        }
    }
}

TEST_CASE("adaptive result matches the fixed-step RK4 oracle on |s| <= 2") {
    CurveTrajectory traj = integrate({0, 0, 2}, {1, 0, 0}, 10.0, 2.5, 1e-12);
    oracles::CurveRhs rhs{10.0};
    std::array<double, 6> y0{0, 0, 2, 1, 0, 0};
    for (double s : {-2.0, -1.3, 0.7, 2.0}) {
        auto y = oracles::rk4(rhs, y0, 0.0, s, 1e-5);
        CHECK((traj.G(s) - Vec3{y[0], y[1], y[2]}).norm() < 1e-9);
        CHECK((traj.T(s) - Vec3{y[3], y[4], y[5]}).norm() < 1e-9);
    }
}

TEST_CASE("random admissible data keeps every invariant (property)") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> Ua(-20.0, 20.0);
    for (int trial = 0; trial < 6; ++trial) {
        double a = Ua(rng);
        auto [G0, T0] = random_admissible(rng, a);
        CurveTrajectory traj = integrate(G0, T0, a, 15.0, 1e-11);
        CHECK(traj.drift.tangent_norm <= 10.0 * 1e-11 + 1e-12);
        CHECK(traj.drift.first_integral <= 100.0 * 1e-11 * (1.0 + 15.0));
        CHECK(traj.drift.curvature_law <= 100.0 * 1e-11 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("integrate validates its preconditions") {
    CHECK_THROWS_AS(integrate({0, 0, 2}, {2, 0, 0}, 1.0, 10.0, 1e-10), Error);   // |T| != 1
    CHECK_THROWS_AS(integrate({1, 0, 2}, {1, 0, 0}, 1.0, 10.0, 1e-10), Error);   // inadmissible
    CHECK_THROWS_AS(integrate({0, 0, 2}, {1, 0, 0}, 1.0, 10.0, 1e-3), Error);    // tol range
    CHECK_THROWS_AS(integrate({0, 0, 2}, {1, 0, 0}, 1.0, -1.0, 1e-10), Error);   // S_max
}
