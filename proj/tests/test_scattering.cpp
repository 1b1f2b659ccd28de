#include <doctest.h>

#include <cmath>

#include "binormal/error.hpp"
#include "binormal/nls.hpp"
#include "binormal/scattering.hpp"

using namespace binormal;

TEST_CASE("scatter request derives alpha from the amplitude constraint") {
    ScatterRequest req;
    req.a = 10.0;
    req.B = {std::sqrt(0.75), 0.0, 0.5};
    req.b_amp = std::sqrt(75.0);
    req.a_phase = 0.7;
    CHECK(req.alpha() == doctest::Approx(-6.0).epsilon(1e-14));
    req.validate();

    req.B = {0.0, 0.0, 1.0};
    CHECK_THROWS_AS(req.validate(), Error);  // degenerate axis
    req.B = {std::sqrt(0.75), 0.0, 0.5};
    req.a = 0.0;
    CHECK_THROWS_AS(req.validate(), Error);
}

TEST_CASE("seed_at: K^alpha membership to 1e-12") {
    ScatterRequest req;
    req.a = 10.0;
    req.B = {std::sqrt(0.75), 0.0, 0.5};
    req.b_amp = std::sqrt(75.0);  // chosen so alpha = -6
    req.a_phase = 0.7;
    for (double s0 : {1.0, 7.0, 40.0}) {
        SeedState seed = seed_at(req, s0);
        CHECK(std::abs(seed.T.norm() - 1.0) <= 1e-12);
        CHECK(std::abs(dot(seed.T, seed.Tp)) <= 1e-12);
        // |T'|^2 = -a T3 - alpha = -10*0.5 + 6 = 1 on the shell
        CHECK(std::abs(seed.Tp.norm2() - 1.0) <= 1e-12);
        CHECK(seed.T.z == doctest::Approx(req.B.z).epsilon(1e-14));
        CHECK(std::abs(seed.omega) ==
              doctest::Approx(req.b_amp / (100.0 * 0.75)).epsilon(1e-12));
    }
    // b = 0: omega = 0, T' = 0, alpha = -a B3
    ScatterRequest flat = req;
    flat.b_amp = 0.0;
    SeedState s0 = seed_at(flat, 2.0);
    CHECK(s0.Tp.norm() == 0.0);
    CHECK(flat.alpha() == doctest::Approx(-5.0));
    // the shell |T'|^2 = -a T3 - alpha depends only on T3 = B3
    SeedState sA = seed_at(req, 3.0), sB = seed_at(req, 17.0);
    CHECK(sA.Tp.norm2() == doctest::Approx(sB.Tp.norm2()).epsilon(1e-12));
}

TEST_CASE("reconstruct_G_from_T") {
    // a=0, T0=(1,0,0), Tp0=(0,1,0): G(0) = 2 T0 x Tp0 = (0,0,2)
    CurveTrajectory traj = reconstruct_G_from_T({1, 0, 0}, {0, 1, 0}, 0.0, 20.0, 1e-11);
    CHECK((traj.G(0.0) - Vec3{0, 0, 2}).norm() < 1e-14);
    CHECK(traj.params.c0 == doctest::Approx(1.0));
    // Tp0 = 0: straight line along T0
    CurveTrajectory line = reconstruct_G_from_T({0, 0, 1}, {0, 0, 0}, 3.0, 20.0, 1e-11);
    CHECK(line.G(0.0).norm() < 1e-14);
    CHECK((line.G(5.0) - Vec3{0, 0, 5}).norm() < 1e-9);
    // first-order curve-equation residual along a generic reconstruction
    SeedState seed = seed_at({10.0, {std::sqrt(0.75), 0.0, 0.5}, 0.7, std::sqrt(75.0)}, 1.0);
    CurveTrajectory gen = reconstruct_G_from_T(seed.T, seed.Tp, 10.0, 20.0, 1e-11);
    for (double s : {-15.0, -2.0, 4.0, 18.0}) {
        Vec3 lhs = apply_I_plus_A(10.0, gen.G(s)) - s * gen.T(s)
                   - 2.0 * cross(gen.T(s), gen.Tp(s));
        CHECK(lhs.norm() <= 1e-8);
    }
    // K^alpha shell preservation along the run
    double alpha = gen.params.alpha;
    for (double s : {-19.0, -7.0, 0.3, 9.0, 19.0})
        CHECK(std::abs(gen.Tp(s).norm2() + 10.0 * gen.T(s).z + alpha) <= 1e-8);
}

TEST_CASE("solve_inverse roundtrip against the figure-1 trajectory trace") {
    CurveTrajectory traj = integrate({0, 0, 2}, {1, 0, 0}, 10.0, 40.0, 1e-11);
    TraceAtInfinity tr = extract_trace(traj, 10.0);
    REQUIRE(tr.plus.a_phase.has_value());
    ScatterRequest req{10.0, tr.plus.B, *tr.plus.a_phase, tr.plus.b_amp, End::Plus};
    InverseResult r = solve_inverse(req, {20.0, 40.0, 80.0}, 1e-4);
    // gauge rigidity: the recovered data equal the original, not merely up to
    // a z-rotation
    CHECK((r.T0 - Vec3{1, 0, 0}).norm() <= 1e-3);
    CHECK((r.Tp0 - Vec3{0, 1, 0}).norm() <= 1e-3);
    CHECK(r.diag.B_err <= 1e-3);
    CHECK(r.diag.b_amp_rel_err <= 0.01);
    CHECK(r.diag.a_phase_err <= 0.1);
    for (std::size_t i = 1; i < r.diag.cauchy.size(); ++i)
        CHECK(r.diag.cauchy[i] < r.diag.cauchy[i - 1]);
}

TEST_CASE("solve_inverse on a generic request, both ends") {
    ScatterRequest req;
    req.a = 10.0;
    req.B = {std::sqrt(0.75), 0.0, 0.5};
    req.b_amp = std::sqrt(75.0);
    req.a_phase = 0.7;
    InverseResult rp = solve_inverse(req, {20.0, 40.0, 80.0}, 1e-4);
    CHECK(rp.diag.B_err <= 1e-3);
    CHECK(rp.diag.a_phase_err <= 0.1);
    // shell membership of the recovered data
    double alpha = req.alpha();
    CHECK(std::abs(rp.Tp0.norm2() + req.a * rp.T0.z + alpha) <= 1e-9);

    req.end = End::Minus;
    InverseResult rm = solve_inverse(req, {20.0, 40.0, 80.0}, 1e-4);
    // validate the minus end directly: integrate and extract
    CurveTrajectory back = reconstruct_G_from_T(rm.T0, rm.Tp0, req.a, 25.0, 1e-11);
    TraceAtInfinity tb = extract_trace(back, req.a);
    CHECK(std::abs(tb.minus.B.x - req.B.x) <= 1e-3);
    CHECK(std::abs(tb.minus.B.y - req.B.y) <= 1e-3);
    CHECK(std::abs(tb.minus.B.z - req.B.z) <= 1e-3);
    CHECK(std::abs(tb.minus.b_amp - req.b_amp) <= 0.01 * req.b_amp);
    REQUIRE(tb.minus.a_phase.has_value());
    CHECK(phase_distance(*tb.minus.a_phase, req.a_phase) <= 0.1);
}

TEST_CASE("solve_inverse with b = 0 follows the c -> 0 branch") {
    ScatterRequest req;
    req.a = 1.0;
    req.B = {0.6, 0.0, 0.8};
    req.b_amp = 0.0;
    req.a_phase = 0.0;
    InverseResult r = solve_inverse(req, {20.0, 40.0, 80.0}, 1e-4);
    CHECK(r.diag.B_err <= 1e-3);
    // forward curvature decays toward zero at +infinity
    CurveTrajectory fwd = reconstruct_G_from_T(r.T0, r.Tp0, req.a, 60.0, 1e-11);
    CHECK(fwd.curvature(55.0) < 0.2);
    CHECK(r.diag.validation.plus.b_amp <= 5e-3);
}

TEST_CASE("Cauchy differences halve per schedule doubling") {
    ScatterRequest req;
    req.a = 10.0;
    req.B = {std::sqrt(0.75), 0.0, 0.5};
    req.b_amp = std::sqrt(75.0);
    req.a_phase = 0.7;
    InverseResult r = solve_inverse(req, {20.0, 40.0, 80.0}, 1e-4);
    REQUIRE(r.diag.cauchy.size() == 2);
    CHECK(r.diag.cauchy[1] <= 0.5 * r.diag.cauchy[0]);
}
