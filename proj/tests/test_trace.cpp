#include <doctest.h>

#include <cmath>

#include "binormal/curve.hpp"
#include "binormal/error.hpp"
#include "binormal/trace.hpp"

using namespace binormal;

namespace {
CurveTrajectory fig1(double a, double c0, double S = 40.0, double tol = 1e-11) {
    return integrate({0.0, 0.0, 2.0 * c0}, {1.0, 0.0, 0.0}, a, S, tol);
}
} // namespace

TEST_CASE("evaluate_X identities") {
    CurveTrajectory traj = fig1(10.0, 1.0, 20.0);
    // t = 1 is the profile itself
    for (double s : {-7.0, 0.0, 3.3})
        CHECK((evaluate_X(traj, 10.0, s, 1.0) - traj.G(s)).norm() < 1e-14);
    // direct re-composition at (s,t) = (2, 0.25)
    Vec3 manual = rotate_exp(10.0, 0.5 * std::log(0.25), 0.5 * traj.G(4.0));
    CHECK((evaluate_X(traj, 10.0, 2.0, 0.25) - manual).norm() < 1e-12);
    CHECK_THROWS_AS(evaluate_X(traj, 10.0, 3.0, 0.01), Error);  // |s/sqrt t| > S_max
    // straight line: X(s,t) = (0,0,s) for all t
    CurveTrajectory line = integrate({0, 0, 0}, {0, 0, 1}, 10.0, 25.0, 1e-10);
    for (double t : {0.01, 0.5, 1.0})
        CHECK((evaluate_X(line, 10.0, 1.2, t) - Vec3{0, 0, 1.2}).norm() < 1e-9);
}

TEST_CASE("trace of the straight line is the degenerate family") {
    CurveTrajectory line = integrate({0, 0, 0}, {0, 0, 1}, 3.0, 25.0, 1e-10);
    TraceAtInfinity tr = extract_trace(line, 3.0);
    CHECK((tr.plus.A - Vec3{0, 0, 1}).norm() < 1e-9);
    CHECK((tr.minus.A - Vec3{0, 0, 1}).norm() < 1e-9);
    CHECK((tr.plus.B - Vec3{0, 0, 1}).norm() < 1e-9);
    CHECK(tr.plus.c_inf < 1e-6);
    CHECK(tr.plus.b_amp < 1e-8);
    CHECK(!tr.plus.a_phase.has_value());
    CHECK(check_degenerate_axis(3.0, tr.plus.B.z));
}

TEST_CASE("trace of the a=0 constant-curvature family") {
    CurveTrajectory traj = fig1(0.0, 1.0, 25.0);
    TraceAtInfinity tr = extract_trace(traj, 0.0);
    CHECK(tr.plus.B_defect <= 1e-6);
    CHECK(tr.minus.B_defect <= 1e-6);
    CHECK(tr.plus.c_inf == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(tr.minus.c_inf == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("trace identities for the figure-1 parameter points") {
    for (auto [a, c0] : {std::pair{10.0, 1.0}, {15.0, 5.0}, {20.0, 3.0}}) {
        CAPTURE(a);
        CAPTURE(c0);
        CurveTrajectory traj = fig1(a, c0);
        TraceAtInfinity tr = extract_trace(traj, a);
        for (const TraceEnd* e : {&tr.plus, &tr.minus}) {
            CHECK(e->B_defect <= 1e-6);
            // Cesaro c_inf^2 vs the closed form -a B3 - alpha
            double closed = -a * e->B.z - tr.alpha;
            CHECK(std::abs(e->c_inf * e->c_inf - closed) < 1e-4);
            // fitted b^2 vs the closed form, 1% relative
            double b2c = a * a * closed * (1.0 - e->B.z * e->B.z);
            CHECK(std::abs(e->b_amp * e->b_amp - b2c) < 0.01 * std::abs(b2c));
            CHECK(e->a_phase.has_value());
            // gamma identity
            CHECK(e->gamma == doctest::Approx(3.0 * a * e->B.z + tr.alpha).epsilon(1e-9));
        }
    }
}

TEST_CASE("tail-bound honesty: A(S) vs A(2S) within the paper's estimate") {
    CurveTrajectory t1 = fig1(10.0, 1.0, 40.0);
    CurveTrajectory t2 = fig1(10.0, 1.0, 80.0);
    ExtractOptions noext;
    noext.allow_extend = false;
    TraceAtInfinity tr1 = extract_trace(t1, 10.0, noext);
    TraceAtInfinity tr2 = extract_trace(t2, 10.0, noext);
    CHECK((tr1.plus.A - tr2.plus.A).norm() <= 2.0 * tr1.sup_c / 40.0);
    CHECK((tr1.minus.A - tr2.minus.A).norm() <= 2.0 * tr1.sup_c / 40.0);
}

TEST_CASE("continuity of the trace map under data perturbation") {
    CurveTrajectory t1 = fig1(10.0, 1.0, 40.0);
    Vec3 G0{1e-6, 0.0, 2.0 + 1e-6};
    Vec3 T0 = Vec3{1.0, 1e-6, 0.0}.normalized();
    ShiftResult sh = shift_origin(G0, T0, 10.0 + 1e-6);
    CurveTrajectory t2 = integrate(sh.G, sh.T, 10.0 + 1e-6, 40.0, 1e-11);
    TraceAtInfinity tr1 = extract_trace(t1, 10.0);
    TraceAtInfinity tr2 = extract_trace(t2, 10.0 + 1e-6);
    CHECK((tr1.plus.A - tr2.plus.A).norm() <= 1e-3);
    CHECK((tr1.minus.A - tr2.minus.A).norm() <= 1e-3);
}

TEST_CASE("convergence bound of the self-similar evolution") {
    CurveTrajectory line = integrate({0, 0, 0}, {0, 0, 1}, 5.0, 25.0, 1e-10);
    TraceAtInfinity ltr = extract_trace(line, 5.0);
    for (const auto& row : convergence_check(line, 5.0, ltr, {1e-4, 1e-2, 1.0}))
        CHECK(row.sup_diff <= 1e-9);  // straight line: X(s,t) = X0(s) exactly

    CurveTrajectory traj = fig1(0.0, 1.0, 25.0);
    TraceAtInfinity tr = extract_trace(traj, 0.0);
    auto rows = convergence_check(traj, 0.0, tr, {1e-4});
    CHECK(rows[0].bound == doctest::Approx(2e-2).epsilon(1e-3));  // 2 sqrt(t) c0
    CHECK(rows[0].sup_diff <= rows[0].bound);

    CurveTrajectory t10 = fig1(10.0, 1.0, 40.0);
    TraceAtInfinity tr10 = extract_trace(t10, 10.0);
    auto rows10 = convergence_check(t10, 10.0, tr10, {1e-4, 1e-2, 1.0});
    double ratio_lo = 1e300, ratio_hi = 0.0;
    for (const auto& r : rows10) {
        CHECK(r.sup_diff <= r.bound);
        double ratio = r.sup_diff / std::sqrt(r.t);
        ratio_lo = std::min(ratio_lo, ratio);
        ratio_hi = std::max(ratio_hi, ratio);
    }
    CHECK(ratio_hi <= 2.0 * tr10.sup_c);        // sup/sqrt(t) bounded
    CHECK(ratio_hi / ratio_lo < 25.0);          // and roughly constant across t
}

TEST_CASE("asymptotic expansion orders (a=10, c0=1, S_max=40)") {
    CurveTrajectory traj = fig1(10.0, 1.0, 40.0);
    TraceAtInfinity tr = extract_trace(traj, 10.0);
    AsymptoticsReport rep = verify_asymptotics(traj, 10.0, tr);
    REQUIRE(rep.parts.size() == 4);
    for (const auto& p : rep.parts) {
        CAPTURE(p.name);
        CHECK(p.pass);
    }
    // acceptance thresholds for (ii) and (iii)
    CHECK(rep.parts[1].plus.slope <= -1.65);
    CHECK(rep.parts[2].plus.slope <= -0.65);
}

TEST_CASE("asymptotics of the straight line are exact for part (ii)") {
    CurveTrajectory line = integrate({0, 0, 0}, {0, 0, 1}, 3.0, 40.0, 1e-10);
    TraceAtInfinity tr = extract_trace(line, 3.0);
    AsymptoticsReport rep = verify_asymptotics(line, 3.0, tr);
    CHECK(rep.parts[1].plus.exact);
    // oscillation-part hypotheses fail on the degenerate axis: routed around
    for (const auto& p : rep.parts) CHECK(std::string(p.name) != "oscillation");
    CHECK_THROWS_AS(verify_asymptotics(line, 3.0, tr, true), Error);
}

TEST_CASE("check_degenerate_axis") {
    CHECK(check_degenerate_axis(2.0, 1.0));
    CHECK(check_degenerate_axis(2.0, -0.9999995));
    CHECK(!check_degenerate_axis(2.0, 0.956));
    CHECK_THROWS_AS(check_degenerate_axis(0.0, 1.0), Error);
}

TEST_CASE("self-similarity closure: the flow commutes with scaling") {
    CurveTrajectory traj = fig1(10.0, 1.0, 30.0);
    double t = 0.36, s0 = 1.2;
    double sq = std::sqrt(t);
    // state of X(.,t) at s0, rescaled back to the t=1 frame
    Vec3 Gh = rotate_exp(10.0, -0.5 * std::log(t), evaluate_X(traj, 10.0, s0, t)) / sq;
    Vec3 Th = traj.T(s0 / sq);
    CurveTrajectory re = integrate_raw(Gh, Th, 10.0, -5.0, 5.0, 1e-11);
    for (double ds : {-3.0, 0.7, 4.0}) {
        Vec3 Xa = evaluate_X(traj, 10.0, (s0 / sq + ds) * sq, t);
        Vec3 Xb = rotate_exp(10.0, 0.5 * std::log(t), sq * re.G(ds));
        CHECK((Xa - Xb).norm() < 1e-8);
    }
}
