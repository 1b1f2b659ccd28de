#include <doctest.h>

#include <cmath>
#include <vector>

#include "binormal/error.hpp"
#include "binormal/families.hpp"

using namespace binormal;

TEST_CASE("odd family: endpoints are the straight lines") {
    OddFamilyResult up = odd_family(7.0, 1.0, 25.0);
    CHECK(up.point.A3_plus == doctest::Approx(1.0).epsilon(1e-8));
    OddFamilyResult dn = odd_family(7.0, -1.0, 25.0);
    CHECK(dn.point.A3_plus == doctest::Approx(-1.0).epsilon(1e-8));
    for (double s : {3.0, 17.0}) CHECK((up.traj.G(s) - Vec3{0, 0, s}).norm() < 1e-9);
}

TEST_CASE("odd family at the figure-2 point (a=10, delta=0.956)") {
    OddFamilyResult r = odd_family(10.0, 0.956, 40.0, 1e-11);
    CHECK(r.point.oddness_defect <= 1e-8);
    CHECK(std::abs(r.point.A3_plus) < 1.0);
}

TEST_CASE("plane-spiral search at a = 10") {
    PlaneSpiralResult r = find_plane_spiral(10.0, 1e-8);
    CHECK(std::abs(r.A3_at_delta0) <= 1e-5);
    CHECK(r.delta0 > -1.0);
    CHECK(r.delta0 < 1.0);
    // figure 2's caption value, compared loosely (the caption may depict a
    // nearby family member)
    CHECK(std::abs(r.delta0 - 0.956) <= 0.05);
    // mirror symmetry of the family under a -> -a
    PlaneSpiralResult m = find_plane_spiral(-10.0, 1e-8);
    CHECK(std::abs(m.delta0 + r.delta0) <= 1e-4);
}

TEST_CASE("mixed family at the figure parameter points") {
    struct Pt {
        double a, c0;
        int sign;
        double alpha;
    };
    for (const Pt& pt : {Pt{3.0, 1.8, 1, -6.24}, Pt{3.0, 0.4, 1, -3.16}, Pt{10.0, 4.0, -1, -6.0}}) {
        CAPTURE(pt.a);
        CAPTURE(pt.c0);
        MixedFamilyResult r = mixed_family(pt.a, pt.c0, pt.sign, 40.0, 1e-11);
        CHECK(std::abs(r.point.alpha - pt.alpha) <= 1e-12);
        CHECK(std::abs(r.point.alpha - (-pt.sign * pt.a - pt.c0 * pt.c0)) <= 1e-15);
        CHECK(r.point.symmetry_defect <= 1e-8);
        CHECK(r.point.sign_relation_defect <= 1e-5);
        CHECK(check_G3_ode(r.traj) <= 1e-6);
    }
}

TEST_CASE("G3 equation residual on the straight line") {
    CurveTrajectory line = integrate({0, 0, 0}, {0, 0, 1}, 3.0, 30.0, 1e-10);
    CHECK(check_G3_ode(line) <= 1e-9);
}

TEST_CASE("self-intersections: monotone branch returns empty") {
    // a=3, c0=1.5, sign=-1: alpha = 3 - 2.25 = 0.75 > 0
    MixedFamilyResult r = mixed_family(3.0, 1.5, -1, 30.0, 1e-11);
    CHECK(r.point.alpha == doctest::Approx(0.75));
    CHECK(detect_self_intersection(r.traj).empty());
}

TEST_CASE("self-intersections: monotone branch with a < 0") {
    // a = -3, c0 = 1.5, sign = +1: alpha = 3 - 2.25 = 0.75 > 0, G3 increasing
    MixedFamilyResult r = mixed_family(-3.0, 1.5, 1, 30.0, 1e-11);
    CHECK(r.point.alpha == doctest::Approx(0.75));
    CHECK(detect_self_intersection(r.traj).empty());
}

TEST_CASE("self-intersections: large curvature produces crossings") {
    MixedFamilyResult r = mixed_family(3.0, 6.0, 1, 30.0, 1e-11);
    std::vector<double> roots = detect_self_intersection(r.traj);
    REQUIRE(!roots.empty());
    CHECK(roots.front() < 5.0);
    for (double s : roots) CHECK((r.traj.G(s) - r.traj.G(-s)).norm() <= 1e-6);

    // brute-force pairwise scan agrees on |s| <= 10: every reported s* is a
    // close pair, and no pair under 1e-4 exists away from the reported roots
    const double S = 10.0;
    const int N = 2001;
    std::vector<Vec3> pts(N);
    for (int i = 0; i < N; ++i) pts[i] = r.traj.G(-S + 2.0 * S * i / (N - 1.0));
    auto s_of = [&](int i) { return -S + 2.0 * S * i / (N - 1.0); };
    double missed = 1e300;
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            if (s_of(j) - s_of(i) < 0.5) continue;  // neighbours along the arc
            double d = (pts[i] - pts[j]).norm();
            bool near_root = false;
            for (double s : roots)
                if (std::abs(std::abs(s_of(i)) - s) < 0.2 && std::abs(std::abs(s_of(j)) - s) < 0.2)
                    near_root = true;
            if (!near_root) missed = std::min(missed, d);
        }
    }
    CHECK(missed > 1e-4);
}

TEST_CASE("empirical self-intersection threshold in c0 (a=3, T3(0)=+1)") {
    // no closed-form threshold is available; locate the transition empirically
    double last_clear = 0.0, first_crossing = 0.0;
    for (double c0 : {0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 6.0}) {
        MixedFamilyResult r = mixed_family(3.0, c0, 1, 30.0, 1e-11);
        bool crosses = !detect_self_intersection(r.traj).empty();
        if (!crosses) last_clear = c0;
        else if (first_crossing == 0.0) first_crossing = c0;
    }
    CHECK(last_clear > 0.0);        // small curvature: embedded
    CHECK(first_crossing > 0.0);    // large curvature: self-intersecting
    CHECK(last_clear < first_crossing);
    MESSAGE("empirical threshold bracket: (", last_clear, ", ", first_crossing, ")");
}

TEST_CASE("straight line has no self-intersections (brute force)") {
    CurveTrajectory line = integrate({0, 0, 0}, {0, 0, 1}, 3.0, 12.0, 1e-10);
    // the G3 criterion is proved only for the mixed class; scan pairwise
    const int N = 801;
    double closest = 1e300;
    for (int i = 0; i < N; ++i)
        for (int j = i + 80; j < N; ++j) {
            double si = -12.0 + 24.0 * i / (N - 1.0), sj = -12.0 + 24.0 * j / (N - 1.0);
            closest = std::min(closest, (line.G(si) - line.G(sj)).norm() / (sj - si));
        }
    CHECK(closest > 0.99);  // chord length equals arc length on a line
}

TEST_CASE("singular reflected solution (c0 = 0.8)") {
    SingularSolution sol = build_singular_solution(0.8, 40.0, 1e-11);
    CHECK(sol.continuity_defect == 0.0);     // G(0) = (0,0,2c0) is fixed by rho
    CHECK(sol.tangent_jump_defect <= 1e-14);  // one-sided tangents +-e1
    CHECK(sol.max_residual <= 1e-8);
    CHECK((sol.T_right(0.0) - Vec3{1, 0, 0}).norm() <= 1e-14);
    CHECK((sol.T_left(-1e-12) + Vec3{1, 0, 0}).norm() <= 1e-9);
    // corner data are unit spiral directions (a = 0)
    CHECK(sol.corner_plus.norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.corner_minus.norm() == doctest::Approx(1.0).epsilon(1e-6));
    // X(s,t) converges to the corner as t -> 0 within the paper's bound
    for (double t : {1e-4, 1e-2}) {
        double sup = 0.0;
        for (int i = -200; i <= 200; ++i) {
            double s = 0.35 * i / 200.0 * std::sqrt(t) * 40.0;
            Vec3 X0 = s >= 0 ? s * sol.corner_plus : s * sol.corner_minus;
            sup = std::max(sup, (sol.X(s, t) - X0).norm());
        }
        CHECK(sup <= 2.0 * 0.8 * std::sqrt(t) * 1.05);
    }
}

TEST_CASE("singular solution degenerates to the doubled ray as c0 -> 0") {
    double prev = 1e300;
    for (double c0 : {0.2, 0.05}) {
        SingularSolution sol = build_singular_solution(c0, 20.0, 1e-11);
        double defect = 0.0;
        for (int i = -200; i <= 200; ++i) {
            double s = 5.0 * i / 200.0;
            defect = std::max(defect, (sol.G(s) - Vec3{std::abs(s), 0.0, 0.0}).norm());
        }
        CHECK(defect < 13.0 * c0);  // bends away from the ray like c0 s^2/2 on |s| <= 5
        CHECK(defect < prev);
        prev = defect;
    }
}

TEST_CASE("non-uniqueness at the figure-8 parameter c0 = 0.8") {
    NonUniquenessReport rep = demonstrate_nonuniqueness(0.8);
    CHECK(rep.corner_mismatch <= 1e-5);
    CHECK(rep.residual_singular <= 1e-8);
    CHECK(rep.residual_regular <= 1e-8);
    CHECK(rep.sup_difference >= 0.1);
}

TEST_CASE("regular corner angle is monotone over the scan range") {
    double prev = -1.0;
    for (double c0 : {0.2, 0.5, 0.9, 1.4, 2.0, 2.6}) {
        CurveTrajectory traj = integrate({0, 0, 2 * c0}, {1, 0, 0}, 0.0, 25.0, 1e-11);
        TraceAtInfinity tr = extract_trace(traj, 0.0);
        double ang = std::acos(std::clamp(dot(tr.plus.A, tr.minus.A), -1.0, 1.0));
        CHECK(ang > prev);
        prev = ang;
    }
}

TEST_CASE("non-uniqueness pipeline across corner parameters") {
    // As c0 shrinks the singular corner angle opens toward pi, so the
    // angle-matched regular partner has growing c0' and the two solutions do
    // not approach each other; the construction itself stays exact.
    NonUniquenessReport rep = demonstrate_nonuniqueness(0.45);
    CHECK(rep.corner_mismatch <= 1e-5);
    CHECK(rep.residual_singular <= 1e-8);
    CHECK(rep.residual_regular <= 1e-8);
    CHECK(rep.sup_difference >= 0.1);
    CHECK(rep.c0_regular > 0.05);
    CHECK(rep.c0_regular < 3.0);
}
