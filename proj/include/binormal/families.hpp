#pragma once

// Symmetric solution families, the plane-spiral search, self-intersection
// detection, and the reflected singular solution demonstrating non-uniqueness.

#include <utility>
#include <vector>

#include "binormal/curve.hpp"
#include "binormal/geom.hpp"
#include "binormal/trace.hpp"

namespace binormal {

struct OddFamilyPoint {
    double a = 0.0;
    double delta = 0.0;
    double A3_plus = 0.0;
    double oddness_defect = 0.0;  // max_s |G(s) + G(-s)|
};

struct OddFamilyResult {
    CurveTrajectory traj;
    OddFamilyPoint point;
};
OddFamilyResult odd_family(double a, double delta, double S_max, double tol = 1e-10);

struct PlaneSpiralResult {
    double delta0 = 0.0;
    double A3_at_delta0 = 0.0;
    int evaluations = 0;
};
PlaneSpiralResult find_plane_spiral(double a, double tol_delta);

struct MixedFamilyPoint {
    double a = 0.0;
    double c0 = 0.0;
    int sign = +1;
    double alpha = 0.0;        // -sign*a - c0^2
    double symmetry_defect = 0.0;  // max over the three component identities
    Vec3 A_plus, A_minus;
    double sign_relation_defect = 0.0;  // A1+=-A1-, A2+=-A2-, A3+=A3-
};
struct MixedFamilyResult {
    CurveTrajectory traj;
    MixedFamilyPoint point;
};
MixedFamilyResult mixed_family(double a, double c0, int sign, double S_max,
                               double tol = 1e-10);

// Zero-crossings of G3 on (0, S_max] (each is a self-intersection parameter
// G(s*) = G(-s*) for mixed-family trajectories); empty with monotone G3 when
// alpha > 0.
std::vector<double> detect_self_intersection(const CurveTrajectory& traj);

// Pointwise residual of the scalar third-order G3 equation along the run.
double check_G3_ode(const CurveTrajectory& traj);

class SingularSolution {
public:
    CurveTrajectory base;  // the a = 0 curve Gt with Gt(0) = (0,0,2c0), T(0) = e1
    double c0 = 0.0;
    Vec3 corner_plus, corner_minus;  // A+ and rho A-
    double continuity_defect = 0.0;
    double tangent_jump_defect = 0.0;  // vs the exact one-sided limits +-e1
    double max_residual = 0.0;         // |G/2 - (s/2)G' - G' x G''| for |s| >= 1e-3

    Vec3 G(double s) const {
        Vec3 g = base.G(s);
        return s >= 0.0 ? g : reflection_rho() * g;
    }
    Vec3 T_right(double s) const {
        Vec3 t = base.T(s);
        return s >= 0.0 ? t : reflection_rho() * t;
    }
    Vec3 T_left(double s) const {
        Vec3 t = base.T(s);
        return s > 0.0 ? t : reflection_rho() * t;
    }
    // X(s,t) = sqrt(t) G(s/sqrt(t)) (a = 0: no rotation factor)
    Vec3 X(double s, double t) const { return std::sqrt(t) * G(s / std::sqrt(t)); }
};

SingularSolution build_singular_solution(double c0, double S_max, double tol = 1e-10);

struct NonUniquenessReport {
    double c0 = 0.0;
    double c0_regular = 0.0;       // angle-matched regular parameter
    double corner_angle = 0.0;     // angle between the prescribed corner pair
    double corner_mismatch = 0.0;  // pair mismatch after rotating into alignment
    double residual_singular = 0.0;
    double residual_regular = 0.0;
    double sup_difference = 0.0;   // sup over |s| <= 5 at t = 1
};

NonUniquenessReport demonstrate_nonuniqueness(double c0);

} // namespace binormal
