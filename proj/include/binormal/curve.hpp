#pragma once

// The profile-curve ODE  G'' = 1/2 (I+A) G x G'  with |G'(0)| = 1 and the
// admissibility condition (I+A)G(0).G'(0) = 0, integrated with dense output.
// Conserved along solutions (and monitored, never enforced):
//   |T| = 1,   (I+A)G.T = s,   |T'|^2 + a T3 + alpha = 0.

#include <array>
#include <optional>
#include <vector>

#include "binormal/geom.hpp"
#include "binormal/ode.hpp"

namespace binormal {

struct SpiralParams {
    double a = 0.0;
    double alpha = 0.0;  // -a T3(0) - |T'(0)|^2
    double c0 = 0.0;     // |T'(0)|
    double E0 = 0.0;     // a^2/4
};

struct DriftSummary {
    double tangent_norm = 0.0;    // max | |T| - 1 |
    double first_integral = 0.0;  // max | (I+A)G.T - s - s_off |
    double curvature_law = 0.0;   // max | |T'|^2 + a T3 + alpha |
    double energy = 0.0;          // max | 1/4|ATxT|^2 + 1/4(c^2+alpha)^2 - a^2/4 |
};

struct CurveState {
    double s = 0.0;
    Vec3 G, T;
};

class CurveTrajectory {
public:
    SpiralParams params;
    Vec3 G0, T0;
    double S_neg = 0.0, S_pos = 0.0;  // covered range [S_neg, S_pos]
    double tol = 1e-10;
    double s_off = 0.0;  // first-integral offset (0 for admissible data)
    DriftSummary drift;

    double smin() const { return S_neg; }
    double smax() const { return S_pos; }
    bool in_range(double s) const { return s >= S_neg - 1e-12 && s <= S_pos + 1e-12; }

    Vec3 G(double s) const;
    Vec3 T(double s) const;
    Vec3 Tp(double s) const;    // T'  = 1/2 (I+A)G x T
    Vec3 Tpp(double s) const;   // T'' = 1/2 [ A T x T + (I+A)G x T' ]
    Vec3 Tppp(double s) const;

    double curvature(double s) const { return Tp(s).norm(); }
    double h(double s) const;        // -1/2 (A T).T'
    double y(double s) const;        // d|T'|^2/ds = 2 T'.T''
    double yprime(double s) const;   // 2|T''|^2 + 2 T'.T'''
    double h_alt(double s) const;    // -a (G3 - s T3)/4

    void state(double s, Vec3& g, Vec3& t) const;

    DenseSolution<6> fwd, bwd;
};

// Right-hand side of the first-order system (dG, dT).
std::pair<Vec3, Vec3> ode_rhs(const CurveState& state, double a);

// Normalize arbitrary data (|T0|=1) to the admissible slice by sliding the
// origin: returns the shifted (G, T) and the shift s0 = (I+A)G(0).T(0).
struct ShiftResult {
    Vec3 G, T;
    double s0;
};
ShiftResult shift_origin(const Vec3& G0, const Vec3& T0, double a, double tol = 1e-12);

CurveTrajectory integrate(const Vec3& G0, const Vec3& T0, double a, double S_max, double tol);

// Internal variant without the admissibility precondition (used by
// shift_origin and by semigroup-style restarts); the first integral is
// monitored against s + s_off.
CurveTrajectory integrate_raw(const Vec3& G0, const Vec3& T0, double a, double S_neg,
                              double S_pos, double tol);

inline constexpr double kCurvatureFloor = 1e-9;

// (c, tau - s/2); the second value is empty where c <= floor.
std::pair<double, std::optional<double>> curvature_torsion(const CurveTrajectory& traj, double s);

// (y, h) with h computed as -1/2 (A T).T' (the -a(G3 - s T3)/4 form is exposed
// separately as h_alt for cross-checks).
std::pair<double, double> compute_yh(const CurveTrajectory& traj, double s);

} // namespace binormal
