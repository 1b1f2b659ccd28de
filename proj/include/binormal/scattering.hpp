#pragma once

// Inverse problem for the curve: prescribe the trace at infinity
// (a, B, a_phase, b_amp) and recover admissible data (T(0), T'(0)).

#include <complex>
#include <vector>

#include "binormal/curve.hpp"
#include "binormal/geom.hpp"
#include "binormal/trace.hpp"

namespace binormal {

enum class End { Plus, Minus };

struct ScatterRequest {
    double a = 0.0;        // != 0
    Vec3 B;                // unit, |B3| < 1
    double a_phase = 0.0;  // [0, 2pi)
    double b_amp = 0.0;    // >= 0
    End end = End::Plus;

    // alpha = -a B3 - b^2 / (a^2 (1 - B3^2))
    double alpha() const;
    void validate() const;
};

struct SeedState {
    double s0 = 0.0;
    Vec3 T, Tp;
    std::complex<double> omega;
};

// Data at s0 matching the prescribed trace exactly at that point:
//   T(s0) = e^{A log s0} B,
//   (T' - i T x T')(s0) = omega (A T x T - i A T)(s0),
// with omega = (b e^{i a_phase} / |AB|^2) e^{i phi(s0)} and
// phi(s) = s^2/4 - (3 a B3 + alpha) log s; this is the unique omega for which
// the prescribed limit holds with the tilde-phase of the W(s) operator.
SeedState seed_at(const ScatterRequest& req, double s0);

struct InverseDiagnostics {
    std::vector<double> schedule;
    std::vector<double> cauchy;       // |dT(0)| + |dT'(0)| between entries
    int polish_iterations = 0;
    double B_err = 0.0;               // max component error of the recovered B
    double b_amp_rel_err = 0.0;
    double a_phase_err = 0.0;         // rad, mod 2pi
    TraceAtInfinity validation;
};

struct InverseResult {
    Vec3 T0, Tp0;
    InverseDiagnostics diag;
};

InverseResult solve_inverse(const ScatterRequest& req, std::vector<double> s_schedule,
                            double tol);

// G(0) from the corner identity (I+A)G(0) = 2 T(0) x T'(0), then the full trajectory.
CurveTrajectory reconstruct_G_from_T(const Vec3& T0, const Vec3& Tp0, double a,
                                     double S_max = 40.0, double tol = 1e-10);

} // namespace binormal
