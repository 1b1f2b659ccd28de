#include "binormal/curve.hpp"

#include <cmath>

#include "binormal/error.hpp"

namespace binormal {

namespace {

inline OdeState<6> pack(const Vec3& G, const Vec3& T) {
    return {G.x, G.y, G.z, T.x, T.y, T.z};
}
inline void unpack(const OdeState<6>& y, Vec3& G, Vec3& T) {
    G = {y[0], y[1], y[2]};
    T = {y[3], y[4], y[5]};
}

struct CurveRhs {
    double a;
    void operator()(double, const OdeState<6>& y, OdeState<6>& dy) const {
        Vec3 G{y[0], y[1], y[2]}, T{y[3], y[4], y[5]};
        Vec3 dT = 0.5 * cross(apply_I_plus_A(a, G), T);
        dy[0] = T.x; dy[1] = T.y; dy[2] = T.z;
        dy[3] = dT.x; dy[4] = dT.y; dy[5] = dT.z;
    }
};

struct DriftMonitor {
    double a, alpha, E0, s_off;
    DriftSummary* drift;
    void operator()(double s, const OdeState<6>& y) const {
        Vec3 G{y[0], y[1], y[2]}, T{y[3], y[4], y[5]};
        Vec3 Tp = 0.5 * cross(apply_I_plus_A(a, G), T);
        double c2 = Tp.norm2();
        double atxt2 = cross(apply_A(a, T), T).norm2();
        drift->tangent_norm = std::max(drift->tangent_norm, std::abs(T.norm() - 1.0));
        drift->first_integral = std::max(
            drift->first_integral, std::abs(dot(apply_I_plus_A(a, G), T) - s - s_off));
        drift->curvature_law = std::max(drift->curvature_law, std::abs(c2 + a * T.z + alpha));
        double c2a = c2 + alpha;
        drift->energy = std::max(drift->energy,
                                 std::abs(0.25 * atxt2 + 0.25 * c2a * c2a - E0));
    }
};

} // namespace

std::pair<Vec3, Vec3> ode_rhs(const CurveState& state, double a) {
    return {state.T, 0.5 * cross(apply_I_plus_A(a, state.G), state.T)};
}

CurveTrajectory integrate_raw(const Vec3& G0, const Vec3& T0, double a, double S_neg,
                              double S_pos, double tol) {
    if (std::abs(T0.norm() - 1.0) > 1e-10)
        throw Error(ErrorKind::Validation, "|G'(0)| must be 1");
    if (!(tol >= 1e-13 && tol <= 1e-6))
        throw Error(ErrorKind::Validation, "tol must lie in [1e-13, 1e-6]");
    if (S_neg > 0 || S_pos < 0 || S_pos <= S_neg)
        throw Error(ErrorKind::Validation, "integration range must contain s = 0");

    CurveTrajectory traj;
    traj.G0 = G0;
    traj.T0 = T0;
    traj.tol = tol;
    traj.S_neg = S_neg;
    traj.S_pos = S_pos;
    traj.s_off = dot(apply_I_plus_A(a, G0), T0);

    Vec3 Tp0 = 0.5 * cross(apply_I_plus_A(a, G0), T0);
    traj.params.a = a;
    traj.params.c0 = Tp0.norm();
    traj.params.alpha = -a * T0.z - Tp0.norm2();
    traj.params.E0 = 0.25 * a * a;

    CurveRhs rhs{a};
    DriftMonitor mon{a, traj.params.alpha, traj.params.E0, traj.s_off, &traj.drift};
    OdeOptions opt;
    // The contract bounds the accumulated drift by a small multiple of tol;
    // the local controller needs headroom for that.
    opt.tol = std::max(tol / 64.0, 3e-14);
    auto y0 = pack(G0, T0);
    if (S_pos > 0) traj.fwd = integrate_dopri5<6>(rhs, y0, 0.0, S_pos, opt, mon);
    if (S_neg < 0) traj.bwd = integrate_dopri5<6>(rhs, y0, 0.0, S_neg, opt, mon);
    return traj;
}

CurveTrajectory integrate(const Vec3& G0, const Vec3& T0, double a, double S_max, double tol) {
    if (S_max <= 0) throw Error(ErrorKind::Validation, "S_max must be positive");
    double prod = dot(apply_I_plus_A(a, G0), T0);
    if (std::abs(prod) > 1e-10)
        throw Error(ErrorKind::Validation,
                    "(I+A)G(0).G'(0) must vanish; call shift_origin first");
    return integrate_raw(G0, T0, a, -S_max, S_max, tol);
}

ShiftResult shift_origin(const Vec3& G0, const Vec3& T0, double a, double tol) {
    double s0 = dot(apply_I_plus_A(a, G0), T0);
    if (s0 == 0.0) return {G0, T0, 0.0};
    // The first integral gives (I+A)G.T = s + s0 along the raw solution, so
    // the state at s = -s0 is admissible.
    double lo = std::min(0.0, -s0) - 1.0, hi = std::max(0.0, -s0) + 1.0;
    CurveTrajectory raw = integrate_raw(G0, T0, a, lo, hi, tol);
    Vec3 G, T;
    raw.state(-s0, G, T);
    return {G, T, s0};
}

void CurveTrajectory::state(double s, Vec3& g, Vec3& t) const {
    if (!in_range(s)) throw Error(ErrorKind::RangeExceeded, "s outside trajectory range");
    OdeState<6> y;
    if (s >= 0.0) {
        if (fwd.empty()) { g = G0; t = T0; return; }
        fwd.eval(s, y);
    } else {
        bwd.eval(s, y);
    }
    unpack(y, g, t);
}

Vec3 CurveTrajectory::G(double s) const {
    Vec3 g, t;
    state(s, g, t);
    return g;
}
Vec3 CurveTrajectory::T(double s) const {
    Vec3 g, t;
    state(s, g, t);
    return t;
}
Vec3 CurveTrajectory::Tp(double s) const {
    Vec3 g, t;
    state(s, g, t);
    return 0.5 * cross(apply_I_plus_A(params.a, g), t);
}
Vec3 CurveTrajectory::Tpp(double s) const {
    Vec3 g, t;
    state(s, g, t);
    Vec3 tp = 0.5 * cross(apply_I_plus_A(params.a, g), t);
    return 0.5 * (cross(apply_A(params.a, t), t) + cross(apply_I_plus_A(params.a, g), tp));
}
Vec3 CurveTrajectory::Tppp(double s) const {
    Vec3 g, t;
    state(s, g, t);
    double a = params.a;
    Vec3 tp = 0.5 * cross(apply_I_plus_A(a, g), t);
    Vec3 tpp = 0.5 * (cross(apply_A(a, t), t) + cross(apply_I_plus_A(a, g), tp));
    // d/ds [ A T x T + (I+A)G x T' ] = A T' x T + A T x T' + (I+A)T x T' + (I+A)G x T''
    return 0.5 * (cross(apply_A(a, tp), t) + cross(apply_A(a, t), tp)
                  + cross(apply_I_plus_A(a, t), tp) + cross(apply_I_plus_A(a, g), tpp));
}

double CurveTrajectory::h(double s) const {
    Vec3 g, t;
    state(s, g, t);
    Vec3 tp = 0.5 * cross(apply_I_plus_A(params.a, g), t);
    return -0.5 * dot(apply_A(params.a, t), tp);
}

double CurveTrajectory::h_alt(double s) const {
    Vec3 g, t;
    state(s, g, t);
    return -params.a * (g.z - s * t.z) / 4.0;
}

double CurveTrajectory::y(double s) const { return 2.0 * dot(Tp(s), Tpp(s)); }

double CurveTrajectory::yprime(double s) const {
    Vec3 tp = Tp(s), tpp = Tpp(s), tppp = Tppp(s);
    return 2.0 * tpp.norm2() + 2.0 * dot(tp, tppp);
}

std::pair<double, std::optional<double>> curvature_torsion(const CurveTrajectory& traj,
                                                           double s) {
    double c = traj.curvature(s);
    if (c <= kCurvatureFloor) return {c, std::nullopt};
    return {c, traj.h(s) / (c * c)};
}

std::pair<double, double> compute_yh(const CurveTrajectory& traj, double s) {
    return {traj.y(s), traj.h(s)};
}

} // namespace binormal
