#include "binormal/families.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "binormal/error.hpp"

namespace binormal {

namespace {

double max_over_grid(double lo, double hi, int n, const std::function<double(double)>& f) {
    double m = 0.0;
    for (int i = 0; i < n; ++i) m = std::max(m, f(lo + (hi - lo) * i / (n - 1.0)));
    return m;
}

} // namespace

OddFamilyResult odd_family(double a, double delta, double S_max, double tol) {
    if (delta < -1.0 || delta > 1.0)
        throw Error(ErrorKind::Validation, "delta must lie in [-1, 1]");
    Vec3 G0{0.0, 0.0, 0.0};
    Vec3 T0{0.0, std::sqrt(std::max(0.0, 1.0 - delta * delta)), delta};
    OddFamilyResult out{integrate(G0, T0, a, S_max, tol), {}};
    out.point.a = a;
    out.point.delta = delta;
    out.point.oddness_defect = max_over_grid(0.0, S_max, 2001, [&](double s) {
        return (out.traj.G(s) + out.traj.G(-s)).norm();
    });
    TraceAtInfinity tr = extract_trace(out.traj, a);
    out.point.A3_plus = tr.plus.A.z;
    return out;
}

PlaneSpiralResult find_plane_spiral(double a, double tol_delta) {
    if (a == 0.0) throw Error(ErrorKind::Validation, "plane-spiral search requires a != 0");
    if (tol_delta < 1e-8)
        throw Error(ErrorKind::Validation, "tol_delta must be at least 1e-8");

    PlaneSpiralResult res;
    ExtractOptions opts;
    opts.target_err = 1e-7;
    opts.s_cap = 420.0;
    auto A3 = [&](double delta) {
        // delta = +-1 are the exact straight lines (0,0,+-s)
        if (std::abs(std::abs(delta) - 1.0) < 1e-15) return delta > 0 ? 1.0 : -1.0;
        Vec3 T0{0.0, std::sqrt(1.0 - delta * delta), delta};
        CurveTrajectory traj = integrate({0, 0, 0}, T0, a, 25.0, 1e-11);
        ++res.evaluations;
        return extract_trace(traj, a, opts).plus.A.z;
    };

    // bracket a sign change of A3+ on a coarse grid; the endpoints +-1 carry
    // the known values +-1, so a bracket always exists
    const int NG = 9;
    double dprev = -1.0, fprev = -1.0;
    double lo = 0.0, hi = 0.0, flo = 0.0;
    bool found = false;
    for (int i = 1; i < NG && !found; ++i) {
        double d = -1.0 + 2.0 * i / (NG - 1.0);
        double fd = A3(d);
        if (fprev <= 0.0 && fd >= 0.0) {
            lo = dprev; hi = d; flo = fprev;
            found = true;
        }
        dprev = d;
        fprev = fd;
    }
    if (!found)
        throw Error(ErrorKind::NoSignChange, "A3+ never bracketed 0 on the initial grid");

    while (hi - lo > tol_delta) {
        double mid = 0.5 * (lo + hi);
        double fmid = A3(mid);
        if ((fmid <= 0.0) == (flo <= 0.0)) { lo = mid; flo = fmid; }
        else hi = mid;
    }
    res.delta0 = 0.5 * (lo + hi);
    res.A3_at_delta0 = A3(res.delta0);
    return res;
}

MixedFamilyResult mixed_family(double a, double c0, int sign, double S_max, double tol) {
    if (!(c0 > 0)) throw Error(ErrorKind::Validation, "c0 must be positive");
    if (sign != 1 && sign != -1) throw Error(ErrorKind::Validation, "sign must be +-1");
    Vec3 G0{2.0 * c0 / std::sqrt(1.0 + a * a), 0.0, 0.0};
    Vec3 T0{0.0, 0.0, double(sign)};
    MixedFamilyResult out{integrate(G0, T0, a, S_max, tol), {}};
    out.point.a = a;
    out.point.c0 = c0;
    out.point.sign = sign;
    out.point.alpha = -sign * a - c0 * c0;
    out.point.symmetry_defect = max_over_grid(0.0, S_max, 2001, [&](double s) {
        Vec3 gp = out.traj.G(s), gm = out.traj.G(-s);
        return std::max({std::abs(gp.x - gm.x), std::abs(gp.y - gm.y),
                         std::abs(gp.z + gm.z)});
    });
    TraceAtInfinity tr = extract_trace(out.traj, a);
    out.point.A_plus = tr.plus.A;
    out.point.A_minus = tr.minus.A;
    out.point.sign_relation_defect =
        std::max({std::abs(tr.plus.A.x + tr.minus.A.x), std::abs(tr.plus.A.y + tr.minus.A.y),
                  std::abs(tr.plus.A.z - tr.minus.A.z)});
    return out;
}

std::vector<double> detect_self_intersection(const CurveTrajectory& traj) {
    double S = std::min(traj.smax(), -traj.smin());
    double mixed_defect = max_over_grid(0.0, S, 801, [&](double s) {
        Vec3 gp = traj.G(s), gm = traj.G(-s);
        return std::max({std::abs(gp.x - gm.x), std::abs(gp.y - gm.y), std::abs(gp.z + gm.z)});
    });
    if (mixed_defect > 1e-6)
        throw Error(ErrorKind::Validation,
                    "the G3 criterion is proved only for mixed-symmetry trajectories");

    const double a = traj.params.a;
    const double alpha = traj.params.alpha;
    if (alpha > 0.0 && a != 0.0) {
        // alpha > 0 forces a T3 <= -alpha < 0, so G3 is strictly monotone
        double worst = -1e300;
        for (int i = 0; i < 2001; ++i) {
            double s = -S + 2.0 * S * i / 2000.0;
            double t3 = traj.T(s).z;
            worst = std::max(worst, a > 0 ? t3 : -t3);
        }
        if (worst < 0.0) return {};
        throw Error(ErrorKind::Validation, "alpha > 0 but G3 is not monotone");
    }

    std::vector<double> roots;
    const int N = 20001;
    double eps = std::max(1e-6, 4.0 * S / N);
    double prev_s = eps, prev_g = traj.G(eps).z;
    for (int i = 1; i < N; ++i) {
        double s = eps + (S - eps) * i / (N - 1.0);
        double g = traj.G(s).z;
        if ((prev_g <= 0.0 && g > 0.0) || (prev_g >= 0.0 && g < 0.0)) {
            double lo = prev_s, hi = s, glo = prev_g;
            for (int it = 0; it < 80; ++it) {
                double m = 0.5 * (lo + hi);
                double gm = traj.G(m).z;
                if ((gm <= 0.0) == (glo <= 0.0)) { lo = m; glo = gm; }
                else hi = m;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        prev_s = s;
        prev_g = g;
    }
    for (double s : roots)
        if ((traj.G(s) - traj.G(-s)).norm() > 1e-6)
            throw Error(ErrorKind::Validation, "G3 zero is not a self-intersection point");
    return roots;
}

double check_G3_ode(const CurveTrajectory& traj) {
    double S = std::min(traj.smax(), -traj.smin());
    const double a = traj.params.a;
    return max_over_grid(-S, S, 4001, [&](double s) {
        double g3 = traj.G(s).z;
        double g3p = traj.T(s).z;
        double g3ppp = traj.Tpp(s).z;
        double c2 = traj.Tp(s).norm2();
        return std::abs(g3ppp + (c2 + 0.25 * s * s) * g3p - 0.25 * s * g3
                        + 0.5 * a * (1.0 - g3p * g3p));
    });
}

SingularSolution build_singular_solution(double c0, double S_max, double tol) {
    if (!(c0 > 0)) throw Error(ErrorKind::Validation, "c0 must be positive");
    SingularSolution sol;
    sol.c0 = c0;
    sol.base = integrate({0.0, 0.0, 2.0 * c0}, {1.0, 0.0, 0.0}, 0.0, S_max, tol);

    TraceAtInfinity tr = extract_trace(sol.base, 0.0);
    sol.corner_plus = tr.plus.A;
    sol.corner_minus = reflection_rho() * tr.minus.A;

    sol.continuity_defect = (sol.base.G(0.0) - reflection_rho() * sol.base.G(0.0)).norm();
    Vec3 e1{1.0, 0.0, 0.0};
    sol.tangent_jump_defect =
        std::max((sol.T_right(0.0) - e1).norm(), (sol.T_left(-0.0) + e1).norm());

    // |G/2 - (s/2) G' - G' x G''| on both branches; rho is a rotation, so the
    // reflected branch has the same residual norm as the base curve
    sol.max_residual = max_over_grid(1e-3, S_max, 4001, [&](double t) {
        double worst = 0.0;
        for (double s : {t, -t}) {
            Vec3 G = sol.base.G(s), T = sol.base.T(s);
            Vec3 Gpp = 0.5 * cross(G, T);  // a = 0
            worst = std::max(worst, (0.5 * G - 0.5 * s * T - cross(T, Gpp)).norm());
        }
        return worst;
    });
    return sol;
}

namespace {

// rotation taking the unit pair (u1,u2) onto (v1,v2) (equal mutual angles)
Mat3 align_pairs(const Vec3& u1, const Vec3& u2, const Vec3& v1, const Vec3& v2) {
    auto frame = [](const Vec3& p, const Vec3& q) {
        Vec3 w = q - dot(p, q) * p;
        Vec3 e2 = w.norm() > 1e-9 ? w.normalized() : cross(p, std::abs(p.z) < 0.9
                                                                    ? Vec3{0, 0, 1}
                                                                    : Vec3{1, 0, 0})
                                                         .normalized();
        Vec3 e3 = cross(p, e2);
        Mat3 F;
        for (int i = 0; i < 3; ++i) {
            F.m[i][0] = p[i];
            F.m[i][1] = e2[i];
            F.m[i][2] = e3[i];
        }
        return F;
    };
    return frame(v1, v2) * frame(u1, u2).transpose();
}

struct RegularCorner {
    Vec3 A_plus, A_minus;
    double angle;
};

RegularCorner regular_corner(double c0, ExtractOptions opts) {
    CurveTrajectory traj = integrate({0.0, 0.0, 2.0 * c0}, {1.0, 0.0, 0.0}, 0.0, 25.0, 1e-11);
    TraceAtInfinity tr = extract_trace(traj, 0.0, opts);
    double cosang = std::clamp(dot(tr.plus.A, tr.minus.A), -1.0, 1.0);
    return {tr.plus.A, tr.minus.A, std::acos(cosang)};
}

} // namespace

NonUniquenessReport demonstrate_nonuniqueness(double c0) {
    NonUniquenessReport rep;
    rep.c0 = c0;

    const double S = 40.0;
    SingularSolution sing = build_singular_solution(c0, S, 1e-11);
    rep.residual_singular = sing.max_residual;
    double cos_t = std::clamp(dot(sing.corner_plus, sing.corner_minus), -1.0, 1.0);
    double theta_t = std::acos(cos_t);
    rep.corner_angle = theta_t;

    // scan the regular family's corner angle for a bracket of theta_t
    ExtractOptions opts;
    opts.target_err = 1e-7;
    opts.s_cap = 360.0;
    const double clo = 0.05, chi = 3.0;
    const int NG = 60;
    double prev_c = clo, prev_f = regular_corner(clo, opts).angle - theta_t;
    double blo = 0.0, bhi = 0.0, flo = 0.0;
    bool found = std::abs(prev_f) < 1e-12;
    if (found) { blo = bhi = prev_c; }
    for (int i = 1; i < NG && !found; ++i) {
        double c = clo + (chi - clo) * i / (NG - 1.0);
        double f = regular_corner(c, opts).angle - theta_t;
        if (prev_f * f <= 0.0) {
            blo = prev_c; bhi = c; flo = prev_f;
            found = true;
        }
        prev_c = c;
        prev_f = f;
    }
    if (!found)
        throw Error(ErrorKind::RootNotBracketed,
                    "corner-angle map does not cover the target; extend the c0' range");
    for (int it = 0; it < 60 && bhi - blo > 1e-11; ++it) {
        double m = 0.5 * (blo + bhi);
        double f = regular_corner(m, opts).angle - theta_t;
        if ((f <= 0.0) == (flo <= 0.0)) { blo = m; flo = f; }
        else bhi = m;
    }
    rep.c0_regular = 0.5 * (blo + bhi);

    // rotate the regular solution so its corner pair coincides with the target
    CurveTrajectory reg = integrate({0.0, 0.0, 2.0 * rep.c0_regular}, {1.0, 0.0, 0.0}, 0.0,
                                    S, 1e-11);
    TraceAtInfinity rtr = extract_trace(reg, 0.0);
    Mat3 R = align_pairs(rtr.plus.A, rtr.minus.A, sing.corner_plus, sing.corner_minus);
    rep.corner_mismatch = std::max((R * rtr.plus.A - sing.corner_plus).norm(),
                                   (R * rtr.minus.A - sing.corner_minus).norm());

    rep.residual_regular = max_over_grid(1e-3, S, 2001, [&](double t) {
        double worst = 0.0;
        for (double s : {t, -t}) {
            Vec3 G = reg.G(s), T = reg.T(s);
            Vec3 Gpp = 0.5 * cross(G, T);
            worst = std::max(worst, (0.5 * G - 0.5 * s * T - cross(T, Gpp)).norm());
        }
        return worst;
    });

    rep.sup_difference = max_over_grid(-5.0, 5.0, 1001, [&](double s) {
        return (sing.G(s) - R * reg.G(s)).norm();
    });
    return rep;
}

} // namespace binormal
