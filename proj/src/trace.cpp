#include "binormal/trace.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "binormal/error.hpp"

namespace binormal {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_2pi(double x) {
    double w = std::fmod(x, 2.0 * kPi);
    if (w < 0) w += 2.0 * kPi;
    return w;
}

std::vector<double> log_nodes(double lo, double hi, int n) {
    std::vector<double> s(n);
    double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < n; ++i) s[i] = std::exp(l0 + (l1 - l0) * (i + 0.5) / n);
    return s;
}

// One end of a curve reduced to sample arrays (positive s ascending; the
// minus end is stored through the reflection Gt(s) = -G(-s), which solves the
// same equation).  Everything the extraction needs is algebraic in (G, T, T').
struct EndSamples {
    double a = 0.0, alpha = 0.0, E0 = 0.0;
    double S = 0.0;
    std::vector<double> s;
    std::vector<Vec3> G, T, Tp;

    double c2(std::size_t i) const { return Tp[i].norm2(); }
    double h(std::size_t i) const { return -0.5 * dot(apply_A(a, T[i]), Tp[i]); }
    double y(std::size_t i) const {
        Vec3 Tpp = 0.5 * (cross(apply_A(a, T[i]), T[i])
                          + cross(apply_I_plus_A(a, G[i]), Tp[i]));
        return 2.0 * dot(Tp[i], Tpp);
    }
    // index ranges: [0, n_sup) coarse grid, [n_sup, n_sup+n_fit) fit nodes,
    // then two far windows of n_far points each (at S/2^{1/4} and at S, for
    // Richardson elimination of the O(1/S^4) tail term)
    std::size_t n_sup = 0, n_fit = 0, n_far = 0;
    double S_far1 = 0.0;
};

std::vector<double> end_sample_locations(double S, std::size_t& n_sup, std::size_t& n_fit,
                                         std::size_t& n_far, double& S_far1) {
    std::vector<double> pts;
    n_sup = 2001;
    for (std::size_t i = 0; i < n_sup; ++i) pts.push_back(S * (i + 1.0) / double(n_sup));
    n_fit = 240;
    for (double v : log_nodes(S / 3.0, S, static_cast<int>(n_fit))) pts.push_back(v);
    n_far = 64;
    S_far1 = S * 0.84089641525371454;  // 2^{-1/4}
    for (double Sw : {S_far1, S}) {
        double wlen = std::min(3.0 * 4.0 * kPi / Sw, 0.2 * Sw);
        for (std::size_t k = 0; k < n_far; ++k)
            pts.push_back(Sw - wlen + wlen * (k + 0.5) / double(n_far));
    }
    return pts;
}

EndSamples samples_from_trajectory(const CurveTrajectory& traj, int sign, double S) {
    EndSamples es;
    es.a = traj.params.a;
    es.alpha = traj.params.alpha;
    es.E0 = traj.params.E0;
    es.S = S;
    es.s = end_sample_locations(S, es.n_sup, es.n_fit, es.n_far, es.S_far1);
    es.G.resize(es.s.size());
    es.T.resize(es.s.size());
    es.Tp.resize(es.s.size());
    for (std::size_t i = 0; i < es.s.size(); ++i) {
        double sg = sign * es.s[i];
        Vec3 g, t;
        traj.state(sg, g, t);
        Vec3 tp = 0.5 * cross(apply_I_plus_A(es.a, g), t);
        if (sign > 0) {
            es.G[i] = g; es.T[i] = t; es.Tp[i] = tp;
        } else {
            es.G[i] = -g; es.T[i] = t; es.Tp[i] = -tp;
        }
    }
    return es;
}

// Direct integration with on-the-fly sampling: O(#samples) memory.
EndSamples samples_by_integration(const Vec3& G0, const Vec3& T0, double a, int sign,
                                  double S, double tol) {
    EndSamples es;
    es.S = S;
    es.a = a;
    Vec3 Tp0 = 0.5 * cross(apply_I_plus_A(a, G0), T0);
    es.alpha = -a * T0.z - Tp0.norm2();
    es.E0 = 0.25 * a * a;
    es.s = end_sample_locations(S, es.n_sup, es.n_fit, es.n_far, es.S_far1);

    std::vector<std::size_t> order(es.s.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return es.s[i] < es.s[j]; });

    es.G.resize(es.s.size());
    es.T.resize(es.s.size());
    es.Tp.resize(es.s.size());

    auto rhs = [a](double, const OdeState<6>& y, OdeState<6>& dy) {
        Vec3 G{y[0], y[1], y[2]}, T{y[3], y[4], y[5]};
        Vec3 dT = 0.5 * cross(apply_I_plus_A(a, G), T);
        dy = {T.x, T.y, T.z, dT.x, dT.y, dT.z};
    };
    OdeOptions opt;
    opt.tol = std::max(tol / 64.0, 3e-14);
    std::size_t cursor = 0;
    auto on_step = [&](const DenseStep<6>& st) {
        double lo = st.lo(), hi = st.lo() + std::abs(st.h);
        OdeState<6> v;
        while (cursor < order.size()) {
            double target = sign * es.s[order[cursor]];
            if (target < lo - 1e-12 || target > hi + 1e-12) {
                bool behind = sign > 0 ? target < lo - 1e-12 : target > hi + 1e-12;
                if (behind) { ++cursor; continue; }  // rounding skip
                break;  // ahead of this step
            }
            st.eval(target, v);
            Vec3 g{v[0], v[1], v[2]}, t{v[3], v[4], v[5]};
            Vec3 tp = 0.5 * cross(apply_I_plus_A(a, g), t);
            std::size_t k = order[cursor];
            if (sign > 0) {
                es.G[k] = g; es.T[k] = t; es.Tp[k] = tp;
            } else {
                es.G[k] = -g; es.T[k] = t; es.Tp[k] = -tp;
            }
            ++cursor;
        }
    };
    integrate_dopri5_cb<6>(rhs, {G0.x, G0.y, G0.z, T0.x, T0.y, T0.z}, 0.0,
                           sign * S * (1.0 + 1e-12), opt, NullMonitor{}, on_step);
    return es;
}

// A-estimate from the exact finite-s identity with the integration-by-parts
// tail correction (error O(1/s^4)).
Vec3 A_estimate(const EndSamples& es, std::size_t i, const Vec3& B) {
    double s = es.s[i];
    double c2inf = std::max(0.0, -es.a * B.z - es.alpha);
    Vec3 est = rotate_exp(es.a, -std::log(s), es.G[i]) / s;
    Vec3 J = rotate_exp(es.a, -std::log(s), es.Tp[i]) * (-2.0 / (s * s * s));
    Vec3 AB = apply_A(es.a, B);
    J -= cross(AB, B) / (2.0 * s * s);
    J += (c2inf / (s * s)) * B;
    return est - 2.0 * J;
}

TraceEnd extract_end(const EndSamples& es) {
    TraceEnd end;
    const double a = es.a, alpha = es.alpha, E0 = es.E0;
    const std::size_t far0 = es.n_sup + es.n_fit;   // first window (at S/2^{1/4})
    const std::size_t far1 = far0 + es.n_far;       // second window (at S)
    const std::size_t farn = es.s.size();

    // window means of the corrected estimator, then Richardson in S^{-4}:
    // with S1^4 = S^4/2 the extrapolant is 2 A(S) - A(S1)
    Vec3 B{0.0, 0.0, 0.0}, Aest{};
    for (int round = 0; round < 4; ++round) {
        Vec3 acc1{}, acc2{};
        for (std::size_t i = far0; i < far1; ++i)
            acc1 += (round == 0) ? rotate_exp(a, -std::log(es.s[i]), es.G[i]) / es.s[i]
                                 : A_estimate(es, i, B);
        for (std::size_t i = far1; i < farn; ++i)
            acc2 += (round == 0) ? rotate_exp(a, -std::log(es.s[i]), es.G[i]) / es.s[i]
                                 : A_estimate(es, i, B);
        Vec3 A1 = acc1 / double(far1 - far0), A2 = acc2 / double(farn - far1);
        Aest = (round == 0) ? A2 : 2.0 * A2 - A1;
        Vec3 Braw = apply_I_plus_A(a, Aest);
        end.B_defect = std::abs(Braw.norm() - 1.0);
        B = Braw.normalized();
    }
    end.A = Aest;
    end.B = B;
    end.c_inf_closed = std::sqrt(std::max(0.0, -a * B.z - alpha));

    // Cesaro limit of c^2 through the h-tail identity
    double c2cl = end.c_inf_closed * end.c_inf_closed;
    double gt0 = 2.0 * E0 - (3.0 * c2cl + alpha) * (c2cl + alpha) / 2.0;
    double acc = 0.0;
    for (std::size_t i = far1; i < farn; ++i)
        acc += es.c2(i) + 4.0 * es.h(i) / es.s[i] + 2.0 * gt0 / (es.s[i] * es.s[i]);
    double c2ces = std::max(0.0, acc / double(farn - far1));
    end.c_inf = std::sqrt(c2ces);
    end.gamma = 3.0 * a * B.z + alpha;
    end.gamma_tilde = 2.0 * E0 - (3.0 * c2ces + alpha) * (c2ces + alpha) / 2.0;
    end.b_closed = std::sqrt(std::max(0.0, a * a * (-a * B.z - alpha) * (1.0 - B.z * B.z)));

    // Oscillation fit:  y/2 - i h  =  z e^{i phi1}(1 + (g - i(3g~ - g^2/2))/s^2)
    //                              - g conj(z) e^{-i phi1}/s^2 + i g~/s + O(1/s^3),
    // z = (b/2) e^{i a_phase}; the known lower-order terms are subtracted and
    // the leading coefficient re-fit.
    const PhaseFn ph1 = PhaseFn::phi1(end.gamma);
    const std::size_t fit0 = es.n_sup, fitn = es.n_sup + es.n_fit;
    std::complex<double> z{0.0, 0.0};
    const std::complex<double> I{0.0, 1.0};
    double g = end.gamma, gt = end.gamma_tilde;
    for (int pass = 0; pass < 3; ++pass) {
        std::complex<double> num{0.0, 0.0};
        for (std::size_t i = fit0; i < fitn; ++i) {
            double s = es.s[i];
            std::complex<double> e1 = std::exp(I * ph1(s));
            std::complex<double> F(0.5 * es.y(i), -es.h(i));
            F -= I * gt / s;
            if (pass > 0) {
                F -= z * (g - I * (3.0 * gt - 0.5 * g * g)) / (s * s) * e1;
                F += g * std::conj(z) / (s * s) * std::conj(e1);
            }
            num += F * std::conj(e1);
        }
        z = num / double(es.n_fit);
    }
    end.b_amp = 2.0 * std::abs(z);
    if (end.b_amp >= 1e-8) end.a_phase = wrap_2pi(std::arg(z));

    double rss = 0.0;
    for (std::size_t i = fit0; i < fitn; ++i) {
        std::complex<double> F(0.5 * es.y(i), -es.h(i));
        F -= z * std::exp(I * ph1(es.s[i]));
        rss += std::norm(F);
    }
    end.fit_residual = std::sqrt(rss / double(es.n_fit));
    double bound = (std::abs(gt) + 2.0 * std::abs(z) * (1.0 + std::abs(g)) + 1e-12)
                   / (es.S / 3.0);
    if (end.fit_residual > 10.0 * bound)
        throw Error(ErrorKind::WindowTooShort,
                    "oscillation-fit residual exceeds 10x its O(1/s) bound; "
                    "increase S_max");
    return end;
}

// Coefficient scale of the neglected O(1/S^4) tail term; sizes the far field.
double tail_coeff(double a, double alpha, const Vec3& B, double E0) {
    double c2 = std::max(0.0, -a * B.z - alpha);
    double g = 3.0 * a * B.z + alpha;
    double gt = 2.0 * E0 - (3.0 * c2 + alpha) * (c2 + alpha) / 2.0;
    double b = std::sqrt(std::max(0.0, a * a * c2 * (1.0 - B.z * B.z)));
    return (1.0 + std::abs(g)) * (1.0 + b) + (1.0 + c2) * (1.0 + std::abs(gt));
}

} // namespace

Vec3 evaluate_X(const CurveTrajectory& traj, double a, double s, double t) {
    if (!(t > 0)) throw Error(ErrorKind::Validation, "t must be positive");
    double sq = std::sqrt(t);
    double sigma = s / sq;
    if (!traj.in_range(sigma))
        throw Error(ErrorKind::RangeExceeded, "|s/sqrt(t)| exceeds the trajectory range");
    return rotate_exp(a, 0.5 * std::log(t), sq * traj.G(sigma));
}

TraceAtInfinity extract_trace(const CurveTrajectory& traj, double a,
                              const ExtractOptions& opts) {
    if (traj.smax() < 20.0 - 1e-9 || -traj.smin() < 20.0 - 1e-9)
        throw Error(ErrorKind::Validation, "trace extraction requires S_max >= 20");

    const double alpha = traj.params.alpha;
    const double E0 = traj.params.E0;

    // size the far field from first-pass B estimates at the current ends
    auto rough_B = [&](double s_end) {
        Vec3 est = rotate_exp(a, -std::log(std::abs(s_end)), traj.G(s_end)) / s_end;
        return apply_I_plus_A(a, est).normalized();
    };
    double K = std::max(tail_coeff(a, alpha, rough_B(traj.smax()), E0),
                        tail_coeff(a, alpha, rough_B(traj.smin()), E0));
    double S_have = std::min(traj.smax(), -traj.smin());
    double S_need = std::pow(K / opts.target_err, 0.25);
    S_need = std::max(S_need, 3.0 * std::sqrt(10.0 * std::sqrt(K)));
    S_need = std::max(S_need, 120.0);
    S_need = std::min(S_need, opts.s_cap);
    if (!opts.allow_extend) S_need = S_have;

    TraceAtInfinity out;
    out.a = a;
    out.alpha = alpha;
    out.E0 = E0;
    out.S_used = std::max(S_need, S_have);

    double ext_tol = std::max(1e-13, std::min(traj.tol, 1e-11));
    EndSamples plus, minus;
    if (S_need <= S_have * (1.0 + 1e-12)) {
        plus = samples_from_trajectory(traj, +1, S_have);
        minus = samples_from_trajectory(traj, -1, S_have);
        out.S_used = S_have;
    } else {
        plus = samples_by_integration(traj.G0, traj.T0, a, +1, S_need, ext_tol);
        minus = samples_by_integration(traj.G0, traj.T0, a, -1, S_need, ext_tol);
    }

    out.plus = extract_end(plus);
    out.minus = extract_end(minus);
    // the reflected fit carries z~ = -z_minus: shift the phase back by pi
    if (out.minus.a_phase) out.minus.a_phase = wrap_2pi(*out.minus.a_phase + kPi);

    double sup = traj.curvature(0.0);
    for (std::size_t i = 0; i < plus.n_sup; ++i)
        sup = std::max({sup, std::sqrt(plus.c2(i)), std::sqrt(minus.c2(i))});
    out.sup_c = sup;
    out.tail_bound = 2.0 * sup / out.S_used;
    return out;
}

std::vector<ConvergenceRow> convergence_check(const CurveTrajectory& traj, double a,
                                              const TraceAtInfinity& trace,
                                              const std::vector<double>& t_list) {
    std::vector<ConvergenceRow> rows;
    rows.reserve(t_list.size());
    const int NS = 2001;
    for (double t : t_list) {
        if (!(t > 0)) throw Error(ErrorKind::Validation, "t_list entries must be positive");
        double sq = std::sqrt(t);
        double sup = sq * traj.G(0.0).norm();  // sigma = 0: X0(0) = 0
        for (int i = 0; i < NS; ++i) {
            double sigma = traj.smin() + (traj.smax() - traj.smin()) * i / (NS - 1.0);
            if (std::abs(sigma) < 1e-12) continue;
            double s = sigma * sq;
            Vec3 X = rotate_exp(a, 0.5 * std::log(t), sq * traj.G(sigma));
            const Vec3& Aend = sigma > 0 ? trace.plus.A : trace.minus.A;
            Vec3 X0 = s * rotate_exp(a, std::log(std::abs(s)), Aend);
            sup = std::max(sup, (X - X0).norm());
        }
        rows.push_back({t, sup, 2.0 * sq * trace.sup_c});
    }
    return rows;
}

bool check_degenerate_axis(double a, double B3) {
    if (a == 0.0) throw Error(ErrorKind::Validation, "degenerate-axis test requires a != 0");
    return std::abs(std::abs(B3) - 1.0) <= 1e-6;
}

namespace {

struct EndModel {
    double a;
    const TraceEnd* e;
    const CurveTrajectory* traj;

    double c_floor() const { return 1e-6 * std::max(1.0, e->c_inf); }

    double res_G(double s) const {
        Vec3 model = s * rotate_exp(a, std::log(std::abs(s)), e->A);
        double c2 = e->c_inf * e->c_inf;
        Vec3 AB = apply_A(a, e->B);
        model += rotate_exp(a, std::log(std::abs(s)), 2.0 * c2 * e->B - cross(AB, e->B)) / s;
        if (e->c_inf > 1e-9) {
            double c = traj->curvature(s);
            if (c < c_floor()) return -1.0;  // skip node near a curvature zero
            Vec3 n = traj->Tp(s) / c;
            model -= (4.0 * e->c_inf / (s * s)) * n;
        }
        return (traj->G(s) - model).norm();
    }

    double res_T(double s) const {
        Vec3 model = rotate_exp(a, std::log(std::abs(s)), e->B);
        if (e->c_inf > 1e-9) {
            double c = traj->curvature(s);
            if (c < c_floor()) return -1.0;
            Vec3 bvec = cross(traj->T(s), traj->Tp(s)) / c;
            model -= (2.0 * e->c_inf / s) * bvec;
        }
        return (traj->T(s) - model).norm();
    }

    double res_cnib(double s) const {
        // numeric c(n - ib) = T' - i T x T' vs the leading oscillation
        Vec3 AB = apply_A(a, e->B);
        double ab2 = AB.norm2();
        CVec3 V{rotate_exp(a, std::log(std::abs(s)), cross(AB, e->B)),
                -1.0 * rotate_exp(a, std::log(std::abs(s)), AB)};
        double phase = (e->a_phase ? *e->a_phase : 0.0) + PhaseFn::phi(e->gamma)(s);
        double amp = e->b_amp / ab2;
        CVec3 model = scale(amp * std::cos(phase), amp * std::sin(phase), V);
        CVec3 numeric{traj->Tp(s), -1.0 * cross(traj->T(s), traj->Tp(s))};
        return (numeric - model).norm();
    }

    double res_c2(double s) const {
        double c = traj->curvature(s);
        double model = e->c_inf * e->c_inf - 4.0 * traj->h(s) / s
                       - 2.0 * e->gamma_tilde / (s * s);
        return std::abs(c * c - model);
    }
};

template <class F>
OrderFit fit_end(F&& f, double lo, double hi) {
    return fit_decay_order([&](double s) {
        double r = f(s);
        return r < 0 ? 0.0 : r;  // skipped nodes count as exact
    }, lo, hi);
}

} // namespace

AsymptoticsReport verify_asymptotics(const CurveTrajectory& traj, double a,
                                     const TraceAtInfinity& trace,
                                     bool require_oscillation) {
    AsymptoticsReport rep;
    double S = std::min(traj.smax(), -traj.smin());
    double lo = S / 3.0, hi = S;

    EndModel mp{a, &trace.plus, &traj}, mm{a, &trace.minus, &traj};
    auto add = [&](const char* name, double order, auto&& fp, auto&& fm, bool enabled) {
        if (!enabled) return;
        ExpansionReport er;
        er.name = name;
        er.claimed_order = order;
        er.plus = fit_end(fp, lo, hi);
        er.minus = fit_end([&](double s) { return fm(-s); }, lo, hi);
        auto ok = [&](const OrderFit& f) { return f.exact || f.slope <= order + rep.margin; };
        er.pass = ok(er.plus) && ok(er.minus);
        rep.parts.push_back(er);
    };

    add("position", -3.0, [&](double s) { return mp.res_G(s); },
        [&](double s) { return mm.res_G(s); }, true);
    add("tangent", -2.0, [&](double s) { return mp.res_T(s); },
        [&](double s) { return mm.res_T(s); }, true);
    bool iii_ok = a != 0.0
                  && std::abs(trace.plus.B.z) < 1.0 - 1e-9
                  && std::abs(trace.minus.B.z) < 1.0 - 1e-9
                  && trace.plus.c_inf > 1e-9 && trace.minus.c_inf > 1e-9;
    if (require_oscillation && !iii_ok)
        throw Error(ErrorKind::HypothesisViolated,
                    "oscillation expansion needs a != 0, B3 != +-1 and c_inf > 0");
    add("oscillation", -1.0, [&](double s) { return mp.res_cnib(s); },
        [&](double s) { return mm.res_cnib(s); }, iii_ok);
    add("curvature^2", -3.0, [&](double s) { return mp.res_c2(s); },
        [&](double s) { return mm.res_c2(s); }, true);
    return rep;
}

} // namespace binormal
