#pragma once

// Embedded Dormand-Prince 5(4) integrator with the classical 4th-order dense
// output (Hairer, Norsett & Wanner, Solving ODEs I, DOPRI5).  The independent
// variable is arclength here, but nothing below cares.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "binormal/error.hpp"

namespace binormal {

template <int N>
using OdeState = std::array<double, N>;

struct OdeOptions {
    double tol = 1e-10;        // used for both absolute and relative control
    double h_init = 0.0;       // 0 = automatic
    double h_max = 0.0;        // 0 = |s1 - s0|
    std::size_t max_steps = 200000000;
};

// One accepted step together with its continuous-extension coefficients.
template <int N>
struct DenseStep {
    double s0, h;  // h may be negative; the step covers [min(s0,s0+h), max(s0,s0+h)]
    std::array<double, N> r1, r2, r3, r4, r5;

    double lo() const { return h > 0 ? s0 : s0 + h; }

    void eval(double s, OdeState<N>& out) const {
        double th = (s - s0) / h, th1 = 1.0 - th;
        for (int i = 0; i < N; ++i)
            out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
    }
};

// Dense solution over one direction of integration; steps stored with
// ascending s regardless of the sweep direction.
template <int N>
class DenseSolution {
public:
    std::vector<DenseStep<N>> steps;
    double s_begin = 0, s_end = 0;

    bool empty() const { return steps.empty(); }
    double smin() const { return std::min(s_begin, s_end); }
    double smax() const { return std::max(s_begin, s_end); }

    void eval(double s, OdeState<N>& out) const {
        const DenseStep<N>& st = locate(s);
        st.eval(s, out);
    }

    const DenseStep<N>& locate(double s) const {
        if (steps.empty())
            throw Error(ErrorKind::RangeExceeded, "dense solution is empty");
        // binary search on the lower end of each step (steps ascending in s)
        std::size_t lo = 0, hi = steps.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi + 1) / 2;
            if (steps[mid].lo() <= s) lo = mid; else hi = mid - 1;
        }
        return steps[lo];
    }
};

namespace detail {
// DOPRI5 tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
} // namespace detail

// Integrate y' = f(s, y) from s0 to s1 (either direction).  `monitor` is
// called after every accepted step with (s, y); `step_cb` receives each
// accepted step's dense coefficients and decides whether to keep them.
template <int N, class F, class M, class SC>
void integrate_dopri5_cb(F&& f, const OdeState<N>& y0, double s0, double s1,
                         const OdeOptions& opt, M&& monitor, SC&& step_cb) {
    using namespace detail;
    using State = OdeState<N>;

    if (s1 == s0) return;

    const double dir = s1 > s0 ? 1.0 : -1.0;
    const double hmax = opt.h_max > 0 ? opt.h_max : std::abs(s1 - s0);
    const double tol = opt.tol;

    State y = y0, k1, k2, k3, k4, k5, k6, k7, yt, yn;
    double s = s0;
    f(s, y, k1);

    // initial step from the scale of the first derivative
    double h = opt.h_init;
    if (h <= 0) {
        double dn = 0, yn2 = 0;
        for (int i = 0; i < N; ++i) {
            double sk = tol * (1.0 + std::abs(y[i]));
            dn += (k1[i] / sk) * (k1[i] / sk);
            yn2 += (y[i] / sk) * (y[i] / sk);
        }
        h = (dn > 1e-30 && yn2 > 1e-30) ? 0.01 * std::sqrt(yn2 / dn) : 1e-6;
        h = std::min(h, hmax);
    }
    h *= dir;

    double facold = 1e-4;
    const double beta = 0.04, expo1 = 0.2 - beta * 0.75;
    const double safe = 0.9, fac1 = 0.2, fac2 = 10.0;

    std::size_t nstep = 0;
    bool last = false;
    while (true) {
        if (++nstep > opt.max_steps)
            throw Error(ErrorKind::StepSizeUnderflow,
                        "step budget exhausted before reaching the end of the interval");
        if (std::abs(h) <= std::abs(s) * 1e-15 + 1e-300)
            throw Error(ErrorKind::StepSizeUnderflow, "adaptive controller stalled");

        if ((s + 1.01 * h - s1) * dir > 0.0) {
            h = s1 - s;
            last = true;
        }

        for (int i = 0; i < N; ++i) yt[i] = y[i] + h * a21 * k1[i];
        f(s + c2 * h, yt, k2);
        for (int i = 0; i < N; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(s + c3 * h, yt, k3);
        for (int i = 0; i < N; ++i) yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(s + c4 * h, yt, k4);
        for (int i = 0; i < N; ++i)
            yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(s + c5 * h, yt, k5);
        for (int i = 0; i < N; ++i)
            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(s + h, yt, k6);
        for (int i = 0; i < N; ++i)
            yn[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
        f(s + h, yn, k7);

        double err = 0;
        for (int i = 0; i < N; ++i) {
            double sk = tol * (1.0 + std::max(std::abs(y[i]), std::abs(yn[i])));
            double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i]
                            + e7 * k7[i]);
            err += (e / sk) * (e / sk);
        }
        err = std::sqrt(err / N);

        double fac11 = std::pow(err, expo1);
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(1.0 / fac2, std::min(1.0 / fac1, fac / safe));
        double hnew = h / fac;

        if (err <= 1.0) {
            facold = std::max(err, 1e-4);
            DenseStep<N> st;
            st.s0 = s;
            st.h = h;
            for (int i = 0; i < N; ++i) {
                double yd = yn[i] - y[i];
                double bspl = h * k1[i] - yd;
                st.r1[i] = y[i];
                st.r2[i] = yd;
                st.r3[i] = bspl;
                st.r4[i] = yd - h * k7[i] - bspl;
                st.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i]
                                + d7 * k7[i]);
            }
            step_cb(st);

            k1 = k7;
            y = yn;
            s += h;
            monitor(s, y);
            if (last) break;
            if (std::abs(hnew) > hmax) hnew = dir * hmax;
            h = hnew;
        } else {
            h = hnew;
            last = false;
        }
    }
}

template <int N, class F, class M>
DenseSolution<N> integrate_dopri5(F&& f, const OdeState<N>& y0, double s0, double s1,
                                  const OdeOptions& opt, M&& monitor) {
    DenseSolution<N> sol;
    sol.s_begin = s0;
    sol.s_end = s1;
    integrate_dopri5_cb<N>(f, y0, s0, s1, opt, monitor,
                           [&](const DenseStep<N>& st) { sol.steps.push_back(st); });
    if (s1 < s0) std::reverse(sol.steps.begin(), sol.steps.end());
    return sol;
}

struct NullMonitor {
    template <class S>
    void operator()(double, const S&) const {}
};

} // namespace binormal
