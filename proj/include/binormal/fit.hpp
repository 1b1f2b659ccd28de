#pragma once

#include <cmath>
#include <vector>

namespace binormal {

struct OrderFit {
    double slope = 0.0;   // fitted p in R(s) ~ s^p
    bool exact = false;   // residual at rounding level everywhere
    double max_residual = 0.0;
};

// Fit the decay order of a nonnegative residual R(s) on [s_lo, s_hi].
// Log-periodic oscillations make pointwise log-log fits noisy, so the fit
// runs on the per-bin envelope (max of |R| over log-spaced bins).
template <class F>
OrderFit fit_decay_order(F&& R, double s_lo, double s_hi, int nodes = 240, int bins = 24) {
    std::vector<double> bin_max(bins, 0.0);
    double l0 = std::log(s_lo), l1 = std::log(s_hi);
    OrderFit out;
    for (int i = 0; i < nodes; ++i) {
        double ls = l0 + (l1 - l0) * (i + 0.5) / nodes;
        double r = std::abs(R(std::exp(ls)));
        int b = static_cast<int>(bins * (ls - l0) / (l1 - l0));
        if (b >= bins) b = bins - 1;
        bin_max[b] = std::max(bin_max[b], r);
        out.max_residual = std::max(out.max_residual, r);
    }
    if (out.max_residual < 1e-13) {
        out.exact = true;
        out.slope = -1e9;
        return out;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (int b = 0; b < bins; ++b) {
        if (bin_max[b] < 1e-300) continue;
        double x = l0 + (l1 - l0) * (b + 0.5) / bins;
        double y = std::log(bin_max[b]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    out.slope = (n >= 2) ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    return out;
}

} // namespace binormal
