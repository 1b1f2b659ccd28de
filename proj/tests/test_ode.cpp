#include <doctest.h>

#include <cmath>

#include "binormal/error.hpp"
#include "binormal/ode.hpp"

using namespace binormal;

TEST_CASE("dopri5 integrates a harmonic oscillator to tolerance") {
    auto rhs = [](double, const OdeState<2>& y, OdeState<2>& dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    OdeOptions opt;
    opt.tol = 1e-12;
    auto sol = integrate_dopri5<2>(rhs, {1.0, 0.0}, 0.0, 20.0, opt, NullMonitor{});
    OdeState<2> y;
    for (double s : {0.5, 3.0, 10.0, 19.7}) {
        sol.eval(s, y);
        CHECK(std::abs(y[0] - std::cos(s)) < 1e-9);
        CHECK(std::abs(y[1] + std::sin(s)) < 1e-9);
    }
}

TEST_CASE("dopri5 dense output is accurate inside steps, both directions") {
    auto rhs = [](double s, const OdeState<1>& y, OdeState<1>& dy) { dy[0] = s * y[0]; };
    OdeOptions opt;
    opt.tol = 1e-11;
    auto fwd = integrate_dopri5<1>(rhs, {1.0}, 0.0, 3.0, opt, NullMonitor{});
    auto bwd = integrate_dopri5<1>(rhs, {1.0}, 0.0, -3.0, opt, NullMonitor{});
    OdeState<1> y;
    for (int i = 0; i <= 300; ++i) {
        double s = 3.0 * i / 300.0;
        fwd.eval(s, y);
        CHECK(std::abs(y[0] - std::exp(0.5 * s * s)) < 1e-7 * std::exp(0.5 * s * s));
        bwd.eval(-s, y);
        CHECK(std::abs(y[0] - std::exp(0.5 * s * s)) < 1e-7 * std::exp(0.5 * s * s));
    }
}

TEST_CASE("dopri5 reports a stall instead of looping") {
    // derivative blows up in finite s: the controller collapses the step
    auto rhs = [](double, const OdeState<1>& y, OdeState<1>& dy) { dy[0] = y[0] * y[0]; };
    OdeOptions opt;
    opt.tol = 1e-10;
    CHECK_THROWS_AS(integrate_dopri5<1>(rhs, {1.0}, 0.0, 2.0, opt, NullMonitor{}), Error);
}
