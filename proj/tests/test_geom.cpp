#include <doctest.h>

#include <cmath>
#include <random>

#include "binormal/geom.hpp"
#include "oracles.hpp"

using namespace binormal;

namespace {
double mat_inf_dist(const Mat3& A, const Mat3& B) {
    double m = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m = std::max(m, std::abs(A.m[i][j] - B.m[i][j]));
    return m;
}
} // namespace

TEST_CASE("rotation_exp trivial cases are the identity") {
    CHECK(mat_inf_dist(rotation_exp(0.0, 3.7), Mat3::identity()) == 0.0);
    CHECK(mat_inf_dist(rotation_exp(5.0, 0.0), Mat3::identity()) == 0.0);
}

TEST_CASE("rotation_exp matches the exponential-series oracle") {
    // a=10, u=1: rotation by 10 rad about z; frozen values cos(10), sin(10)
    Mat3 R = rotation_exp(10.0, 1.0);
    CHECK(R.m[0][0] == doctest::Approx(-0.83907152907645244).epsilon(1e-15));
    CHECK(R.m[1][0] == doctest::Approx(-0.54402111088936981).epsilon(1e-15));
    CHECK(mat_inf_dist(R, oracles::rotation_exp_series(10.0, 1.0)) < 1e-13);

    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        double a = U(rng), u = U(rng);
        CHECK(mat_inf_dist(rotation_exp(a, u), oracles::rotation_exp_series(a, u)) < 1e-13);
    }
}

TEST_CASE("rotation_exp properties: norm, group law, inverse, orthogonality") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        double a = U(rng), u1 = U(rng), u2 = U(rng);
        Vec3 v{U(rng), U(rng), U(rng)};
        CHECK(std::abs((rotation_exp(a, u1) * v).norm() - v.norm()) < 1e-13 * (1 + v.norm()));
        Mat3 lhs = rotation_exp(a, u1) * rotation_exp(a, u2);
        CHECK(mat_inf_dist(lhs, rotation_exp(a, u1 + u2)) < 1e-13);
        Mat3 prod = rotation_exp(a, u1) * rotation_exp(a, -u1);
        CHECK(mat_inf_dist(prod, Mat3::identity()) < 1e-13);
        Mat3 R = rotation_exp(a, u1);
        CHECK(std::abs(R.det() - 1.0) < 1e-14);
        CHECK(mat_inf_dist(R * R.transpose(), Mat3::identity()) < 1e-14);
    }
}

TEST_CASE("A v . v vanishes and (I+A) inverse round-trips") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-20.0, 20.0);
    for (int i = 0; i < 200; ++i) {
        double a = U(rng);
        Vec3 v{U(rng), U(rng), U(rng)};
        CHECK(std::abs(dot(apply_A(a, v), v)) <= 1e-15 * std::abs(a) * v.norm2());
        Vec3 w = apply_I_plus_A(a, apply_inv_I_plus_A(a, v));
        CHECK((w - v).norm() < 1e-13 * (1.0 + v.norm()));
        // ||(I+A)(I+A)^{-1} - I||_inf via basis vectors
        for (const Vec3& e : {Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}}) {
            Vec3 r = apply_I_plus_A(a, apply_inv_I_plus_A(a, e)) - e;
            CHECK(std::max({std::abs(r.x), std::abs(r.y), std::abs(r.z)}) <= 1e-13);
        }
    }
}

TEST_CASE("apply_inv_I_plus_A examples") {
    Vec3 r0 = apply_inv_I_plus_A(0.0, {1, 2, 3});
    CHECK((r0 - Vec3{1, 2, 3}).norm() == 0.0);
    Vec3 r1 = apply_inv_I_plus_A(17.3, {0, 0, 1});
    CHECK((r1 - Vec3{0, 0, 1}).norm() == 0.0);
    // a=1, v=(1,0,0): 2x2 system [[1,-1],[1,1]] x = (1,0) solved exactly
    Vec3 r2 = apply_inv_I_plus_A(1.0, {1, 0, 0});
    CHECK(r2.x == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r2.y == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(r2.z == 0.0);
}

TEST_CASE("reflection rho is the expected rotation by pi about z") {
    Mat3 rho = reflection_rho();
    CHECK(rho.m[0][0] == -1.0);
    CHECK(rho.m[1][1] == -1.0);
    CHECK(rho.m[2][2] == 1.0);
    CHECK(rho.det() == 1.0);
    Vec3 v{0.3, -0.7, 2.0};
    Vec3 rv = rho * v;
    CHECK(rv.x == -v.x);
    CHECK(rv.y == -v.y);
    CHECK(rv.z == v.z);
}
