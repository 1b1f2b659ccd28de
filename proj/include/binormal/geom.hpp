#pragma once

#include <array>
#include <cmath>
#include <ostream>

namespace binormal {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double c) const { return {c * x, c * y, c * z}; }
    Vec3 operator/(double c) const { return {x / c, y / c, z / c}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double c) { x *= c; y *= c; z *= c; return *this; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
    Vec3 normalized() const { double n = norm(); return n > 0 ? *this / n : Vec3{}; }
};

inline Vec3 operator*(double c, const Vec3& v) { return v * c; }
inline double dot(const Vec3& a, const Vec3& b) { return a.dot(b); }
inline Vec3 cross(const Vec3& a, const Vec3& b) { return a.cross(b); }

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
    return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

// Complex-valued 3-vector, used for c(n - i b) = T' - i T x T'.
struct CVec3 {
    Vec3 re, im;
    CVec3 operator+(const CVec3& o) const { return {re + o.re, im + o.im}; }
    CVec3 operator-(const CVec3& o) const { return {re - o.re, im - o.im}; }
    double norm2() const { return re.norm2() + im.norm2(); }
    double norm() const { return std::sqrt(norm2()); }
};

// (cre + i cim) * (v.re + i v.im) expanded by components.
inline CVec3 scale(double cre, double cim, const CVec3& v) {
    return {v.re * cre - v.im * cim, v.im * cre + v.re * cim};
}

struct Mat3 {
    // row-major
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }
    static Mat3 diag(double a, double b, double c) {
        Mat3 r;
        r.m[0][0] = a; r.m[1][1] = b; r.m[2][2] = c;
        return r;
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
        return r;
    }
    Mat3 transpose() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }
    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
             - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
             + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }
};

using Rotation3 = Mat3;

// The antisymmetric matrix A = [[0,-a,0],[a,0,0],[0,0,0]] applied to v.
inline Vec3 apply_A(double a, const Vec3& v) { return {-a * v.y, a * v.x, 0.0}; }

// (I + A) v
inline Vec3 apply_I_plus_A(double a, const Vec3& v) {
    return {v.x - a * v.y, a * v.x + v.y, v.z};
}

// (I + A)^{-1} v.  The xy-block is [[1,-a],[a,1]] with determinant 1 + a^2;
// the z-axis is untouched.
inline Vec3 apply_inv_I_plus_A(double a, const Vec3& v) {
    double d = 1.0 + a * a;
    return {(v.x + a * v.y) / d, (v.y - a * v.x) / d, v.z};
}

// e^{A u}: rotation about the z-axis by angle a*u, in closed form.
inline Rotation3 rotation_exp(double a, double u) {
    double th = a * u;
    double c = std::cos(th), s = std::sin(th);
    Rotation3 r = Rotation3::identity();
    r.m[0][0] = c; r.m[0][1] = -s;
    r.m[1][0] = s; r.m[1][1] = c;
    return r;
}

// Apply e^{A u} without building the matrix.
inline Vec3 rotate_exp(double a, double u, const Vec3& v) {
    double th = a * u;
    double c = std::cos(th), s = std::sin(th);
    return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

// The reflection rho = diag(-1,-1,1) of the singular construction.
inline Mat3 reflection_rho() { return Mat3::diag(-1.0, -1.0, 1.0); }

inline Mat3 matrix_I_plus_A(double a) {
    Mat3 r = Mat3::identity();
    r.m[0][1] = -a;
    r.m[1][0] = a;
    return r;
}

} // namespace binormal
