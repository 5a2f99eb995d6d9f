#pragma once

// Small fixed-size linear algebra, quaternion helpers, deterministic RNG and
// a deterministic parallel-for. Everything in this project is 3- or
// 4-dimensional, so we keep the types POD and allocation-free.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace phg {

using cplx = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// ---------------------------------------------------------------------------
// Vec3 / Mat3
// ---------------------------------------------------------------------------

struct Vec3 {
    double v[3]{0, 0, 0};

    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) {
    for (int i = 0; i < 3; ++i) a.v[i] += b.v[i];
    return a;
}
inline Vec3 operator-(Vec3 a, const Vec3& b) {
    for (int i = 0; i < 3; ++i) a.v[i] -= b.v[i];
    return a;
}
inline Vec3 operator*(double s, Vec3 a) {
    for (int i = 0; i < 3; ++i) a.v[i] *= s;
    return a;
}
inline double dot(const Vec3& a, const Vec3& b) {
    return a.v[0] * b.v[0] + a.v[1] * b.v[1] + a.v[2] * b.v[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

struct Mat3 {
    double m[3][3]{};  // m[row][col]

    static Mat3 identity() {
        Mat3 r;
        for (int i = 0; i < 3; ++i) r.m[i][i] = 1.0;
        return r;
    }
    double* operator[](int r) { return m[r]; }
    const double* operator[](int r) const { return m[r]; }
};

inline Vec3 mul(const Mat3& A, const Vec3& x) {
    Vec3 r;
    for (int i = 0; i < 3; ++i)
        r.v[i] = A.m[i][0] * x.v[0] + A.m[i][1] * x.v[1] + A.m[i][2] * x.v[2];
    return r;
}
inline Mat3 mul(const Mat3& A, const Mat3& B) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += A.m[i][k] * B.m[k][j];
            r.m[i][j] = s;
        }
    return r;
}
inline Mat3 inverse(const Mat3& A) {
    const auto& a = A.m;
    double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                 a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                 a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    if (std::abs(det) < 1e-300) throw std::runtime_error("Mat3: singular matrix");
    double id = 1.0 / det;
    Mat3 r;
    r.m[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * id;
    r.m[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * id;
    r.m[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * id;
    r.m[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * id;
    r.m[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * id;
    r.m[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * id;
    r.m[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * id;
    r.m[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * id;
    r.m[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * id;
    return r;
}

// ---------------------------------------------------------------------------
// Vec4 and unit quaternions.  A point of S^3 is a unit quaternion
// q = q0 + q1 i + q2 j + q3 k; left multiplication by i, j, k generates the
// right-invariant frame used for the round-sphere model.
// ---------------------------------------------------------------------------

struct Vec4 {
    double v[4]{0, 0, 0, 0};
    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
};

inline Vec4 operator+(Vec4 a, const Vec4& b) {
    for (int i = 0; i < 4; ++i) a.v[i] += b.v[i];
    return a;
}
inline Vec4 operator-(Vec4 a, const Vec4& b) {
    for (int i = 0; i < 4; ++i) a.v[i] -= b.v[i];
    return a;
}
inline Vec4 operator*(double s, Vec4 a) {
    for (int i = 0; i < 4; ++i) a.v[i] *= s;
    return a;
}
inline double dot(const Vec4& a, const Vec4& b) {
    return a.v[0] * b.v[0] + a.v[1] * b.v[1] + a.v[2] * b.v[2] + a.v[3] * b.v[3];
}
inline double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }

// Quaternion product a*b with (w,x,y,z) component order.
inline Vec4 qmul(const Vec4& a, const Vec4& b) {
    return Vec4{{a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
                 a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
                 a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
                 a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]}};
}
// Left multiplications by the imaginary units: i*q, j*q, k*q.
inline Vec4 qmul_i(const Vec4& q) { return Vec4{{-q[1], q[0], -q[3], q[2]}}; }
inline Vec4 qmul_j(const Vec4& q) { return Vec4{{-q[2], q[3], q[0], -q[1]}}; }
inline Vec4 qmul_k(const Vec4& q) { return Vec4{{-q[3], -q[2], q[1], q[0]}}; }

// exp(s*u)*q for a unit imaginary quaternion direction u (u^2 = -1).
inline Vec4 qrotate(const Vec4& u, double s, const Vec4& q) {
    Vec4 g{{std::cos(s), std::sin(s) * u[1], std::sin(s) * u[2], std::sin(s) * u[3]}};
    return qmul(g, q);
}

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64).  No std::random_device anywhere: all
// randomness in the library is reproducible from a stated seed.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // Uniform in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Standard normal (Box-Muller, consumes two uniforms).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }
    cplx cnormal() { return cplx(normal(), normal()); }

private:
    std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Deterministic parallelism.  Work is split into contiguous chunks; partial
// reductions are combined in chunk order, so results are bit-stable at a
// fixed thread count.
// ---------------------------------------------------------------------------

int thread_count();
void set_thread_count(int n);

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Sum of fn(i) over i in [0,n) with chunk-ordered combination.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& fn);

// Max of fn(i) over i in [0,n).
double parallel_max(std::size_t n, const std::function<double(std::size_t)>& fn);

inline long long floordiv(long long a, long long b) {
    long long q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}
inline long long floormod(long long a, long long b) {
    long long r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? r + b : r;
}

}  // namespace phg
