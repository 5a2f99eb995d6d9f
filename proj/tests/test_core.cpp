#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "phg/core.hpp"
#include "phg/jet3.hpp"

using namespace phg;

TEST_CASE("quaternion products and unit algebra") {
    Vec4 q{{0.5, -0.3, 0.7, 0.2}};
    // i*(j*q) = k*q, i*i*q = -q
    Vec4 a = qmul_i(qmul_j(q));
    Vec4 b = qmul_k(q);
    for (int c = 0; c < 4; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-15));
    Vec4 m = qmul_i(qmul_i(q));
    for (int c = 0; c < 4; ++c) CHECK(m[c] == doctest::Approx(-q[c]).epsilon(1e-15));
    // left multiplications are orthogonal and skew against the identity
    CHECK(dot(qmul_j(q), qmul_j(q)) == doctest::Approx(dot(q, q)));
    CHECK(dot(qmul_j(q), q) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("qmul matches the generator shortcuts") {
    Vec4 i{{0, 1, 0, 0}}, j{{0, 0, 1, 0}}, q{{0.2, 0.4, -0.1, 0.8}};
    Vec4 via = qmul(i, q);
    Vec4 direct = qmul_i(q);
    for (int c = 0; c < 4; ++c) CHECK(via[c] == doctest::Approx(direct[c]));
    Vec4 ij = qmul(i, j);  // = k
    CHECK(ij[3] == doctest::Approx(1.0));
}

TEST_CASE("rng determinism") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("parallel reductions are deterministic and correct") {
    std::vector<double> v(20001);
    Rng rng(9);
    for (auto& x : v) x = rng.uniform(-1, 1);
    auto fn = [&](std::size_t i) { return v[i]; };
    double s1 = parallel_sum(v.size(), fn);
    double s2 = parallel_sum(v.size(), fn);
    CHECK(s1 == s2);  // bit-stable at fixed thread count
    double serial = 0;
    for (double x : v) serial += x;
    CHECK(s1 == doctest::Approx(serial).epsilon(1e-12));
    CHECK(parallel_max(v.size(), fn) ==
          doctest::Approx(*std::max_element(v.begin(), v.end())));
}

TEST_CASE("Jet3 arithmetic against closed-form derivatives") {
    // f(x,y,t) = sin(2x + y) cos(t) + x y t
    Vec3 p{{0.3, -0.2, 0.7}};
    Jet3 x = Jet3::coordinate(0, p[0]);
    Jet3 y = Jet3::coordinate(1, p[1]);
    Jet3 t = Jet3::coordinate(2, p[2]);
    Jet3 f = sin(2.0 * x + y) * cos(t) + (x * y) * t;

    double s = std::sin(2 * p[0] + p[1]), c = std::cos(2 * p[0] + p[1]);
    double ct = std::cos(p[2]), st = std::sin(p[2]);
    CHECK(f.v == doctest::Approx(s * ct + p[0] * p[1] * p[2]).epsilon(1e-15));
    CHECK(f.grad(0) == doctest::Approx(2 * c * ct + p[1] * p[2]).epsilon(1e-14));
    CHECK(f.grad(2) == doctest::Approx(-s * st + p[0] * p[1]).epsilon(1e-14));
    CHECK(f.hess(0, 0) == doctest::Approx(-4 * s * ct).epsilon(1e-14));
    CHECK(f.hess(0, 2) == doctest::Approx(-2 * c * st + p[1]).epsilon(1e-14));
    CHECK(f.hess(0, 1) == doctest::Approx(-2 * s * ct + p[2]).epsilon(1e-14));
    CHECK(f.third(0, 0, 1) == doctest::Approx(-4 * c * ct).epsilon(1e-13));
    CHECK(f.third(0, 1, 2) == doctest::Approx(2 * s * st + 1.0).epsilon(1e-13));
    CHECK(f.third(0, 0, 0) == doctest::Approx(-8 * c * ct).epsilon(1e-13));
}

TEST_CASE("Jet3 reciprocal and partial shift") {
    Jet3 x = Jet3::coordinate(0, 0.7);
    Jet3 y = Jet3::coordinate(1, -0.4);
    Jet3 g = recip(1.0 + x * x + y * y);
    double d = 1.0 / (1 + 0.49 + 0.16);
    CHECK(g.v == doctest::Approx(d).epsilon(1e-15));
    CHECK(g.grad(0) == doctest::Approx(-2 * 0.7 * d * d).epsilon(1e-14));
    Jet3 gx = partial(g, 0);
    CHECK(gx.v == doctest::Approx(g.grad(0)).epsilon(1e-15));
    CHECK(gx.grad(1) == doctest::Approx(g.hess(0, 1)).epsilon(1e-15));
    CHECK(gx.hess(1, 2) == doctest::Approx(g.third(0, 1, 2)).epsilon(1e-15));
}
