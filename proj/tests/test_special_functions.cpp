#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hpt/special_functions.hpp"
#include "oracles.hpp"

using namespace hpt;

namespace {
const double pi = 4.0 * std::atan(1.0);
}

TEST_CASE("orthonormal jacobi point values") {
    // degree-0 orthonormal Legendre is the constant 1/sqrt(2)
    CHECK(eval_jacobi_orthonormal(0, {0, 0}, 0.3) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    // P~_1 = sqrt(3/2) x, from the normalization constant in exact arithmetic
    CHECK(eval_jacobi_orthonormal(1, {0, 0}, 0.5) ==
          doctest::Approx(std::sqrt(1.5) * 0.5).epsilon(1e-15));
    CHECK_THROWS_AS(eval_jacobi_orthonormal(0, {0, 0}, 1.5), domain_error);
    CHECK_THROWS_AS(eval_jacobi_orthonormal(-1, {0, 0}, 0.5), domain_error);
}

TEST_CASE("quadrature normalization of P~_5^{(1,2)}") {
    JacobiParams p(1, 2);
    QuadratureRule rule = gauss_jacobi_rule(64, p);
    double s = 0.0;
    for (size_t q = 0; q < rule.size(); ++q) {
        double v = eval_jacobi_orthonormal(5, p, rule.nodes[q]);
        s += rule.weights[q] * v * v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
    // point value is finite and reproducible through the recurrence
    CHECK(std::isfinite(eval_jacobi_orthonormal(5, p, 0.7)));
}

TEST_CASE("weighted jacobi values and endpoint limits") {
    CHECK(eval_weighted_jacobi(0, {0, 0}, 0.2) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(eval_weighted_jacobi(0, {2, 0}, 1.0) == 0.0);
    JacobiParams p(1, 1);
    QuadratureRule leg = gauss_jacobi_rule(32, {0, 0});  // unweighted oracle
    double s = 0.0;
    for (size_t q = 0; q < leg.size(); ++q) {
        double v = eval_weighted_jacobi(3, p, leg.nodes[q]);
        s += leg.weights[q] * v * v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
}

TEST_CASE("orthonormal associated legendre") {
    CHECK(eval_assoc_legendre_norm(0, 0, 0.4) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(std::abs(eval_assoc_legendre_norm(1, 1, 0.0)) ==
          doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-14));
    CHECK_THROWS_AS(eval_assoc_legendre_norm(1, 2, 0.0), domain_error);

    QuadratureRule leg = gauss_jacobi_rule(48, {0, 0});
    for (int l = 2; l <= 8; ++l) {
        double cross = 0.0, self = 0.0;
        for (size_t q = 0; q < leg.size(); ++q) {
            double a = eval_assoc_legendre_norm(4, 2, leg.nodes[q]);
            double b = eval_assoc_legendre_norm(l, 2, leg.nodes[q]);
            cross += leg.weights[q] * a * b;
            self += leg.weights[q] * b * b;
        }
        if (l == 4) CHECK(std::abs(cross - 1.0) <= 1e-12);
        else CHECK(std::abs(cross) <= 1e-12);
        CHECK(std::abs(self - 1.0) <= 1e-12);
    }
}

TEST_CASE("gauss-jacobi rules") {
    QuadratureRule r1 = gauss_jacobi_rule(1, {0, 0});
    CHECK(r1.nodes[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(r1.weights[0] == doctest::Approx(2.0));

    QuadratureRule r2 = gauss_jacobi_rule(2, {0, 0});
    CHECK(r2.nodes[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(r2.nodes[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(r2.weights[0] == doctest::Approx(1.0));
    CHECK(r2.weights[1] == doctest::Approx(1.0));

    // total mass of (1-x)(1+x)^2 on [-1,1] is 4/3 by the hand integral
    QuadratureRule r16 = gauss_jacobi_rule(16, {1, 2});
    double s = 0.0;
    for (double w : r16.weights) s += w;
    CHECK(s == doctest::Approx(4.0 / 3.0).epsilon(1e-13));

    // exactness up to degree 2N-1: moments of x^k against the Legendre weight
    QuadratureRule r5 = gauss_jacobi_rule(5, {0, 0});
    for (int k = 0; k <= 9; ++k) {
        double got = 0.0;
        for (size_t q = 0; q < r5.size(); ++q) got += r5.weights[q] * std::pow(r5.nodes[q], k);
        double want = (k % 2) ? 0.0 : 2.0 / (k + 1);
        CHECK(std::abs(got - want) <= 1e-14 * (1 << k));
    }
    CHECK_THROWS_AS(gauss_jacobi_rule(0, {0, 0}), domain_error);
}

TEST_CASE("connection oracle basics") {
    JacobiParams p(0, 0);
    QuadratureRule rule = gauss_jacobi_rule(24, p);
    Family1D leg = [&](int n, double x) { return eval_jacobi_orthonormal(n, p, x); };
    DenseMatrix I8 = connection_oracle(leg, leg, rule, 8, 8, 16);
    CHECK(test::max_abs_diff(I8, DenseMatrix::identity(8)) <= 1e-13);

    // (1-x) P~_0^{(2,0)} expanded in P~^{(0,0)}: two orthonormal-column entries
    Family1D from = [&](int n, double x) {
        return (1.0 - x) * eval_jacobi_orthonormal(n, {2, 0}, x);
    };
    DenseMatrix col = connection_oracle(leg, from, rule, 2, 1, 8);
    CHECK(col(0, 0) * col(0, 0) + col(1, 0) * col(1, 0) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("geometry harmonics") {
    auto sphere = GeometryKind::sphere();
    CHECK(eval_geometry_harmonic(sphere, 0, 0, 0.7, 1.1).real() ==
          doctest::Approx(1.0 / (2.0 * std::sqrt(pi))).epsilon(1e-14));
    CHECK_THROWS_AS(eval_geometry_harmonic(sphere, 1, 2, 0.5, 0.0), domain_error);

    auto disk = GeometryKind::disk();
    CHECK(eval_geometry_harmonic(disk, 0, 0, 0.3, 0.2).real() ==
          doctest::Approx(1.0 / std::sqrt(pi)).epsilon(1e-14));
    CHECK_THROWS_AS(eval_geometry_harmonic(disk, 3, 2, 0.3, 0.0), domain_error);

    // disk orthonormality over the unit disk: radial Gauss-Jacobi x angular exactness
    {
        QuadratureRule rad = gauss_jacobi_rule(24, {0, 0});  // in x = 2r^2-1, r dr = dx/4
        for (int l : {2, 4, 6}) {
            double s = 0.0;
            for (size_t q = 0; q < rad.size(); ++q) {
                double r = std::sqrt(0.5 * (1.0 + rad.nodes[q]));
                double v = eval_geometry_harmonic(disk, l, 2, r, 0.0).real();
                double w = eval_geometry_harmonic(disk, 4, 2, r, 0.0).real();
                s += rad.weights[q] * 0.25 * v * w;  // azimuthal integral contributes 2*pi/(2*pi)
            }
            s *= 2.0 * pi;
            CHECK(std::abs(s - (l == 4 ? 1.0 : 0.0)) <= 1e-12);
        }
    }

    // triangle self-inner-products by tensorized Gauss-Jacobi
    auto tri = GeometryKind::triangle(0.0, 0.5, 1.0);
    QuadratureRule rx = gauss_jacobi_rule(24, {tri.beta + tri.gamma + 1.0, tri.alpha});
    QuadratureRule ry = gauss_jacobi_rule(24, {tri.gamma, tri.beta});
    auto tri_inner = [&](int l1, int m1, int l2, int m2) {
        double total = 0.0;
        for (size_t i = 0; i < rx.size(); ++i) {
            double x = 0.5 * (1.0 + rx.nodes[i]);
            for (size_t j = 0; j < ry.size(); ++j) {
                double t = 0.5 * (1.0 + ry.nodes[j]);
                double y = (1.0 - x) * t;
                double f = eval_geometry_harmonic(tri, l1, m1, x, y).real() *
                           eval_geometry_harmonic(tri, l2, m2, x, y).real();
                total += rx.weights[i] * ry.weights[j] * f;
            }
        }
        return 0.5 * total;  // collected powers of two from the simplex mapping
    };
    for (auto [l, m] : std::vector<std::pair<int, int>>{{0, 0}, {3, 1}, {5, 5}, {4, 2}})
        CHECK(std::abs(tri_inner(l, m, l, m) - 1.0) <= 1e-10);
    CHECK(std::abs(tri_inner(3, 1, 4, 1)) <= 1e-10);
    CHECK(std::abs(tri_inner(3, 1, 3, 2)) <= 1e-10);
}

TEST_CASE("symmetry relation and recurrence consistency") {
    // P~_n^{(a,b)}(-x) = (-1)^n P~_n^{(b,a)}(x)
    for (double a : {0.0, 0.5, 2.0})
        for (double b : {0.0, 1.0}) {
            for (int n = 0; n <= 32; ++n) {
                double x = 0.377;
                double lhs = eval_jacobi_orthonormal(n, {a, b}, -x);
                double rhs = (n % 2 ? -1.0 : 1.0) * eval_jacobi_orthonormal(n, {b, a}, x);
                CHECK(std::abs(lhs - rhs) <= 1e-13 * (1.0 + std::abs(rhs)));
            }
        }

    // the two parameter-raising recurrences, checked pointwise on a grid:
    //   (2n+a+b+1) P_n^{(a,b)} = (n+a+b+1) P_n^{(a+1,b)} - (n+b) P_{n-1}^{(a+1,b)}
    //   (2n+a+b+2)(1-x) P_n^{(a+1,b)} = 2(n+a+1) P_n^{(a,b)} - 2(n+1) P_{n+1}^{(a,b)}
    // stated for the unnormalized family; undo the orthonormal scaling with the norm
    // constants h_n^{1/2}
    auto unnorm = [&](int n, JacobiParams p, double x) {
        double logh = (p.alpha + p.beta + 1.0) * std::log(2.0) + std::lgamma(n + p.alpha + 1.0) +
                      std::lgamma(n + p.beta + 1.0) - std::log(2.0 * n + p.alpha + p.beta + 1.0) -
                      std::lgamma(n + p.alpha + p.beta + 1.0) - std::lgamma(n + 1.0);
        return eval_jacobi_orthonormal(n, p, x) * std::exp(0.5 * logh);
    };
    for (double a : {0.0, 0.5, 1.0, 2.0})
        for (double b : {0.0, 0.5, 1.0, 2.0})
            for (int n = 1; n <= 32; n += 3)
                for (int g = 0; g < 33; g += 4) {
                    double x = -1.0 + 2.0 * g / 32.0;
                    // error measured against the term scale: the combinations cancel
                    // near interior roots, where output-relative error is meaningless
                    double t1a = (n + a + b + 1) * unnorm(n, {a + 1, b}, x);
                    double t1b = (n + b) * unnorm(n - 1, {a + 1, b}, x);
                    double lhs1 = (2 * n + a + b + 1) * unnorm(n, {a, b}, x);
                    CHECK(std::abs(lhs1 - (t1a - t1b)) <=
                          1e-12 * (std::abs(t1a) + std::abs(t1b) + std::abs(lhs1) + 1.0));
                    double t2a = 2 * (n + a + 1) * unnorm(n, {a, b}, x);
                    double t2b = 2 * (n + 1) * unnorm(n + 1, {a, b}, x);
                    double lhs2 = (2 * n + a + b + 2) * (1.0 - x) * unnorm(n, {a + 1, b}, x);
                    CHECK(std::abs(lhs2 - (t2a - t2b)) <=
                          1e-12 * (std::abs(t2a) + std::abs(t2b) + std::abs(lhs2) + 1.0));
                }
}

TEST_CASE("degenerate-parameter limits at degree 0") {
    // alpha+beta in {0,-1}: the diagonal recurrence coefficient takes its analytic limit
    for (auto p : {JacobiParams(0.5, -0.5), JacobiParams(0.25, -0.25), JacobiParams(-0.25, -0.75)}) {
        QuadratureRule rule = gauss_jacobi_rule(24, p);
        double m0 = 0.0, m1 = 0.0;
        for (size_t q = 0; q < rule.size(); ++q) {
            double v0 = eval_jacobi_orthonormal(0, p, rule.nodes[q]);
            double v1 = eval_jacobi_orthonormal(1, p, rule.nodes[q]);
            m0 += rule.weights[q] * v0 * v0;
            m1 += rule.weights[q] * v1 * v1;
        }
        CHECK(std::abs(m0 - 1.0) <= 1e-12);
        CHECK(std::abs(m1 - 1.0) <= 1e-12);
    }
}

TEST_CASE("orthonormality across families") {
    for (auto p : {JacobiParams(0, 0), JacobiParams(1, 2), JacobiParams(0.5, 0.5)}) {
        QuadratureRule rule = gauss_jacobi_rule(40, p);
        for (int i = 0; i <= 16; i += 4)
            for (int j = i; j <= 16; j += 4) {
                double s = 0.0;
                for (size_t q = 0; q < rule.size(); ++q)
                    s += rule.weights[q] * eval_jacobi_orthonormal(i, p, rule.nodes[q]) *
                         eval_jacobi_orthonormal(j, p, rule.nodes[q]);
                CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) <= 1e-11);
            }
    }
}
