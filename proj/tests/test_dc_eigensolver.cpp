#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hpt/dc_eigensolver.hpp"
#include "oracles.hpp"

using namespace hpt;

TEST_CASE("divide partitions and decoupled spectra") {
    SymTridiagonal T{{1, 2, 3}, {0, 0}};
    auto [T1, T2, a, b, c] = divide(T, 1);
    CHECK(T1.diag == std::vector<double>{1});
    CHECK(T2.diag == std::vector<double>{3});
    CHECK(a == 0.0);
    CHECK(b == 0.0);
    CHECK(c == 2.0);
    DCTree tree = eigen(T, 3);
    CHECK(tree.eigenvalues() == std::vector<double>{1, 2, 3});
    CHECK_THROWS_AS(divide(SymTridiagonal{{1, 2}, {1}}, 1), domain_error);
}

TEST_CASE("toeplitz 3x3 closed form") {
    SymTridiagonal T{{2, 2, 2}, {1, 1}};
    DCTree tree = eigen(T, 3);  // dense leaf
    CHECK(tree.eigenvalues()[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-14));
    CHECK(tree.eigenvalues()[1] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(tree.eigenvalues()[2] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-14));
    // force the arrowhead path with leaf_size 3 on a 7x7 toeplitz: eigenvalues are
    // 2 - 2 cos(k pi / 8)
    SymTridiagonal T7{std::vector<double>(7, 2.0), std::vector<double>(6, -1.0)};
    DCTree t7 = eigen(T7, 3);
    const double pi = 4.0 * std::atan(1.0);
    for (int k = 1; k <= 7; ++k)
        CHECK(t7.eigenvalues()[k - 1] == doctest::Approx(2.0 - 2.0 * std::cos(k * pi / 8.0)).epsilon(1e-13));
}

TEST_CASE("pick function values and finite differences") {
    Arrowhead A{{0.0}, {1.0}, 0.0};
    auto v = pick_evaluate(A, std::vector<double>{2.0}, 2);
    CHECK(v.f[0] == doctest::Approx(1.5).epsilon(1e-15));
    auto roots = pick_evaluate(A, std::vector<double>{1.0, -1.0}, 0);
    CHECK(std::abs(roots.f[0]) <= 1e-15);
    CHECK(std::abs(roots.f[1]) <= 1e-15);
    CHECK_THROWS_AS(pick_evaluate(A, std::vector<double>{0.0}, 0), numerical_error);
    CHECK_THROWS_AS(pick_evaluate(A, std::vector<double>{2.0}, 3), domain_error);

    Arrowhead B{{-1.0, 0.5, 2.0}, {0.3, 0.7, 0.2}, 0.4};
    const double h = 1e-6;
    for (double x : {-2.5, 0.1, 1.2, 3.0}) {
        auto c = pick_evaluate(B, std::vector<double>{x - h, x, x + h}, 2);
        double fd = (c.f[2] - c.f[0]) / (2 * h);
        CHECK(std::abs(fd - c.df[1]) <= 1e-6 * (1.0 + std::abs(c.df[1])));
        double fdd = (c.f[2] - 2 * c.f[1] + c.f[0]) / (h * h);
        CHECK(std::abs(fdd - c.ddf[1]) <= 1e-3 * (1.0 + std::abs(c.ddf[1])));
    }
}

TEST_CASE("secular roots: seed, interlacing, residuals") {
    Arrowhead seed{{0.0}, {1.0}, 0.0};
    auto r = solve_secular(seed);
    CHECK(r[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-14));

    Arrowhead A{{1.0, 2.0}, {0.1, 0.1}, 0.0};
    auto ra = solve_secular(A);
    CHECK(ra[0] < 1.0);
    CHECK(ra[1] > 1.0);
    CHECK(ra[1] < 2.0);
    CHECK(ra[2] > 2.0);
    std::vector<double> dense_ev;
    DenseMatrix Q;
    jacobi_eigh(test::dense_of(A), dense_ev, Q);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(ra[i] - dense_ev[i]) <= 1e-14 * (1 + std::abs(dense_ev[i])));

    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    Arrowhead R;
    R.shaft.resize(64);
    R.spike.resize(64);
    for (auto& v : R.shaft) v = dist(rng);
    std::sort(R.shaft.begin(), R.shaft.end());
    for (size_t i = 0; i + 1 < 64; ++i)  // separate the shaft so no deflation is needed
        R.shaft[i + 1] = std::max(R.shaft[i + 1], R.shaft[i] + 1e-3);
    for (auto& v : R.spike) v = dist(rng);
    R.tip = dist(rng);
    auto roots = solve_secular_anchored(R);
    double zn = 0.0;
    for (double z : R.spike) zn += z * z;
    auto fv = pick_evaluate(R, roots.repr, 0);
    for (double f : fv.f) CHECK(std::abs(f) <= 1e-12 * (zn + std::abs(R.tip)));
}

TEST_CASE("boley-golub reconstruction") {
    Arrowhead seed{{0.0}, {1.0}, 0.0};
    auto roots = solve_secular_anchored(seed);
    std::vector<double> bhat;
    double chat;
    reconstruct(seed, roots, bhat, chat);
    CHECK(bhat[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(chat) <= 1e-14);

    std::mt19937_64 rng(11);
    std::normal_distribution<double> dist;
    for (int rep = 0; rep < 5; ++rep) {
        Arrowhead A;
        A.shaft = {0.0, 0.4, 1.1, 2.0, 2.9, 3.3, 4.8};
        A.spike.resize(7);
        for (auto& v : A.spike) v = dist(rng);
        A.tip = dist(rng);
        // eigenvalues from the independent dense solver
        std::vector<double> ev;
        DenseMatrix Q;
        jacobi_eigh(test::dense_of(A), ev, Q);
        SecularRoots rts;
        rts.lambda = ev;
        rts.repr.resize(ev.size());
        for (size_t i = 0; i < ev.size(); ++i) rts.repr[i] = {AnchoredPoint::npos, ev[i]};
        std::vector<double> bh;
        double ch;
        reconstruct(A, rts, bh, ch);
        double db = 0.0, nb = 0.0;
        for (size_t i = 0; i < 7; ++i) {
            db += (bh[i] - A.spike[i]) * (bh[i] - A.spike[i]);
            nb += A.spike[i] * A.spike[i];
        }
        CHECK(std::sqrt(db) <= 1e-10 * std::sqrt(nb));
        // the reconstructed matrix has exactly the prescribed spectrum
        Arrowhead Ahat{A.shaft, bh, ch};
        std::vector<double> ev2;
        jacobi_eigh(test::dense_of(Ahat), ev2, Q);
        for (size_t i = 0; i < ev.size(); ++i)
            CHECK(std::abs(ev2[i] - ev[i]) <= 1e-13 * (1.0 + std::abs(ev[i])));
    }

    // interlacing violations are reported, not patched
    Arrowhead bad{{0.0, 1.0}, {0.5, 0.5}, 0.0};
    SecularRoots broken;
    broken.lambda = {0.5, 0.7, 2.0};  // first root beyond the first pole
    broken.repr = {{AnchoredPoint::npos, 0.5}, {AnchoredPoint::npos, 0.7}, {AnchoredPoint::npos, 2.0}};
    std::vector<double> bh;
    double ch;
    CHECK_THROWS_AS(reconstruct(bad, broken, bh, ch), numerical_error);
}

TEST_CASE("arrowhead eigenvectors: seed, orthogonality, diagonalization") {
    ArrowheadDecomposition seed(Arrowhead{{0.0}, {1.0}, 0.0});
    std::vector<double> e1 = {0.0, 1.0};  // eigenvalue +1 column
    auto q = seed.apply(e1, false);
    CHECK(q[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(q[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

    std::mt19937_64 rng(13);
    std::normal_distribution<double> dist;
    Arrowhead A;
    const size_t K = 127;
    A.shaft.resize(K);
    A.spike.resize(K);
    for (auto& v : A.shaft) v = dist(rng);
    std::sort(A.shaft.begin(), A.shaft.end());
    for (auto& v : A.spike) v = dist(rng);
    A.tip = dist(rng);
    ArrowheadDecomposition dec(A);
    DenseMatrix Q = dec.materialize();
    CHECK(test::orthogonality_defect(Q) <= 50.0 * (K + 1) * eps);

    Arrowhead B;
    B.shaft = {-2.0, -1.0, -0.2, 0.5, 0.9, 1.7, 2.2, 3.0, 3.1, 4.0, 4.5, 5.5, 6.0, 7.5, 8.0};
    B.spike.assign(15, 0.0);
    for (auto& v : B.spike) v = dist(rng);
    B.tip = 0.3;
    ArrowheadDecomposition db(B);
    DenseMatrix Qb = db.materialize();
    DenseMatrix Ab = test::dense_of(B);
    DenseMatrix QtAQ = Qb.transposed() * Ab * Qb;
    double anorm = 0.0;
    for (size_t i = 0; i < 16; ++i)
        for (size_t j = 0; j < 16; ++j) anorm = std::max(anorm, std::abs(Ab(i, j)));
    double offd = 0.0;
    for (size_t i = 0; i < 16; ++i)
        for (size_t j = 0; j < 16; ++j)
            if (i != j) offd = std::max(offd, std::abs(QtAQ(i, j)));
    CHECK(offd <= 1e-12 * anorm);
    for (size_t i = 0; i < 16; ++i)
        CHECK(QtAQ(i, i) == doctest::Approx(db.eigenvalues()[i]).epsilon(1e-11));
}

TEST_CASE("deflation: clustered shaft and tiny spikes") {
    // exact duplicates and zero spike entries must deflate cleanly
    Arrowhead A{{1.0, 1.0, 1.0, 2.0, 3.0}, {0.3, 0.4, 0.1, 0.0, 0.2}, -0.5};
    ArrowheadDecomposition dec(A);
    DenseMatrix Q = dec.materialize();
    CHECK(test::orthogonality_defect(Q) <= 100.0 * 6 * eps);
    std::vector<double> ev;
    DenseMatrix Qd;
    jacobi_eigh(test::dense_of(A), ev, Qd);
    for (size_t i = 0; i < 6; ++i)
        CHECK(dec.eigenvalues()[i] == doctest::Approx(ev[i]).epsilon(1e-12));
    CHECK(dec.deflation_count() >= 3);  // two cluster rotations + the zero entry
}

TEST_CASE("full eigensolver against the bisection reference") {
    std::mt19937_64 rng(17);
    SymTridiagonal T = test::random_tridiagonal(256, rng);
    DCTree tree = eigen(T, 24);
    auto ref = test::bisection_eigenvalues(T);
    const double tnorm = T.norm_bound();
    for (size_t i = 0; i < 256; ++i)
        CHECK(std::abs(tree.eigenvalues()[i] - ref[i]) <= tnorm * 1e-13);

    // residuals and orthogonality through the structured application
    std::mt19937_64 rng2(19);
    std::normal_distribution<double> dist;
    double worst_res = 0.0;
    for (int rep = 0; rep < 4; ++rep) {
        std::vector<double> x(256);
        for (auto& v : x) v = dist(rng2);
        auto qx = tree.apply(x, false);
        CHECK(std::abs(norm2(qx) - norm2(x)) <= 8.0 * eps * 256 * norm2(x));
        auto qtqx = tree.apply(qx, true);
        double d = 0.0;
        for (size_t i = 0; i < 256; ++i) d = std::max(d, std::abs(qtqx[i] - x[i]));
        CHECK(d <= 100.0 * 256 * eps * max_abs(x));
        // T Q x = Q Lambda x
        std::vector<double> lx(x);
        for (size_t i = 0; i < 256; ++i) lx[i] *= tree.eigenvalues()[i];
        auto lhs = T.multiply(qx);
        auto rhs = tree.apply(lx, false);
        for (size_t i = 0; i < 256; ++i)
            worst_res = std::max(worst_res, std::abs(lhs[i] - rhs[i]));
    }
    CHECK(worst_res <= tnorm * 256 * 1e-13);
    CHECK(tree.max_backward_error() <= 1e-10);
}

TEST_CASE("tiny inputs and fully deflated arrowheads") {
    DCTree one = eigen(SymTridiagonal{{3.5}, {}}, 32);
    CHECK(one.eigenvalues() == std::vector<double>{3.5});
    DCTree two = eigen(SymTridiagonal{{0, 0}, {2}}, 32);
    CHECK(two.eigenvalues()[0] == doctest::Approx(-2.0));
    CHECK(two.eigenvalues()[1] == doctest::Approx(2.0));

    ArrowheadDecomposition all_deflated(Arrowhead{{1.0, 2.0}, {0.0, 0.0}, 5.0});
    std::vector<double> want = {1.0, 2.0, 5.0};
    for (size_t i = 0; i < 3; ++i)
        CHECK(all_deflated.eigenvalues()[i] == doctest::Approx(want[i]));
    DenseMatrix Q = all_deflated.materialize();
    CHECK(test::orthogonality_defect(Q) <= 16 * eps);

    ArrowheadDecomposition singleton(Arrowhead{{}, {}, -2.5});
    CHECK(singleton.eigenvalues() == std::vector<double>{-2.5});
}

TEST_CASE("orthogonality at the top of the size range") {
    std::mt19937_64 rng(29);
    SymTridiagonal T = test::random_tridiagonal(1024, rng);
    DCTree tree = eigen(T, 32);
    auto ref = test::bisection_eigenvalues(T);
    const double tnorm = T.norm_bound();
    for (size_t i = 0; i < 1024; ++i)
        CHECK(std::abs(tree.eigenvalues()[i] - ref[i]) <= tnorm * 1e-13);
    // exact Q^T Q columns on a deterministic sample
    std::vector<double> e(1024, 0.0);
    for (size_t j = 0; j < 1024; j += 61) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        auto col = tree.apply(tree.apply(e, false), true);
        for (size_t i = 0; i < 1024; ++i)
            CHECK(std::abs(col[i] - (i == j ? 1.0 : 0.0)) <= 100.0 * 1024 * eps);
    }
}

TEST_CASE("random 16x16 rebuild") {
    std::mt19937_64 rng(23);
    SymTridiagonal T = test::random_tridiagonal(16, rng);
    DCTree tree = eigen(T, 4);
    DenseMatrix Q = tree.materialize();
    DenseMatrix L(16, 16);
    for (size_t i = 0; i < 16; ++i) L(i, i) = tree.eigenvalues()[i];
    DenseMatrix rebuilt = Q * L * Q.transposed();
    CHECK(test::max_abs_diff(rebuilt, test::dense_of(T)) <= T.norm_bound() * 1e-13);
}
