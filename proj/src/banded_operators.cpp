#include "hpt/banded_operators.hpp"

#include <array>
#include <cmath>
#include <string>

namespace hpt {

// ---------------- spherical harmonic closed forms ----------------

double sh_mult_a(int n, int m) {
    const double nd = n, md = m;
    return 2.0 * (nd * nd + 2 * md * nd + 2 * md * md - nd - md - 1) /
           ((2 * nd + 2 * md - 3) * (2 * nd + 2 * md + 1));
}

double sh_mult_b(int n, int m) {
    const double nd = n, md = m;
    double t = 2 * nd + 2 * md;
    return -std::sqrt(nd * (nd + 1) * (nd + 2 * md) * (nd + 2 * md + 1) /
                      ((t - 1) * (t + 1) * (t + 1) * (t + 3)));
}

double sh_chol_c(int n, int m) {
    const double nd = n, md = m;
    return std::sqrt((nd + 2 * md) * (nd + 2 * md + 1) /
                     ((2 * nd + 2 * md - 1) * (2 * nd + 2 * md + 1)));
}

double sh_chol_d(int n, int m) {
    const double nd = n, md = m;
    return -std::sqrt(nd * (nd + 1) / ((2 * nd + 2 * md + 1) * (2 * nd + 2 * md + 3)));
}

double sh_rrt_e(int n, int m) {
    const double nd = n, md = m;
    return 2.0 * (2 * md * md + (2 * nd + 3) * md + nd * (nd + 1)) /
           ((2 * nd + 2 * md - 1) * (2 * nd + 2 * md + 3));
}

double sh_rrt_f(int n, int m) {
    const double nd = n, md = m;
    double t = 2 * nd + 2 * md;
    return -std::sqrt(nd * (nd + 1) * (nd + 2 * md + 2) * (nd + 2 * md + 3) /
                      ((t + 1) * (t + 3) * (t + 3) * (t + 5)));
}

double sh_rdrt_g(int n, int m) {
    const double nd = n, md = m;
    double num = 4 * std::pow(md, 4) + (12 * nd + 2) * std::pow(md, 3) +
                 (14 * nd * nd + 6 * nd - 6) * md * md + (8 * nd * nd * nd + 8 * nd * nd - 4 * nd) * md +
                 2 * nd * (nd + 1) * (nd * nd + nd - 1);
    return num / ((2 * nd + 2 * md - 1) * (2 * nd + 2 * md + 3));
}

double sh_rdrt_h(int n, int m) {
    const double nd = n, md = m;
    return (nd + md + 1) * (nd + md + 2) * sh_rrt_f(n, m);
}

static void require_sh(int m, size_t N) {
    if (m < 0) throw domain_error("spherical harmonic operator: m >= 0 required");
    if (N < 1) throw domain_error("spherical harmonic operator: N >= 1 required");
}

BandedSymmetric sh_mult_M(int m, size_t N) {
    require_sh(m, N);
    BandedSymmetric M(N, 2);
    for (size_t i = 0; i < N; ++i) M.diagonals[0][i] = sh_mult_a(static_cast<int>(i) + 1, m);
    for (size_t i = 0; i + 2 < N; ++i) M.diagonals[2][i] = sh_mult_b(static_cast<int>(i) + 1, m);
    return M;
}

BandedUpper sh_cholesky_R(int m, size_t N) {
    require_sh(m, N);
    BandedUpper R(N, 2);
    for (size_t i = 0; i < N; ++i) R.diagonals[0][i] = sh_chol_c(static_cast<int>(i) + 1, m);
    for (size_t i = 0; i + 2 < N; ++i) R.diagonals[2][i] = sh_chol_d(static_cast<int>(i) + 1, m);
    return R;
}

BandedSymmetric sh_RRt(int m, size_t N) {
    require_sh(m, N);
    BandedSymmetric G(N, 2);
    for (size_t i = 0; i < N; ++i) G.diagonals[0][i] = sh_rrt_e(static_cast<int>(i) + 1, m);
    for (size_t i = 0; i + 2 < N; ++i) G.diagonals[2][i] = sh_rrt_f(static_cast<int>(i) + 1, m);
    return G;
}

BandedSymmetric sh_RDRt(int m, size_t N) {
    require_sh(m, N);
    BandedSymmetric G(N, 2);
    for (size_t i = 0; i < N; ++i) G.diagonals[0][i] = sh_rdrt_g(static_cast<int>(i) + 1, m);
    for (size_t i = 0; i + 2 < N; ++i) G.diagonals[2][i] = sh_rdrt_h(static_cast<int>(i) + 1, m);
    return G;
}

DiagonalOp sh_D(int m, size_t N) {
    require_sh(m, N);
    DiagonalOp D;
    D.entries.resize(N);
    for (size_t i = 0; i < N; ++i) {
        double l = static_cast<double>(m) + static_cast<double>(i);
        D.entries[i] = l * (l + 1);
    }
    return D;
}

// The recurrence paths run in extended precision: their role is to out-precision the
// closed forms they check, and the chained Cholesky otherwise drifts by ~N*eps.
namespace {

struct ShCholExt {
    std::vector<long double> c, d;
};

ShCholExt sh_chol_ext(int m, size_t N) {
    ShCholExt R;
    R.c.resize(N);
    R.d.assign(N, 0.0L);
    const long double md = m;
    for (size_t i = 0; i < N; ++i) {
        long double n = static_cast<long double>(i) + 1;
        long double an = 2.0L * (n * n + 2 * md * n + 2 * md * md - n - md - 1) /
                         ((2 * n + 2 * md - 3) * (2 * n + 2 * md + 1));
        long double t = 2 * n + 2 * md;
        long double bn = -sqrtl(n * (n + 1) * (n + 2 * md) * (n + 2 * md + 1) /
                                ((t - 1) * (t + 1) * (t + 1) * (t + 3)));
        long double csq = i >= 2 ? an - R.d[i - 2] * R.d[i - 2] : an;
        if (!(csq > 0.0L))
            throw numerical_error("sh_cholesky_R_recurrence: lost positivity (indexing bug)");
        R.c[i] = sqrtl(csq);
        R.d[i] = bn / R.c[i];
    }
    return R;
}

} // namespace

BandedUpper sh_cholesky_R_recurrence(int m, size_t N) {
    require_sh(m, N);
    ShCholExt E = sh_chol_ext(m, N);
    BandedUpper R(N, 2);
    for (size_t i = 0; i < N; ++i) R.diagonals[0][i] = static_cast<double>(E.c[i]);
    for (size_t i = 0; i + 2 < N; ++i) R.diagonals[2][i] = static_cast<double>(E.d[i]);
    return R;
}

BandedSymmetric sh_RRt_recurrence(int m, size_t N) {
    require_sh(m, N);
    ShCholExt E = sh_chol_ext(m, N + 2);
    BandedSymmetric G(N, 2);
    for (size_t i = 0; i < N; ++i)
        G.diagonals[0][i] = static_cast<double>(E.c[i] * E.c[i] + E.d[i] * E.d[i]);
    for (size_t i = 0; i + 2 < N; ++i)
        G.diagonals[2][i] = static_cast<double>(E.d[i] * E.c[i + 2]);
    return G;
}

BandedSymmetric sh_RDRt_recurrence(int m, size_t N) {
    require_sh(m, N);
    ShCholExt E = sh_chol_ext(m, N + 2);
    BandedSymmetric G(N, 2);
    auto w = [m](size_t i) {  // (m+n)(m+n+1) at 1-based n = i+1 shifted per appendix proof
        long double t = static_cast<long double>(m) + static_cast<long double>(i);
        return t * (t + 1);
    };
    for (size_t i = 0; i < N; ++i)
        G.diagonals[0][i] =
            static_cast<double>(w(i) * E.c[i] * E.c[i] + w(i + 2) * E.d[i] * E.d[i]);
    for (size_t i = 0; i + 2 < N; ++i)
        G.diagonals[2][i] = static_cast<double>(w(i + 2) * E.d[i] * E.c[i + 2]);
    return G;
}

// ---------------- inverse multiplication operator ----------------

SemiseparableSym::SemiseparableSym(int m, size_t N) : m_(m), logu_(N), logw_(N) {
    if (m < 1) throw domain_error("sh_minv: m >= 1 required (m = 0 is divergent)");
    const double md = m;
    for (size_t i = 0; i < N; ++i) {
        double l = static_cast<double>(i);
        logu_[i] = 0.5 * (std::log(2 * l + 2 * md + 1) + std::lgamma(l + 2 * md + 1) -
                          std::lgamma(l + 1));
        logw_[i] = 0.5 * (std::log(2 * l + 2 * md + 1) + std::lgamma(l + 1) -
                          std::lgamma(l + 2 * md + 1)) -
                   std::log(2 * md);
    }
}

void SemiseparableSym::log_entry(size_t l, size_t n, double& logmag, int& sign) const {
    if (((l + n) % 2) != 0) {
        logmag = -std::numeric_limits<double>::infinity();
        sign = 0;
        return;
    }
    size_t lo = std::min(l, n), hi = std::max(l, n);
    logmag = logu_[lo] + logw_[hi];
    sign = 1;
}

double SemiseparableSym::entry(size_t l, size_t n) const {
    double lm;
    int s;
    log_entry(l, n, lm, s);
    return s == 0 ? 0.0 : s * std::exp(lm);
}

DenseMatrix SemiseparableSym::section() const {
    DenseMatrix A(size(), size());
    for (size_t i = 0; i < size(); ++i)
        for (size_t j = 0; j < size(); ++j) A(i, j) = entry(i, j);
    return A;
}

double sh_minv_entry(long l, long n, int m) {
    if (l < 0 || n < 0) throw domain_error("sh_minv_entry: negative index");
    SemiseparableSym op(m, static_cast<size_t>(std::max(l, n)) + 1);
    return op.entry(static_cast<size_t>(l), static_cast<size_t>(n));
}

SemiseparableSym sh_minv_section(int m, size_t N) { return SemiseparableSym(m, N); }

// ---------------- weighted Jacobi closed forms ----------------

double jac_m1_a(int n, const JacobiParams& p) {
    const double a = p.alpha, b = p.beta, nd = n;
    if (n == 1) return 1.0 + jacobi_recurrence_diag(0, p);  // removable 0/0 at a+b = 0
    double t = 2 * nd + a + b;
    return (2 * nd * (2 * nd - 2) + (4 * nd + 2 * b - 2) * (a + b)) / (t * (t - 2));
}

double jac_m1_b(int n, const JacobiParams& p) { return jacobi_recurrence_offdiag(n, p); }

double jac_m2_c(int n, const JacobiParams& p) {
    const double a = p.alpha, b = p.beta, nd = n;
    if (n == 1) return 1.0 - jacobi_recurrence_diag(0, p);
    double t = 2 * nd + a + b;
    return (2 * nd * (2 * nd - 2) + (4 * nd + 2 * a - 2) * (a + b)) / (t * (t - 2));
}

double jac_m2_d(int n, const JacobiParams& p) { return -jacobi_recurrence_offdiag(n, p); }

double jac_chol_e(int n, const JacobiParams& p) {
    const double a = p.alpha, b = p.beta, nd = n;
    const double t = 2 * nd + a + b;
    // (n+a+b)/(t-1) == 1 exactly at n = 1; removable 0/0 at a+b = -1
    const double q = n == 1 ? 1.0 : (nd + a + b) / (t - 1);
    return 2.0 * std::sqrt(q * (nd + a) * (nd + b) * (nd + a + b + 1) / (t * t * (t + 1)));
}

double jac_chol_f(int n, const JacobiParams& p) {
    const double a = p.alpha, b = p.beta, nd = n;
    const double t = 2 * nd + a + b;
    return 2.0 * (a - b) * std::sqrt(nd * (nd + a + b + 1)) / (t * (t + 2));
}

double jac_chol_g(int n, const JacobiParams& p) {
    const double a = p.alpha, b = p.beta, nd = n;
    const double t = 2 * nd + a + b;
    return -2.0 * std::sqrt(nd * (nd + 1) * (nd + a + 1) * (nd + b + 1) /
                            ((t + 1) * (t + 2) * (t + 2) * (t + 3)));
}

double jac_rinv_d0(int n, const JacobiParams& p) {
    const double a = p.alpha, b = p.beta, nd = n;
    const double t = 2 * nd + a + b;
    const double q = n == 1 ? 1.0 : (t - 1) / (nd + a + b);
    return 0.5 * std::sqrt(q * t * t * (t + 1) / ((nd + a) * (nd + b) * (nd + a + b + 1)));
}

double jac_rinv_d1(int n, const JacobiParams& p) {
    const double a = p.alpha, b = p.beta, nd = n;
    const double t = 2 * nd + a + b;
    const double q = n == 1 ? 1.0 : (t - 1) / (nd + a + b);
    double den = (nd + a) * (nd + a + 1) * (nd + b) * (nd + b + 1) * (nd + a + b + 1) * (nd + a + b + 2);
    return 0.5 * (b - a) * std::sqrt(q * nd * (t + 1) * (t + 1) * (t + 3) / den);
}

double jac_rinv_d2(int n, const JacobiParams& p) {
    const double a = p.alpha, b = p.beta, nd = n;
    const double t = 2 * nd + a + b;
    const double q = n == 1 ? 1.0 : (t - 1) / (nd + a + b);
    double den = (nd + a) * (nd + a + 1) * (nd + a + 2) * (nd + b) * (nd + b + 1) * (nd + b + 2) *
                 (nd + a + b + 1) * (nd + a + b + 2) * (nd + a + b + 3);
    double root = std::sqrt(q * nd * (nd + 1) * (t + 2) * (t + 2) * (t + 5) / den);
    return 0.125 * root * (t * (t + 4) + 3.0 * (a - b) * (a - b));
}

JacobiMultOps jac_mult_ops(const JacobiParams& p, size_t N) {
    if (N < 1) throw domain_error("jac_mult_ops: N >= 1 required");
    // build tridiagonals two rows longer so the pentadiagonal products are sections of
    // the infinite products
    const size_t Ne = N + 2;
    BandedSymmetric M1(Ne, 1), M2(Ne, 1);
    for (size_t i = 0; i < Ne; ++i) {
        M1.diagonals[0][i] = jac_m1_a(static_cast<int>(i) + 1, p);
        M2.diagonals[0][i] = jac_m2_c(static_cast<int>(i) + 1, p);
    }
    for (size_t i = 0; i + 1 < Ne; ++i) {
        M1.diagonals[1][i] = jac_m1_b(static_cast<int>(i) + 1, p);
        M2.diagonals[1][i] = jac_m2_d(static_cast<int>(i) + 1, p);
    }
    auto section = [&](const BandMatrix& P) {
        BandedSymmetric S(N, 2);
        for (size_t i = 0; i < N; ++i) S.diagonals[0][i] = P.at(i, i);
        for (size_t i = 0; i + 1 < N; ++i) S.diagonals[1][i] = 0.5 * (P.at(i, i + 1) + P.at(i + 1, i));
        for (size_t i = 0; i + 2 < N; ++i) S.diagonals[2][i] = 0.5 * (P.at(i, i + 2) + P.at(i + 2, i));
        return S;
    };
    JacobiMultOps ops;
    BandMatrix b1 = M1.to_band(), b2 = M2.to_band();
    ops.M = section(band_multiply(b1, b2));
    ops.Mp = section(band_multiply(b1, b1));
    ops.Mm = section(band_multiply(b2, b2));
    M1.diagonals[0].resize(N); M1.diagonals[1].resize(N - 1); M1.size = N;
    M2.diagonals[0].resize(N); M2.diagonals[1].resize(N - 1); M2.size = N;
    ops.M1 = std::move(M1);
    ops.M2 = std::move(M2);
    return ops;
}

static void require_even_step(const JacobiParams& low, const JacobiParams& high) {
    double da = high.alpha - low.alpha, db = high.beta - low.beta;
    auto ok = [](double d) {
        double r = d / 2.0;
        return d >= 0.0 && std::abs(r - std::round(r)) < 1e-12;
    };
    if (!ok(da) || !ok(db))
        throw domain_error("jac_S: parameter jumps must be nonnegative even integers");
}

BandedSymmetric jac_S(const JacobiParams& low, const JacobiParams& high, size_t N) {
    require_even_step(low, high);
    const double a = low.alpha, b = low.beta, g = high.alpha, d = high.beta;
    const double cp = 0.25 * (g * g - a * a);
    const double cm = 0.25 * (d * d - b * b);
    const double c0 = 0.5 * (g * d + g + d - a * b - a - b);
    JacobiMultOps ops = jac_mult_ops(low, N);
    BandedSymmetric S(N, 2);
    for (int k = 0; k <= 2; ++k)
        for (size_t i = 0; i + k < N; ++i)
            S.diagonals[k][i] = cp * ops.Mp.diagonals[k][i] + cm * ops.Mm.diagonals[k][i] -
                                c0 * ops.M.diagonals[k][i];
    return S;
}

BandedUpper jac_cholesky(const JacobiParams& p, size_t N) {
    BandedUpper R(N, 2);
    for (size_t i = 0; i < N; ++i) R.diagonals[0][i] = jac_chol_e(static_cast<int>(i) + 1, p);
    for (size_t i = 0; i + 1 < N; ++i) R.diagonals[1][i] = jac_chol_f(static_cast<int>(i) + 1, p);
    for (size_t i = 0; i + 2 < N; ++i) R.diagonals[2][i] = jac_chol_g(static_cast<int>(i) + 1, p);
    return R;
}

BandedUpper jac_cholesky_recurrence(const JacobiParams& p, size_t N) {
    // assemble M = M1 M2 and factor it, all in extended precision
    const size_t Ne = N + 2;
    const long double a = p.alpha, b = p.beta;
    std::vector<long double> ad(Ne), bo(Ne);  // tridiagonal x-multiplication pieces
    for (size_t i = 0; i < Ne; ++i) {
        long double n = static_cast<long double>(i);
        ad[i] = i == 0 ? (b - a) / (a + b + 2)
                       : (b - a) * (b + a) / ((2 * n + a + b) * (2 * n + a + b + 2));
    }
    for (size_t i = 1; i < Ne; ++i) {
        long double n = static_cast<long double>(i);
        long double t = 2 * n + a + b;
        bo[i] = i == 1 ? 2.0L * sqrtl((1 + a) * (1 + b) / ((2 + a + b) * (2 + a + b) * (3 + a + b)))
                       : 2.0L * sqrtl(n * (n + a) * (n + b) * (n + a + b) /
                                      ((t - 1) * t * t * (t + 1)));
    }
    // pentadiagonal entries of I - X^2
    auto Mat = [&](size_t i, size_t j) -> long double {
        size_t lo = std::min(i, j), hi = std::max(i, j);
        if (hi - lo > 2) return 0.0L;
        if (hi == lo) {
            long double s = 1.0L - ad[i] * ad[i] - bo[i] * bo[i];
            if (i + 1 < Ne) s -= bo[i + 1] * bo[i + 1];
            return s;
        }
        if (hi - lo == 1) return -bo[hi] * (ad[lo] + ad[hi]);
        return -bo[lo + 1] * bo[lo + 2];
    };
    std::vector<std::array<long double, 3>> R(N, {0.0L, 0.0L, 0.0L});
    auto Rat = [&](size_t i, size_t j) -> long double {
        return (j >= i && j - i <= 2) ? R[i][j - i] : 0.0L;
    };
    for (size_t i = 0; i < N; ++i) {
        long double s = Mat(i, i);
        for (size_t r = i >= 2 ? i - 2 : 0; r < i; ++r) s -= Rat(r, i) * Rat(r, i);
        if (!(s > 0.0L)) throw numerical_error("jac_cholesky_recurrence: lost positivity");
        R[i][0] = sqrtl(s);
        for (size_t j = i + 1; j <= i + 2 && j < N; ++j) {
            long double t = Mat(i, j);
            for (size_t r = j >= 2 ? j - 2 : 0; r < i; ++r) t -= Rat(r, i) * Rat(r, j);
            R[i][j - i] = t / R[i][0];
        }
    }
    BandedUpper out(N, 2);
    for (size_t i = 0; i < N; ++i)
        for (size_t k = 0; k <= 2 && i + k < N; ++k)
            out.diagonals[k][i] = static_cast<double>(R[i][k]);
    return out;
}

JacobiRinvDiagonals jac_Rinv_rows(const JacobiParams& p, size_t N) {
    JacobiRinvDiagonals Z;
    Z.d0.resize(N);
    Z.d1.resize(N >= 1 ? N - 1 : 0);
    Z.d2.resize(N >= 2 ? N - 2 : 0);
    for (size_t i = 0; i < N; ++i) Z.d0[i] = jac_rinv_d0(static_cast<int>(i) + 1, p);
    for (size_t i = 0; i + 1 < N; ++i) Z.d1[i] = jac_rinv_d1(static_cast<int>(i) + 1, p);
    for (size_t i = 0; i + 2 < N; ++i) Z.d2[i] = jac_rinv_d2(static_cast<int>(i) + 1, p);
    return Z;
}

JacobiRinvDiagonals jac_Rinv_rows_solve(const JacobiParams& p, size_t N) {
    BandedUpper R = jac_cholesky(p, N);
    JacobiRinvDiagonals Z;
    Z.d0.resize(N);
    Z.d1.resize(N >= 1 ? N - 1 : 0);
    Z.d2.resize(N >= 2 ? N - 2 : 0);
    // back-substitute R Z = I three diagonals up from the main one
    for (size_t j = 0; j < N; ++j) Z.d0[j] = 1.0 / R.at(j, j);
    for (size_t j = 1; j < N; ++j)
        Z.d1[j - 1] = -(R.at(j - 1, j) * Z.d0[j]) / R.at(j - 1, j - 1);
    for (size_t j = 2; j < N; ++j)
        Z.d2[j - 2] = -(R.at(j - 2, j - 1) * Z.d1[j - 1] + R.at(j - 2, j) * Z.d0[j]) / R.at(j - 2, j - 2);
    return Z;
}

BandedSymmetric jac_RSRinv(const JacobiParams& low, const JacobiParams& high, size_t N) {
    BandedSymmetric S = jac_S(low, high, N);
    BandedUpper R = jac_cholesky(low, N);
    JacobiRinvDiagonals Zi = jac_Rinv_rows(low, N);
    auto Rinv = [&](size_t i, size_t j) -> double {  // only the three stored diagonals
        if (j < i || j - i > 2) return 0.0;
        if (j == i) return Zi.d0[i];
        if (j == i + 1) return Zi.d1[i];
        return Zi.d2[i];
    };
    const double snorm = S.max_abs_entry();
    BandedSymmetric P(N, 2);
    // lower triangle of R S R^{-1}: rows reach l in [i-2, j]; j <= i makes every
    // R^{-1}_{l,j} one of the stored diagonals
    auto lower_entry = [&](size_t i, size_t j) {
        double s = 0.0;
        for (size_t k = i; k <= i + 2 && k < N; ++k) {
            double rik = R.at(i, k);
            if (rik == 0.0) continue;
            size_t lmin = k >= 2 ? k - 2 : 0;
            for (size_t l = lmin; l <= std::min(k + 2, j); ++l) s += rik * S.at(k, l) * Rinv(l, j);
        }
        return s;
    };
    // upper triangle via the transposed product R^{-T} S R^T
    auto upper_entry = [&](size_t i, size_t j) {
        double s = 0.0;
        for (size_t k = i >= 2 ? i - 2 : 0; k <= i; ++k) {
            double rki = Rinv(k, i);
            if (rki == 0.0) continue;
            for (size_t l = j; l <= j + 2 && l < N; ++l) {
                if (l + 2 < k || l > k + 2) continue;
                s += rki * S.at(k, l) * R.at(j, l);
            }
        }
        return s;
    };
    for (size_t i = 0; i < N; ++i) {
        for (size_t k = 0; k <= 2 && i + k < N; ++k) {
            double vu = upper_entry(i, i + k);
            double vl = lower_entry(i + k, i);
            bool interior = i + k + 6 < N;
            if (interior && std::abs(vu - vl) > 1e-8 * std::max(1.0, snorm))
                throw numerical_error("jac_RSRinv: commutator identity violated numerically");
            P.diagonals[k][i] = 0.5 * (vu + vl);
        }
    }
    return P;
}

DiagonalOp jac_D(const JacobiParams& p, size_t N) {
    DiagonalOp D;
    D.entries.resize(N);
    for (size_t i = 0; i < N; ++i) {
        double nd = static_cast<double>(i);
        D.entries[i] = nd * (nd + p.alpha + p.beta + 1.0);
    }
    return D;
}

} // namespace hpt
