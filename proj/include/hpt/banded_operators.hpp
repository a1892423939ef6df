#ifndef HPT_BANDED_OPERATORS_HPP
#define HPT_BANDED_OPERATORS_HPP

#include "hpt/banded.hpp"
#include "hpt/special_functions.hpp"

namespace hpt {

// ---- spherical harmonic operators (all formulas 1-based in n; basis element n
// ---- corresponds to degree l = n-1+m; the API is 0-based in the row index) ----

double sh_mult_a(int n, int m);  // diagonal of multiplication by 1-x^2
double sh_mult_b(int n, int m);  // second superdiagonal
double sh_chol_c(int n, int m);
double sh_chol_d(int n, int m);
double sh_rrt_e(int n, int m);
double sh_rrt_f(int n, int m);
double sh_rdrt_g(int n, int m);
double sh_rdrt_h(int n, int m);

BandedSymmetric sh_mult_M(int m, size_t N);   // pentadiagonal, odd superdiagonal zero
BandedUpper sh_cholesky_R(int m, size_t N);   // closed form c,d
BandedSymmetric sh_RRt(int m, size_t N);      // closed form e,f
BandedSymmetric sh_RDRt(int m, size_t N);     // closed form g,h
DiagonalOp sh_D(int m, size_t N);             // l(l+1) scaling

// independent paths from the Appendix proof relations; positivity failure throws
BandedUpper sh_cholesky_R_recurrence(int m, size_t N);
BandedSymmetric sh_RRt_recurrence(int m, size_t N);
BandedSymmetric sh_RDRt_recurrence(int m, size_t N);

// ---- inverse multiplication operator (Theorem-style semiseparable form) ----

// entries vanish for l+n odd; otherwise u_{min} * w_{max} with severe factorial
// growth/decay, kept as log magnitudes
class SemiseparableSym {
public:
    SemiseparableSym(int m, size_t N);
    size_t size() const { return logu_.size(); }
    int order() const { return m_; }
    double entry(size_t l, size_t n) const;                    // may be +-inf on overflow
    void log_entry(size_t l, size_t n, double& logmag, int& sign) const;
    DenseMatrix section() const;

private:
    int m_;
    std::vector<double> logu_, logw_;
};

double sh_minv_entry(long l, long n, int m);
SemiseparableSym sh_minv_section(int m, size_t N);

// ---- weighted Jacobi operators (Appendix closed forms; 1-based n) ----

double jac_m1_a(int n, const JacobiParams& p);  // multiplication by 1+x, diagonal
double jac_m1_b(int n, const JacobiParams& p);  // off-diagonal
double jac_m2_c(int n, const JacobiParams& p);  // multiplication by 1-x, diagonal
double jac_m2_d(int n, const JacobiParams& p);
double jac_chol_e(int n, const JacobiParams& p);
double jac_chol_f(int n, const JacobiParams& p);
double jac_chol_g(int n, const JacobiParams& p);
double jac_rinv_d0(int n, const JacobiParams& p);  // R^{-1}_{n,n}
double jac_rinv_d1(int n, const JacobiParams& p);  // R^{-1}_{n,n+1}
double jac_rinv_d2(int n, const JacobiParams& p);  // R^{-1}_{n,n+2}

struct JacobiMultOps {
    BandedSymmetric M1;  // 1+x, tridiagonal
    BandedSymmetric M2;  // 1-x, tridiagonal
    BandedSymmetric M;   // (1-x^2) = M1 M2, pentadiagonal
    BandedSymmetric Mp;  // (1+x)^2
    BandedSymmetric Mm;  // (1-x)^2
};

JacobiMultOps jac_mult_ops(const JacobiParams& p, size_t N);

// S of the symbolic eigenproblem; high-low parameter gaps must be nonnegative even
// integers (terminating-expansion regime)
BandedSymmetric jac_S(const JacobiParams& low, const JacobiParams& high, size_t N);

BandedUpper jac_cholesky(const JacobiParams& p, size_t N);             // e,f,g closed forms
BandedUpper jac_cholesky_recurrence(const JacobiParams& p, size_t N);  // banded Cholesky of M

struct JacobiRinvDiagonals {
    std::vector<double> d0, d1, d2;  // main and first two superdiagonals of R^{-1}
};
JacobiRinvDiagonals jac_Rinv_rows(const JacobiParams& p, size_t N);        // closed forms
JacobiRinvDiagonals jac_Rinv_rows_solve(const JacobiParams& p, size_t N);  // from R R^{-1} = I

// R S R^{-1} = R^{-T} S R^T: band computed two-sided from the three stored R^{-1}
// diagonals, cross-checked, symmetrized, truncated to half-bandwidth 2
BandedSymmetric jac_RSRinv(const JacobiParams& low, const JacobiParams& high, size_t N);

DiagonalOp jac_D(const JacobiParams& p, size_t N);  // n(n+alpha+beta+1), 0-based

} // namespace hpt

#endif
