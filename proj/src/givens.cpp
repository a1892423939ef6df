#include "hpt/givens.hpp"

#include <cmath>

namespace hpt {

GivensSequence::GivensSequence(GivensFamily family, double a, double b, int m, size_t cols)
    : family_(family), alpha_(a), beta_(b), m_(m), cols_(cols),
      stride_(family == GivensFamily::SphericalHarmonic ? 2 : 1) {}

void GivensSequence::coeffs(size_t k, double& s, double& c) const {
    const double n = static_cast<double>(k);
    switch (family_) {
    case GivensFamily::SphericalHarmonic: {
        const double m = m_;
        const double den = (n + 2 * m + 3) * (n + 2 * m + 4);
        s = std::sqrt((n + 1) * (n + 2) / den);
        c = std::sqrt((2 * m + 2) * (2 * n + 2 * m + 5) / den);
        return;
    }
    case GivensFamily::JacobiAlphaStep: {
        const double a = alpha_, b = beta_;
        const double den = (n + a + 2) * (n + a + b + 2);
        s = std::sqrt((n + 1) * (n + b + 1) / den);
        c = std::sqrt((a + 1) * (2 * n + a + b + 3) / den);
        return;
    }
    case GivensFamily::JacobiBetaStep: {
        const double a = alpha_, b = beta_;
        const double den = (n + b + 2) * (n + a + b + 2);
        s = -std::sqrt((n + 1) * (n + a + 1) / den);
        c = std::sqrt((b + 1) * (2 * n + a + b + 3) / den);
        return;
    }
    }
    throw domain_error("GivensSequence: unknown family");
}

double GivensSequence::sine(size_t k) const {
    if (k >= cols_) throw domain_error("GivensSequence::sine: index out of range");
    if (cached_) return sines_[k];
    double s, c;
    coeffs(k, s, c);
    return s;
}

double GivensSequence::cosine(size_t k) const {
    if (k >= cols_) throw domain_error("GivensSequence::cosine: index out of range");
    if (cached_) return cosines_[k];
    double s, c;
    coeffs(k, s, c);
    return c;
}

void GivensSequence::enable_cache() {
    if (cached_) return;
    sines_.resize(cols_);
    cosines_.resize(cols_);
    for (size_t k = 0; k < cols_; ++k) coeffs(k, sines_[k], cosines_[k]);
    cached_ = true;
}

void GivensSequence::apply_forward_inplace(double* x, size_t n) const {
    if (n != cols_) throw domain_error("GivensSequence::apply: length mismatch");
    // x must have rows() slots; the trailing stride entries start as zeros.
    // Product order of the theorems: G_{n-1} acts first.
    for (size_t kk = cols_; kk-- > 0;) {
        double s, c;
        if (cached_) { s = sines_[kk]; c = cosines_[kk]; } else coeffs(kk, s, c);
        double lo = x[kk], hi = x[kk + stride_];
        x[kk] = c * lo + s * hi;
        x[kk + stride_] = c * hi - s * lo;
    }
}

void GivensSequence::apply_inverse_inplace(double* x, size_t n) const {
    if (n != rows()) throw domain_error("GivensSequence::apply_inverse: length mismatch");
    for (size_t kk = 0; kk < cols_; ++kk) {
        double s, c;
        if (cached_) { s = sines_[kk]; c = cosines_[kk]; } else coeffs(kk, s, c);
        double lo = x[kk], hi = x[kk + stride_];
        x[kk] = c * lo - s * hi;
        x[kk + stride_] = s * lo + c * hi;
    }
}

std::vector<double> GivensSequence::apply(const std::vector<double>& x) const {
    if (x.size() != cols_) throw domain_error("GivensSequence::apply: length mismatch");
    std::vector<double> y(rows(), 0.0);
    std::copy(x.begin(), x.end(), y.begin());
    apply_forward_inplace(y.data(), cols_);
    return y;
}

std::vector<double> GivensSequence::apply_inverse(const std::vector<double>& y) const {
    if (y.size() != rows()) throw domain_error("GivensSequence::apply_inverse: length mismatch");
    std::vector<double> x(y);
    apply_inverse_inplace(x.data(), x.size());
    x.resize(cols_);
    return x;
}

GivensSequence sh_givens_sequence(int m, size_t cols) {
    if (m < 0) throw domain_error("sh_givens_sequence: m >= 0 required");
    return GivensSequence(GivensFamily::SphericalHarmonic, 0, 0, m, cols);
}

GivensSequence jacobi_givens_sequence(const JacobiParams& p, JacobiStep which, size_t cols) {
    return GivensSequence(which == JacobiStep::AlphaStep ? GivensFamily::JacobiAlphaStep
                                                         : GivensFamily::JacobiBetaStep,
                          p.alpha, p.beta, 0, cols);
}

double sh_connection_entry(int m, long l, long n) {
    if (m < 0 || l < 0 || n < 0) throw domain_error("sh_connection_entry: negative index");
    if (l == n + 2) {
        double nn = static_cast<double>(n);
        return -std::sqrt((nn + 1) * (nn + 2) / ((nn + 2 * m + 3) * (nn + 2 * m + 4)));
    }
    if (l > n || ((l + n) % 2) != 0) return 0.0;
    const double ld = static_cast<double>(l), nd = static_cast<double>(n), md = m;
    // ratio under the square root: (l+2m)!/l! * n!/(n+2m+4)! and the half-integer factors
    if (n + 2 * m + 4 <= 40) {
        double num = 1.0, den = 1.0;
        for (long j = l + 1; j <= l + 2 * m; ++j) num *= static_cast<double>(j);
        for (long j = n + 1; j <= n + 2 * m + 4; ++j) den *= static_cast<double>(j);
        double r = (num / den) * (nd + md + 2.5) / (ld + md + 0.5);
        return (2 * ld + 2 * md + 1) * (2 * md + 2) * std::sqrt(r);
    }
    double lognum = std::lgamma(ld + 2 * md + 1) - std::lgamma(ld + 1) + std::lgamma(nd + 1) -
                    std::lgamma(nd + 2 * md + 5) + std::log(nd + md + 2.5) - std::log(ld + md + 0.5);
    return (2 * ld + 2 * md + 1) * (2 * md + 2) * std::exp(0.5 * lognum);
}

DenseMatrix sh_connection_entries(int m, size_t rows, size_t cols) {
    DenseMatrix C(rows, cols);
    for (size_t n = 0; n < cols; ++n)
        for (size_t l = 0; l < rows; ++l)
            C(l, n) = sh_connection_entry(m, static_cast<long>(l), static_cast<long>(n));
    return C;
}

static bool is_nonneg_int(double x) { return x >= 0.0 && x == std::floor(x); }

double jacobi_connection_entry(const JacobiParams& p, JacobiStep which, long l, long n) {
    if (l < 0 || n < 0) throw domain_error("jacobi_connection_entry: negative index");
    const double a = p.alpha, b = p.beta, ld = static_cast<double>(l), nd = static_cast<double>(n);
    if (which == JacobiStep::AlphaStep) {
        if (l == n + 1)
            return -std::sqrt((nd + 1) * (nd + b + 1) / ((nd + a + 2) * (nd + a + b + 2)));
        if (l > n) return 0.0;
        if (is_nonneg_int(a) && n <= 30) {
            // Gamma ratios collapse to short products for integer alpha
            long ia = static_cast<long>(a);
            double r = (2 * ld + a + b + 1) * (2 * nd + a + b + 3);
            for (long j = 0; j < ia; ++j) r *= (ld + b + 1 + j) * (ld + 1 + j);
            for (long j = 0; j < ia + 2; ++j) r /= (nd + b + 1 + j) * (nd + 1 + j);
            return (a + 1) * std::sqrt(r);
        }
        double lg = std::lgamma(ld + a + b + 1) - std::lgamma(ld + b + 1) + std::lgamma(ld + a + 1) -
                    std::lgamma(ld + 1) - std::lgamma(nd + a + b + 3) + std::lgamma(nd + b + 1) -
                    std::lgamma(nd + a + 3) + std::lgamma(nd + 1);
        lg += std::log(2 * ld + a + b + 1) + std::log(2 * nd + a + b + 3);
        return (a + 1) * std::exp(0.5 * lg);
    }
    // beta step (second parameter lowered), alternating upper signs
    if (l == n + 1)
        return std::sqrt((nd + 1) * (nd + a + 1) / ((nd + b + 2) * (nd + a + b + 2)));
    if (l > n) return 0.0;
    double sign = ((n - l) % 2) ? -1.0 : 1.0;
    double lg = std::lgamma(ld + a + b + 1) - std::lgamma(ld + a + 1) + std::lgamma(ld + b + 1) -
                std::lgamma(ld + 1) - std::lgamma(nd + a + b + 3) + std::lgamma(nd + a + 1) -
                std::lgamma(nd + b + 3) + std::lgamma(nd + 1);
    lg += std::log(2 * ld + a + b + 1) + std::log(2 * nd + a + b + 3);
    return sign * (b + 1) * std::exp(0.5 * lg);
}

DenseMatrix jacobi_connection_entries(const JacobiParams& p, JacobiStep which, size_t rows,
                                      size_t cols) {
    DenseMatrix C(rows, cols);
    for (size_t n = 0; n < cols; ++n)
        for (size_t l = 0; l < rows; ++l)
            C(l, n) = jacobi_connection_entry(p, which, static_cast<long>(l), static_cast<long>(n));
    return C;
}

DenseMatrix dense_from_givens(const GivensSequence& seq) {
    DenseMatrix C(seq.rows(), seq.cols());
    std::vector<double> e(seq.cols(), 0.0);
    for (size_t j = 0; j < seq.cols(); ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        auto col = seq.apply(e);
        for (size_t i = 0; i < seq.rows(); ++i) C(i, j) = col[i];
    }
    return C;
}

} // namespace hpt
