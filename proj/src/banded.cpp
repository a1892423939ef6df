#include "hpt/banded.hpp"

#include <cmath>
#include <string>

namespace hpt {

BandMatrix band_multiply(const BandMatrix& A, const BandMatrix& B) {
    if (A.size() != B.size()) throw domain_error("band_multiply: size mismatch");
    const size_t n = A.size();
    BandMatrix C(n, A.lower() + B.lower(), A.upper() + B.upper());
    for (size_t i = 0; i < n; ++i) {
        size_t kmin = i >= static_cast<size_t>(A.lower()) ? i - A.lower() : 0;
        size_t kmax = std::min(n - 1, i + static_cast<size_t>(A.upper()));
        long jlo = static_cast<long>(i) - C.lower(), jhi = static_cast<long>(i) + C.upper();
        for (long j = std::max<long>(0, jlo); j <= std::min<long>(n - 1, jhi); ++j) {
            double s = 0.0;
            for (size_t k = kmin; k <= kmax; ++k) s += A.at(i, k) * B.at(k, static_cast<size_t>(j));
            C.set(i, static_cast<size_t>(j), s);
        }
    }
    return C;
}

std::vector<double> BandedSymmetric::multiply(const std::vector<double>& x) const {
    if (x.size() != size) throw domain_error("BandedSymmetric::multiply: length mismatch");
    std::vector<double> y(size, 0.0);
    for (size_t i = 0; i < size; ++i) {
        double s = diagonals[0][i] * x[i];
        for (int k = 1; k <= half_bandwidth; ++k) {
            if (i + k < size) s += diagonals[k][i] * x[i + k];
            if (i >= static_cast<size_t>(k)) s += diagonals[k][i - k] * x[i - k];
        }
        y[i] = s;
    }
    return y;
}

BandMatrix BandedSymmetric::to_band() const {
    BandMatrix B(size, half_bandwidth, half_bandwidth);
    for (int k = 0; k <= half_bandwidth; ++k)
        for (size_t i = 0; i + k < size; ++i) {
            B.set(i, i + k, diagonals[k][i]);
            if (k) B.set(i + k, i, diagonals[k][i]);
        }
    return B;
}

DenseMatrix BandedSymmetric::to_dense() const { return to_band().to_dense(); }

double BandedSymmetric::max_abs_entry() const {
    double m = 0.0;
    for (const auto& d : diagonals)
        for (double v : d) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> BandedUpper::multiply(const std::vector<double>& x) const {
    if (x.size() != size) throw domain_error("BandedUpper::multiply: length mismatch");
    std::vector<double> y(size, 0.0);
    for (size_t i = 0; i < size; ++i) {
        double s = 0.0;
        for (int k = 0; k <= bandwidth && i + k < size; ++k) s += diagonals[k][i] * x[i + k];
        y[i] = s;
    }
    return y;
}

std::vector<double> BandedUpper::multiply_transposed(const std::vector<double>& x) const {
    if (x.size() != size) throw domain_error("BandedUpper::multiply_transposed: length mismatch");
    std::vector<double> y(size, 0.0);
    for (size_t i = 0; i < size; ++i)
        for (int k = 0; k <= bandwidth && i + k < size; ++k) y[i + k] += diagonals[k][i] * x[i];
    return y;
}

std::vector<double> BandedUpper::solve(const std::vector<double>& b) const {
    if (b.size() != size) throw domain_error("BandedUpper::solve: length mismatch");
    std::vector<double> x(b);
    for (size_t ii = size; ii-- > 0;) {
        double s = x[ii];
        for (int k = 1; k <= bandwidth && ii + k < size; ++k) s -= diagonals[k][ii] * x[ii + k];
        x[ii] = s / diagonals[0][ii];
    }
    return x;
}

std::vector<double> BandedUpper::solve_transposed(const std::vector<double>& b) const {
    if (b.size() != size) throw domain_error("BandedUpper::solve_transposed: length mismatch");
    std::vector<double> x(b);
    for (size_t i = 0; i < size; ++i) {
        double s = x[i];
        for (int k = 1; k <= bandwidth && i >= static_cast<size_t>(k); ++k)
            s -= diagonals[k][i - k] * x[i - k];
        x[i] = s / diagonals[0][i];
    }
    return x;
}

BandMatrix BandedUpper::to_band() const {
    BandMatrix B(size, 0, bandwidth);
    for (int k = 0; k <= bandwidth; ++k)
        for (size_t i = 0; i + k < size; ++i) B.set(i, i + k, diagonals[k][i]);
    return B;
}

DenseMatrix BandedUpper::to_dense() const { return to_band().to_dense(); }

BandedSymmetric symmetric_from_band(const BandMatrix& A, int hb, double tol, const char* context) {
    const size_t n = A.size();
    double scale = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (long k = -A.lower(); k <= A.upper(); ++k) {
            long j = static_cast<long>(i) + k;
            if (j >= 0 && j < static_cast<long>(n))
                scale = std::max(scale, std::abs(A.at(i, static_cast<size_t>(j))));
        }
    BandedSymmetric S(n, hb);
    for (size_t i = 0; i < n; ++i) {
        for (long k = std::max<long>(0, static_cast<long>(i) - A.lower());
             k <= std::min<long>(n - 1, static_cast<long>(i) + A.upper()); ++k) {
            size_t j = static_cast<size_t>(k);
            if (j < i) continue;
            double v = 0.5 * (A.at(i, j) + A.at(j, i));
            double asym = std::abs(A.at(i, j) - A.at(j, i));
            if (asym > tol * std::max(1.0, scale))
                throw numerical_error(std::string(context) + ": asymmetry above tolerance");
            if (j - i > static_cast<size_t>(hb)) {
                if (std::abs(v) > tol * std::max(1.0, scale))
                    throw numerical_error(std::string(context) + ": fill beyond bandwidth");
                continue;
            }
            S.set(i, j, v);
        }
    }
    return S;
}

} // namespace hpt
