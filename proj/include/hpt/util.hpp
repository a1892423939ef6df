#ifndef HPT_UTIL_HPP
#define HPT_UTIL_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hpt {

using std::size_t;

inline constexpr double eps = std::numeric_limits<double>::epsilon();

struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0, comp_ = 0.0;
};

// log Gamma(x+1) ... log of rising products appear throughout the closed forms
inline double log_factorial(double x) { return std::lgamma(x + 1.0); }

// column-major dense matrix, minimal on purpose
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

    double& operator()(size_t i, size_t j) { return a_[i + rows_ * j]; }
    double operator()(size_t i, size_t j) const { return a_[i + rows_ * j]; }
    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }
    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }
    const std::vector<double>& storage() const { return a_; }
    std::vector<double>& storage() { return a_; }

    static DenseMatrix identity(size_t n) {
        DenseMatrix I(n, n);
        for (size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    DenseMatrix transposed() const {
        DenseMatrix T(cols_, rows_);
        for (size_t j = 0; j < cols_; ++j)
            for (size_t i = 0; i < rows_; ++i) T(j, i) = (*this)(i, j);
        return T;
    }

    std::vector<double> multiply(const std::vector<double>& x) const {
        if (x.size() != cols_) throw domain_error("DenseMatrix::multiply: length mismatch");
        std::vector<double> y(rows_, 0.0);
        for (size_t j = 0; j < cols_; ++j) {
            double xj = x[j];
            const double* col = a_.data() + rows_ * j;
            for (size_t i = 0; i < rows_; ++i) y[i] += col[i] * xj;
        }
        return y;
    }

    std::vector<double> multiply_transposed(const std::vector<double>& x) const {
        if (x.size() != rows_) throw domain_error("DenseMatrix::multiply_transposed: length mismatch");
        std::vector<double> y(cols_, 0.0);
        for (size_t j = 0; j < cols_; ++j) {
            const double* col = a_.data() + rows_ * j;
            double s = 0.0;
            for (size_t i = 0; i < rows_; ++i) s += col[i] * x[i];
            y[j] = s;
        }
        return y;
    }

private:
    size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

inline DenseMatrix operator*(const DenseMatrix& A, const DenseMatrix& B) {
    if (A.cols() != B.rows()) throw domain_error("DenseMatrix product: shape mismatch");
    DenseMatrix C(A.rows(), B.cols());
    for (size_t j = 0; j < B.cols(); ++j)
        for (size_t k = 0; k < A.cols(); ++k) {
            double b = B(k, j);
            if (b == 0.0) continue;
            for (size_t i = 0; i < A.rows(); ++i) C(i, j) += A(i, k) * b;
        }
    return C;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Deterministic work splitter: partitioning depends only on n, never on thread count
// or timing, so results are bitwise reproducible.
void parallel_for(size_t n, const std::function<void(size_t)>& fn, unsigned threads = 0);

unsigned hardware_threads();

} // namespace hpt

#endif
