#ifndef HPT_BANDED_HPP
#define HPT_BANDED_HPP

#include <vector>

#include "hpt/util.hpp"

namespace hpt {

// General banded matrix, diagonal storage. Offsets run from -lower to +upper;
// diagonal k holds entries (i, i+k).
class BandMatrix {
public:
    BandMatrix(size_t n, int lower, int upper)
        : n_(n), lo_(lower), hi_(upper), diags_(static_cast<size_t>(lower + upper + 1)) {
        for (int k = -lo_; k <= hi_; ++k)
            diags_[static_cast<size_t>(k + lo_)].assign(n_ - static_cast<size_t>(std::abs(k)), 0.0);
    }
    size_t size() const { return n_; }
    int lower() const { return lo_; }
    int upper() const { return hi_; }

    double at(size_t i, size_t j) const {
        long k = static_cast<long>(j) - static_cast<long>(i);
        if (k < -lo_ || k > hi_) return 0.0;
        return diags_[static_cast<size_t>(k + lo_)][k >= 0 ? i : j];
    }
    void set(size_t i, size_t j, double v) {
        long k = static_cast<long>(j) - static_cast<long>(i);
        if (k < -lo_ || k > hi_) throw domain_error("BandMatrix::set outside band");
        diags_[static_cast<size_t>(k + lo_)][k >= 0 ? i : j] = v;
    }

    DenseMatrix to_dense() const {
        DenseMatrix D(n_, n_);
        for (size_t i = 0; i < n_; ++i)
            for (size_t j = 0; j < n_; ++j) D(i, j) = at(i, j);
        return D;
    }

private:
    size_t n_;
    int lo_, hi_;
    std::vector<std::vector<double>> diags_;
};

BandMatrix band_multiply(const BandMatrix& A, const BandMatrix& B);

// Symmetric band matrix; only the main and upper diagonals are stored.
struct BandedSymmetric {
    size_t size = 0;
    int half_bandwidth = 0;
    std::vector<std::vector<double>> diagonals;  // diagonals[k]: entries (i, i+k), k = 0..hb

    BandedSymmetric() = default;
    BandedSymmetric(size_t n, int hb) : size(n), half_bandwidth(hb), diagonals(hb + 1) {
        for (int k = 0; k <= hb; ++k) diagonals[k].assign(n - static_cast<size_t>(k), 0.0);
    }

    double at(size_t i, size_t j) const {
        size_t lo = std::min(i, j), hi = std::max(i, j);
        size_t k = hi - lo;
        if (k > static_cast<size_t>(half_bandwidth)) return 0.0;
        return diagonals[k][lo];
    }
    void set(size_t i, size_t j, double v) {
        size_t lo = std::min(i, j), hi = std::max(i, j);
        diagonals[hi - lo].at(lo) = v;
    }

    std::vector<double> multiply(const std::vector<double>& x) const;
    BandMatrix to_band() const;
    DenseMatrix to_dense() const;
    double max_abs_entry() const;
};

// Upper-triangular band matrix (Cholesky factors).
struct BandedUpper {
    size_t size = 0;
    int bandwidth = 0;
    std::vector<std::vector<double>> diagonals;  // diagonals[k]: entries (i, i+k), k = 0..bw

    BandedUpper() = default;
    BandedUpper(size_t n, int bw) : size(n), bandwidth(bw), diagonals(bw + 1) {
        for (int k = 0; k <= bw; ++k) diagonals[k].assign(n - static_cast<size_t>(k), 0.0);
    }

    double at(size_t i, size_t j) const {
        if (j < i || j - i > static_cast<size_t>(bandwidth)) return 0.0;
        return diagonals[j - i][i];
    }
    void set(size_t i, size_t j, double v) {
        if (j < i || j - i > static_cast<size_t>(bandwidth))
            throw domain_error("BandedUpper::set outside band");
        diagonals[j - i][i] = v;
    }

    std::vector<double> multiply(const std::vector<double>& x) const;             // R x
    std::vector<double> multiply_transposed(const std::vector<double>& x) const;  // R^T x
    std::vector<double> solve(const std::vector<double>& b) const;                // R x = b
    std::vector<double> solve_transposed(const std::vector<double>& b) const;     // R^T x = b
    BandMatrix to_band() const;
    DenseMatrix to_dense() const;
};

struct DiagonalOp {
    std::vector<double> entries;
    size_t size() const { return entries.size(); }
};

// Fold a numerically-symmetric band product into BandedSymmetric, verifying both the
// symmetry and that nothing beyond the requested half-bandwidth survives.
BandedSymmetric symmetric_from_band(const BandMatrix& A, int hb, double tol, const char* context);

} // namespace hpt

#endif
