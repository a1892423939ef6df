#ifndef HPT_GIVENS_HPP
#define HPT_GIVENS_HPP

#include <cstdint>
#include <vector>

#include "hpt/special_functions.hpp"
#include "hpt/util.hpp"

namespace hpt {

// Which closed-form family generated a sequence's rotations.
enum class GivensFamily : std::uint8_t {
    SphericalHarmonic,  // order step m+2 -> m, stride 2
    JacobiAlphaStep,    // (1-x) P~^{(a+2,b)} -> P~^{(a,b)}, stride 1
    JacobiBetaStep,     // (1+x) P~^{(a,b+2)} -> P~^{(a,b)}, stride 1
};

// A neighbour connection matrix C = G_0 G_1 ... G_{n-1} I_{rows x cols} represented by
// its rotation angles. Coefficients are generated on the fly from the closed forms;
// enable_cache() materializes them for benchmarking the storage trade.
class GivensSequence {
public:
    GivensSequence(GivensFamily family, double a, double b, int m, size_t cols);

    size_t cols() const { return cols_; }
    size_t rows() const { return cols_ + stride_; }
    size_t stride() const { return stride_; }
    GivensFamily family() const { return family_; }

    double sine(size_t k) const;    // s_k of rotation G_k, k < cols()
    double cosine(size_t k) const;  // c_k

    void enable_cache();
    bool cached() const { return cached_; }

    // forward: y = C x (length grows by stride); inverse: x = C^T y (exact left-inverse)
    std::vector<double> apply(const std::vector<double>& x) const;
    std::vector<double> apply_inverse(const std::vector<double>& y) const;

    // in-place kernels on raw storage; n-length input, n+stride output for forward
    void apply_forward_inplace(double* x, size_t n) const;
    void apply_inverse_inplace(double* x, size_t n) const;

private:
    void coeffs(size_t k, double& s, double& c) const;

    GivensFamily family_;
    double alpha_ = 0.0, beta_ = 0.0;  // Jacobi families
    int m_ = 0;                        // spherical harmonic order (target layer)
    size_t cols_;
    size_t stride_;
    bool cached_ = false;
    std::vector<double> sines_, cosines_;
};

// stride-2 sequence for the connection P~_{n+m+2}^{m+2} -> P~_{l+m}^{m}
GivensSequence sh_givens_sequence(int m, size_t cols);

// closed-form entries of the same connection matrix (log-gamma evaluation above the
// direct-product regime)
DenseMatrix sh_connection_entries(int m, size_t rows, size_t cols);
double sh_connection_entry(int m, long l, long n);

enum class JacobiStep { AlphaStep, BetaStep };

GivensSequence jacobi_givens_sequence(const JacobiParams& p, JacobiStep which, size_t cols);

DenseMatrix jacobi_connection_entries(const JacobiParams& p, JacobiStep which, size_t rows,
                                      size_t cols);
double jacobi_connection_entry(const JacobiParams& p, JacobiStep which, long l, long n);

// materialize the product applied to the rectangular identity (test oracle assembly)
DenseMatrix dense_from_givens(const GivensSequence& seq);

} // namespace hpt

#endif
