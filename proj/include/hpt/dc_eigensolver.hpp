#ifndef HPT_DC_EIGENSOLVER_HPP
#define HPT_DC_EIGENSOLVER_HPP

#include <memory>
#include <optional>
#include <tuple>
#include <vector>

#include "hpt/kernel_sum.hpp"
#include "hpt/util.hpp"

namespace hpt {

struct SymTridiagonal {
    std::vector<double> diag;
    std::vector<double> off;  // length size()-1
    size_t size() const { return diag.size(); }
    std::vector<double> multiply(const std::vector<double>& x) const;
    double norm_bound() const;  // Gershgorin-style bound on ||T||_2
};

// shaft + spike + tip, spike in the last row/column
struct Arrowhead {
    std::vector<double> shaft;  // nondecreasing
    std::vector<double> spike;  // same length as shaft
    double tip = 0.0;
    size_t size() const { return shaft.size() + 1; }
};

// f(lambda) = lambda - c + sum b_i^2/(a_i - lambda) and derivatives, through the
// kernel-summation contract
struct PickValues {
    std::vector<double> f, df, ddf;
};
PickValues pick_evaluate(const Arrowhead& A, const std::vector<double>& points,
                         int derivative_order,
                         const KernelSummation& ks = direct_kernel_backend());
// anchored variant: the only way to measure residuals of near-pole roots to full
// relative accuracy
PickValues pick_evaluate(const Arrowhead& A, const std::vector<AnchoredPoint>& points,
                         int derivative_order,
                         const KernelSummation& ks = direct_kernel_backend());

// roots in the anchored representation: lambda_i = shaft[anchor_i] + tau_i
struct SecularRoots {
    std::vector<double> lambda;       // ascending
    std::vector<AnchoredPoint> repr;  // anchored to the arrowhead shaft
};

// requires strict interlacing material: sorted shaft, no negligible spike entries
SecularRoots solve_secular_anchored(const Arrowhead& A,
                                    const KernelSummation& ks = direct_kernel_backend());
std::vector<double> solve_secular(const Arrowhead& A,
                                  const KernelSummation& ks = direct_kernel_backend());

// Boley-Golub reconstruction of the nearby arrowhead with exactly the given spectrum
void reconstruct(const Arrowhead& A, const SecularRoots& roots, std::vector<double>& spike_hat,
                 double& tip_hat);

// full conquest of one symmetric arrowhead: deflation, secular roots, reconstruction,
// structured eigenvectors
class ArrowheadDecomposition {
public:
    ArrowheadDecomposition(Arrowhead A, const KernelSummation& ks = direct_kernel_backend());

    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    size_t size() const { return n_; }
    // ||b - b̂||_2 + |c - ĉ|, the nearby-matrix distance bound
    double backward_error() const { return backward_error_; }
    size_t deflation_count() const { return deflated_.size(); }

    // y = Q x (transpose=false) or Q^T x; x indexed by ascending eigenvalue,
    // coordinate order = the input arrowhead's (shaft..., tip)
    std::vector<double> apply(const std::vector<double>& x, bool transpose) const;

    DenseMatrix materialize() const;  // tests only

private:
    struct Rotation {
        size_t i, j;
        double c, s;
    };

    const KernelSummation* ks_;
    size_t n_ = 0;
    std::vector<double> eigenvalues_;

    // deflation record
    std::vector<Rotation> rotations_;
    std::vector<size_t> kept_, deflated_;
    std::vector<double> deflated_values_;

    // reduced arrowhead and its conquest
    std::vector<double> shaft_;      // kept shaft entries (sorted)
    std::vector<double> spike_hat_;  // reconstructed, signs folded in
    SecularRoots roots_;
    std::vector<double> inv_norms_;
    double backward_error_ = 0.0;

    // merged ordering: for each eigen-position, (is_deflated, index within its group)
    std::vector<std::pair<bool, size_t>> order_;
};

// spectral decomposition by recursive divide-and-conquer with arrowhead conquests;
// optionally diagonalizes the symmetric-definite pencil (T, S) in the Borges-Gragg
// fashion (sparse Cholesky of the S-arrowhead relates the pencils)
class DCTree {
public:
    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    size_t size() const { return n_; }

    std::vector<double> apply(const std::vector<double>& x, bool transpose) const;  // Q x / Q^T x
    DenseMatrix materialize() const;

    double max_backward_error() const { return max_backward_error_; }

private:
    friend DCTree eigen_tree(const SymTridiagonal&, const SymTridiagonal*, size_t,
                             const KernelSummation&);
    struct Node {
        // leaf
        DenseMatrix Q;  // dense eigenvectors (columns ascending)
        // internal
        size_t split = 0;
        int left = -1, right = -1;
        std::vector<size_t> sort_perm;  // shaft sort: sorted[i] = unsorted[perm[i]]
        std::unique_ptr<ArrowheadDecomposition> arrow;
        // generalized part (empty for the regular problem)
        std::vector<double> chol_spike;  // s of the S-arrowhead Cholesky
        double chol_theta = 1.0;
        size_t lo = 0, n = 0;  // covered index range
        bool leaf = true;
    };
    void apply_node(int idx, std::vector<double>& x, bool transpose) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    size_t n_ = 0;
    std::vector<double> eigenvalues_;
    double max_backward_error_ = 0.0;
    const KernelSummation* ks_ = nullptr;
};

// regular symmetric tridiagonal eigendecomposition
DCTree eigen(const SymTridiagonal& T, size_t leaf_size = 32,
             const KernelSummation& ks = direct_kernel_backend());

// engine shared with the generalized solver in gevp: S == nullptr means S = I
DCTree eigen_tree(const SymTridiagonal& T, const SymTridiagonal* S, size_t leaf_size,
                  const KernelSummation& ks);

// divide step of the recursion, exposed for tests: returns (T1, T2, coupling a, b, c)
std::tuple<SymTridiagonal, SymTridiagonal, double, double, double> divide(const SymTridiagonal& T,
                                                                          size_t split);

// cyclic-Jacobi dense symmetric eigensolver (leaf and reference path);
// returns ascending eigenvalues, Q columns matching
void jacobi_eigh(const DenseMatrix& A, std::vector<double>& evals, DenseMatrix& Q);

} // namespace hpt

#endif
