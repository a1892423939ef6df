#ifndef HPT_GEVP_HPP
#define HPT_GEVP_HPP

#include <memory>
#include <optional>

#include "hpt/banded_operators.hpp"
#include "hpt/dc_eigensolver.hpp"
#include "hpt/givens.hpp"

namespace hpt {

struct SymDefPencil {
    BandedSymmetric A;
    BandedSymmetric B;  // positive-definite
    size_t size() const { return A.size; }
};

// even/odd split of a parity-sparse pentadiagonal pencil into two tridiagonal pencils
struct ShuffledPencils {
    SymTridiagonal A_even, B_even;
    SymTridiagonal A_odd, B_odd;
    std::vector<size_t> perm;  // shuffled[i] = x[perm[i]]
};

ShuffledPencils perfect_shuffle(const SymDefPencil& pencil, double structure_tol = 0.0);

std::vector<double> shuffle_vector(const std::vector<double>& x, const std::vector<size_t>& perm);
std::vector<double> unshuffle_vector(const std::vector<double>& x, const std::vector<size_t>& perm);

// V^T (T - lambda S) V = Lambda - lambda I with V^T S V = I
class GeneralizedDecomposition {
public:
    GeneralizedDecomposition() = default;
    GeneralizedDecomposition(std::vector<double> evals, DCTree tree);
    GeneralizedDecomposition(std::vector<double> evals, DenseMatrix V);

    const std::vector<double>& eigenvalues() const { return eigenvalues_; }
    size_t size() const { return eigenvalues_.size(); }
    std::vector<double> apply(const std::vector<double>& x, bool transpose = false) const;
    DenseMatrix materialize() const;

    // ||V^T B V - I||_max, measured against the given B
    double b_orthogonality_residual(const BandedSymmetric& B) const;
    double b_orthogonality_residual(const SymTridiagonal& B) const;

private:
    std::vector<double> eigenvalues_;
    std::optional<DCTree> tree_;
    std::optional<DenseMatrix> dense_;
};

// Borges-Gragg style divide-and-conquer for the symmetric-definite tridiagonal pencil
GeneralizedDecomposition sd_tridiag_gevp(const SymTridiagonal& T, const SymTridiagonal& S,
                                         size_t leaf_size = 32,
                                         const KernelSummation& ks = direct_kernel_backend());

// dense reference: Cholesky of B, two-sided transform, cyclic Jacobi, back substitution
GeneralizedDecomposition dense_reference_gevp(const DenseMatrix& A, const DenseMatrix& B);

// ---- layer-to-layer connection operators ----

struct LayerDecomposition {
    GeometryKind kind;
    int target_layer = 0;  // m, or the disk/triangle analogue
    int source_layer = 0;  // mu
    size_t rows = 0;       // target-space dimension kept (N of the spec)
    size_t cols = 0;       // number of source degrees
    size_t buffer = 0;     // extra section rows p used during the solve
    std::vector<double> eigenvalues;  // ascending, one per column
    DenseMatrix U;                    // rows x cols connection operator, orthonormal columns
    double validation_residual = 0.0;
    double cond_R_estimate = 0.0;  // ||R||_1 ||R^{-1}||_1 growth proxy (reported, not promised)

    std::vector<double> apply(const std::vector<double>& x) const { return U.multiply(x); }
    std::vector<double> apply_transposed(const std::vector<double>& x) const {
        return U.multiply_transposed(x);
    }
};

// number of degrees present in layer `layer` up to top degree n
size_t layer_degree_count(const GeometryKind& kind, int layer, int n);

// spectral construction of the connection operator taking expansions in the source
// layer's basis to the target layer's basis (top degree n, buffer p; p = 0 picks the
// default policy max(16, N/4))
LayerDecomposition layer_decomposition(const GeometryKind& kind, int target_layer,
                                       int source_layer, int n, size_t p = 0);

// all-Givens construction of the same operator (route-equivalence oracle and the
// within-block execution reference)
DenseMatrix givens_connection_dense(const GeometryKind& kind, int target_layer, int source_layer,
                                    int n);

// the Givens sequence for one neighbour step ending at target layer `target`
GivensSequence layer_step_sequence(const GeometryKind& kind, int target, size_t cols);

// layer spacing per geometry: 2 for sphere/disk, 1 for triangle
int layer_stride(const GeometryKind& kind);

} // namespace hpt

#endif
