#ifndef HPT_SKELETON_HPP
#define HPT_SKELETON_HPP

#include <iosfwd>
#include <string>

#include "hpt/gevp.hpp"

namespace hpt {

// triangular coefficient array: rows are degrees 0..n, columns are layers.
// sphere/disk columns: [m=0, +1, -1, +2, -2, ...]; triangle columns: m = 0..n.
// entries with no structural meaning stay exact zeros.
struct CoefficientBlock {
    GeometryKind kind;
    int degree = 0;
    DenseMatrix values;  // (degree+1) x num_columns

    static CoefficientBlock zeros(const GeometryKind& kind, int degree);
    size_t num_columns() const;
    static size_t column_count(const GeometryKind& kind, int degree);
    static int column_order(const GeometryKind& kind, size_t col);  // signed order m
};

enum class Direction { ToBase, FromBase };

// one spectral decomposition of the dyadic tree: an arrow between block-base layers
// within one parity family
struct PlanNode {
    int level = 0;        // dyadic level, 1 = widest span
    int source_base = 0;  // source layer (parity offset included)
    int target_base = 0;
    LayerDecomposition dec;  // numerics; empty until precompute
    bool computed = false;
    double seconds = 0.0;
};

struct CostLedger {
    double precompute_seconds = 0.0;
    size_t storage_bytes = 0;
};

struct TransformPlan {
    GeometryKind kind;
    int degree = 0;
    int block = 0;  // layer span b of one block
    std::vector<PlanNode> nodes;
    bool precomputed = false;
    bool cache_givens = false;  // benchmarking toggle: trade the superoptimal storage
                                // for materialized rotation coefficients
    CostLedger ledger;

    size_t num_blocks() const;
    int parity_families() const;  // 2 for sphere/disk, 1 for triangle
    size_t block_of_layer(int m) const;
    int base_layer(int m) const;  // block base of m's parity family
    const PlanNode& node_for(int source_base) const;
};

// block = 0 requests the auto policy b = round(sqrt(n)) (clamped to >= 2, even for the
// sphere/disk parity families); the skeleton carries no numerics yet
TransformPlan build_plan(const GeometryKind& kind, int degree, int block = 0);

// fill every LayerDecomposition; independent nodes run concurrently; idempotent
void precompute(TransformPlan& plan, unsigned threads = 0);

CoefficientBlock execute(const TransformPlan& plan, const CoefficientBlock& coeffs,
                         Direction direction, unsigned threads = 0);

struct NodeCost {
    int level = 0;
    int source_base = 0;
    int target_base = 0;
    size_t rows = 0, cols = 0;
    double precompute_seconds = 0.0;  // measured Pi
    double apply_seconds = 0.0;       // measured Phi on a probe batch
};

struct CostReport {
    size_t decomposition_count = 0;             // all parity families
    size_t decompositions_per_parity = 0;
    size_t max_path_length = 0;                 // decompositions on any layer's path
    size_t path_bound = 0;                      // ceil(log2(ceil(n/b)))
    unsigned long long givens_rotations = 0;    // applied per to_base execution
    unsigned long long all_givens_rotations = 0;  // pure-Givens reference path
    size_t storage_bytes = 0;
    double precompute_seconds = 0.0;
    std::vector<NodeCost> nodes;
    std::string table() const;                  // aligned human-readable summary
};

CostReport cost_report(const TransformPlan& plan);

void serialize(const TransformPlan& plan, std::ostream& sink);
TransformPlan deserialize(std::istream& source);
void save_plan(const TransformPlan& plan, const std::string& path);
TransformPlan load_plan(const std::string& path);

void write_coefficients(const CoefficientBlock& block, std::ostream& sink);
CoefficientBlock read_coefficients(std::istream& source);
void save_coefficients(const CoefficientBlock& block, const std::string& path);
CoefficientBlock load_coefficients(const std::string& path);

} // namespace hpt

#endif
