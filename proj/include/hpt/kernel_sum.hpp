#ifndef HPT_KERNEL_SUM_HPP
#define HPT_KERNEL_SUM_HPP

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace hpt {

// A point expressed relative to a base array: value = base[anchor] + offset, or a plain
// coordinate when anchor == npos. Differences between anchored points are computed as
// (base[i]-base[j]) + (offset_i-offset_j), which keeps tiny pole-query gaps to high
// relative accuracy -- the property the structured eigenvector products depend on.
struct AnchoredPoint {
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    std::size_t anchor = npos;
    double offset = 0.0;
};

// Batched Cauchy-kernel sums: out[i] = sum_j w[j] / (poles[j] - queries[i])^power for
// power in {1,2,3}. The shipped backend is exact-direct O(mn); a fast summation backend
// (treecode/FMM) may be dropped in behind the same contract.
class KernelSummation {
public:
    virtual ~KernelSummation() = default;
    virtual void cauchy_sums(std::span<const double> base, std::span<const AnchoredPoint> poles,
                             std::span<const double> weights,
                             std::span<const AnchoredPoint> queries, int power,
                             std::span<double> out) const = 0;
    virtual double stated_accuracy() const = 0;  // max relative error per sum
    virtual const char* name() const = 0;
};

class DirectKernelSum final : public KernelSummation {
public:
    void cauchy_sums(std::span<const double> base, std::span<const AnchoredPoint> poles,
                     std::span<const double> weights, std::span<const AnchoredPoint> queries,
                     int power, std::span<double> out) const override;
    double stated_accuracy() const override { return 0.0; }  // exact up to rounding
    const char* name() const override { return "direct"; }
};

const KernelSummation& direct_kernel_backend();

} // namespace hpt

#endif
