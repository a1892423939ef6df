#include "hpt/kernel_sum.hpp"

#include "hpt/util.hpp"

namespace hpt {

static inline double point_base(std::span<const double> base, const AnchoredPoint& p) {
    return p.anchor == AnchoredPoint::npos ? 0.0 : base[p.anchor];
}

void DirectKernelSum::cauchy_sums(std::span<const double> base,
                                  std::span<const AnchoredPoint> poles,
                                  std::span<const double> weights,
                                  std::span<const AnchoredPoint> queries, int power,
                                  std::span<double> out) const {
    if (poles.size() != weights.size() || out.size() != queries.size())
        throw domain_error("cauchy_sums: size mismatch");
    if (power < 1 || power > 3) throw domain_error("cauchy_sums: power must be 1, 2 or 3");
    for (size_t i = 0; i < queries.size(); ++i) {
        const double qb = point_base(base, queries[i]);
        const double qo = queries[i].offset;
        CompensatedSum acc;
        for (size_t j = 0; j < poles.size(); ++j) {
            double d = (point_base(base, poles[j]) - qb) + (poles[j].offset - qo);
            if (d == 0.0) throw numerical_error("cauchy_sums: query coincides with a pole");
            double t = weights[j] / d;
            if (power >= 2) t /= d;
            if (power == 3) t /= d;
            acc.add(t);
        }
        out[i] = acc.value();
    }
}

const KernelSummation& direct_kernel_backend() {
    static DirectKernelSum backend;
    return backend;
}

} // namespace hpt
