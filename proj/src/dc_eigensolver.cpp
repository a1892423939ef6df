#include "hpt/dc_eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hpt {

std::vector<double> SymTridiagonal::multiply(const std::vector<double>& x) const {
    if (x.size() != size()) throw domain_error("SymTridiagonal::multiply: length mismatch");
    std::vector<double> y(size(), 0.0);
    for (size_t i = 0; i < size(); ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += off[i - 1] * x[i - 1];
        if (i + 1 < size()) s += off[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

double SymTridiagonal::norm_bound() const {
    double m = 0.0;
    for (size_t i = 0; i < size(); ++i) {
        double s = std::abs(diag[i]);
        if (i > 0) s += std::abs(off[i - 1]);
        if (i + 1 < size()) s += std::abs(off[i]);
        m = std::max(m, s);
    }
    return m;
}

// ---------------- dense cyclic Jacobi (leaf / reference) ----------------

void jacobi_eigh(const DenseMatrix& A0, std::vector<double>& evals, DenseMatrix& Q) {
    const size_t n = A0.rows();
    if (A0.cols() != n) throw domain_error("jacobi_eigh: square matrix required");
    DenseMatrix A = A0;
    Q = DenseMatrix::identity(n);
    if (n == 0) { evals.clear(); return; }

    auto offnorm = [&] {
        double s = 0.0;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) s += A(p, q) * A(p, q);
        return std::sqrt(2.0 * s);
    };
    double scale = 0.0;
    for (size_t p = 0; p < n; ++p)
        for (size_t q = 0; q < n; ++q) scale = std::max(scale, std::abs(A(p, q)));
    const double tol = 64.0 * eps * std::max(scale, 1e-300);

    for (int sweep = 0; sweep < 64 && offnorm() > tol * std::sqrt(double(n)); ++sweep) {
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) {
                double apq = A(p, q);
                if (std::abs(apq) <= 0.25 * eps * (std::abs(A(p, p)) + std::abs(A(q, q)))) continue;
                double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    double qkp = Q(k, p), qkq = Q(k, q);
                    Q(k, p) = c * qkp - s * qkq;
                    Q(k, q) = s * qkp + c * qkq;
                }
            }
    }
    evals.resize(n);
    for (size_t i = 0; i < n; ++i) evals[i] = A(i, i);
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), size_t{0});
    std::stable_sort(perm.begin(), perm.end(), [&](size_t a, size_t b) { return evals[a] < evals[b]; });
    std::vector<double> ev(n);
    DenseMatrix Qs(n, n);
    for (size_t j = 0; j < n; ++j) {
        ev[j] = evals[perm[j]];
        for (size_t i = 0; i < n; ++i) Qs(i, j) = Q(i, perm[j]);
    }
    evals = std::move(ev);
    Q = std::move(Qs);
}

// ---------------- Pick function ----------------

// f, f', f'' at lambda = shaft[anchor] + tau (anchor npos: lambda = tau); also the
// magnitude scale of the evaluation for the stopping test
static void pick_at(const std::vector<double>& shaft, const std::vector<double>& spike, double tip,
                    size_t anchor, double tau, double& f, double& fp, double& fpp, double& scale) {
    const double base = anchor == AnchoredPoint::npos ? 0.0 : shaft[anchor];
    const double lambda = base + tau;
    CompensatedSum s1;
    double s2 = 0.0, s3 = 0.0, amag = 0.0;
    for (size_t j = 0; j < shaft.size(); ++j) {
        double d = (shaft[j] - base) - tau;  // a_j - lambda to high relative accuracy
        if (d == 0.0) throw numerical_error("pick function evaluated at a pole");
        double t = spike[j] * spike[j] / d;
        s1.add(t);
        amag += std::abs(t);
        s2 += t / d;
        s3 += t / (d * d);
    }
    f = (lambda - tip) + s1.value();
    fp = 1.0 + s2;
    fpp = 2.0 * s3;
    scale = std::abs(lambda) + std::abs(tip) + amag;
}

static PickValues pick_evaluate_anchored(const Arrowhead& A,
                                         const std::vector<AnchoredPoint>& queries,
                                         int derivative_order, const KernelSummation& ks) {
    if (derivative_order < 0 || derivative_order > 2)
        throw domain_error("pick_evaluate: derivative_order must be 0, 1 or 2");
    const size_t K = A.shaft.size(), m = queries.size();
    std::vector<AnchoredPoint> poles(K);
    std::vector<double> w(K);
    for (size_t j = 0; j < K; ++j) {
        poles[j] = {j, 0.0};
        w[j] = A.spike[j] * A.spike[j];
    }
    auto value_of = [&](const AnchoredPoint& q) {
        return (q.anchor == AnchoredPoint::npos ? 0.0 : A.shaft[q.anchor]) + q.offset;
    };
    PickValues out;
    out.f.resize(m);
    ks.cauchy_sums(A.shaft, poles, w, queries, 1, out.f);
    for (size_t i = 0; i < m; ++i) out.f[i] += value_of(queries[i]) - A.tip;
    if (derivative_order >= 1) {
        out.df.resize(m);
        ks.cauchy_sums(A.shaft, poles, w, queries, 2, out.df);
        for (size_t i = 0; i < m; ++i) out.df[i] += 1.0;
    }
    if (derivative_order >= 2) {
        out.ddf.resize(m);
        ks.cauchy_sums(A.shaft, poles, w, queries, 3, out.ddf);
        for (size_t i = 0; i < m; ++i) out.ddf[i] *= 2.0;
    }
    return out;
}

PickValues pick_evaluate(const Arrowhead& A, const std::vector<AnchoredPoint>& points,
                         int derivative_order, const KernelSummation& ks) {
    return pick_evaluate_anchored(A, points, derivative_order, ks);
}

PickValues pick_evaluate(const Arrowhead& A, const std::vector<double>& points,
                         int derivative_order, const KernelSummation& ks) {
    std::vector<AnchoredPoint> queries(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        if (std::find(A.shaft.begin(), A.shaft.end(), points[i]) != A.shaft.end())
            throw numerical_error("pick_evaluate: point coincides with a shaft pole");
        queries[i] = {AnchoredPoint::npos, points[i]};
    }
    return pick_evaluate_anchored(A, queries, derivative_order, ks);
}

// ---------------- secular solver ----------------

namespace {

struct RootState {
    size_t anchor;
    double tau;
};

// smaller-magnitude-safe roots of t^2 + B t - G = 0 (G >= 0); returns the requested sign
double quad_root(double B, double G, bool positive) {
    double disc = std::sqrt(B * B + 4.0 * G);
    if (positive) return B <= 0.0 ? 0.5 * (-B + disc) : 2.0 * G / (B + disc);
    return B >= 0.0 ? 0.5 * (-B - disc) : -2.0 * G / (-B + disc);
}

// one root of the secular equation inside its interlacing interval
RootState solve_one_root(const std::vector<double>& a, const std::vector<double>& z, double c,
                         size_t i, double znorm2) {
    const size_t K = a.size();
    const double tiny = 1e-306;
    size_t anchor;
    double blo, bhi;  // tau bracket, f(blo) < 0 < f(bhi) conceptually

    double f, fp, fpp, scale;
    if (K == 0) return {AnchoredPoint::npos, c};

    if (i == 0) {
        anchor = 0;
        double lo = std::min(a[0], c) - std::sqrt(znorm2) - tiny;
        blo = lo - a[0] - std::max(1.0, std::abs(a[0])) * eps;
        bhi = 0.0;
    } else if (i == K) {
        anchor = K - 1;
        double hi = std::max(a[K - 1], c) + std::sqrt(znorm2) + tiny;
        blo = 0.0;
        bhi = hi - a[K - 1] + std::max(1.0, std::abs(a[K - 1])) * eps;
    } else {
        // choose the pole nearest the root by the sign of f at the midpoint
        double gap = a[i] - a[i - 1];
        pick_at(a, z, c, i - 1, 0.5 * gap, f, fp, fpp, scale);
        if (f > 0.0) { anchor = i - 1; blo = 0.0; bhi = 0.5 * gap; }
        else         { anchor = i;     blo = -0.5 * gap; bhi = 0.0; }
    }

    double tau = 0.5 * (blo + bhi);
    bool converged = false;
    for (int iter = 0; iter < 40; ++iter) {
        pick_at(a, z, c, anchor, tau, f, fp, fpp, scale);
        if (std::abs(f) <= 32.0 * eps * scale) { converged = true; break; }
        if (f > 0.0) bhi = tau; else blo = tau;
        // width measured against |tau|: near-pole roots carry their accuracy in the
        // offset, not in the absolute eigenvalue
        if (bhi - blo <= 2.0 * eps * std::abs(tau) + tiny) {
            converged = true;
            break;
        }

        double tnext;
        bool have = false;
        if (i == 0 || i == K) {
            // linear-plus-one-pole fit phi = lambda + A - G/tau
            double G = (fp - 1.0) * tau * tau;
            double lambda = a[anchor] + tau;
            double A = f - lambda + G / tau;
            double B = a[anchor] + A;
            double cand = quad_root(B, std::max(G, 0.0), i == K);
            if (cand > blo && cand < bhi) { tnext = cand; have = true; }
        } else {
            // Borges-Gragg rational fit with poles at both interval ends
            double u = (a[i - 1] - a[anchor]) - tau;  // a_{i-1} - lambda
            double v = (a[i] - a[anchor]) - tau;      // a_i - lambda
            double du = v - u;                        // interval width
            double beta = u * u * u * (v * fpp / 2.0 - fp) / du;
            double gamma = v * v * v * (fp - u * fpp / 2.0) / du;
            beta = std::max(beta, 0.0);
            gamma = std::max(gamma, 0.0);
            double alpha = f - beta / u - gamma / v;
            // alpha (u-t)(v-t) + beta (v-t) + gamma (u-t) = 0 in the step t
            double A2 = alpha;
            double A1 = -(alpha * (u + v) + beta + gamma);
            double A0 = alpha * u * v + beta * v + gamma * u;
            double t1 = 0.0, t2 = 0.0;
            bool roots = false;
            if (A2 == 0.0) {
                if (A1 != 0.0) { t1 = t2 = -A0 / A1; roots = true; }
            } else {
                double disc = A1 * A1 - 4.0 * A2 * A0;
                if (disc >= 0.0) {
                    double q = -(A1 + (A1 >= 0 ? 1.0 : -1.0) * std::sqrt(disc)) / 2.0;
                    t1 = q / A2;
                    t2 = q != 0.0 ? A0 / q : t1;
                    roots = true;
                }
            }
            if (roots) {
                for (double t : {t1, t2}) {
                    double cand = tau + t;
                    if (cand > blo && cand < bhi) { tnext = cand; have = true; break; }
                }
            }
        }
        if (!have) tnext = 0.5 * (blo + bhi);
        if (tnext <= blo || tnext >= bhi) tnext = 0.5 * (blo + bhi);
        if (tnext == tau) { converged = true; break; }
        tau = tnext;
    }
    if (!converged) {
        // guaranteed fallback: plain bisection on the sign change
        for (int iter = 0; iter < 200; ++iter) {
            tau = 0.5 * (blo + bhi);
            if (bhi - blo <= 2.0 * eps * std::abs(tau) + tiny) break;
            pick_at(a, z, c, anchor, tau, f, fp, fpp, scale);
            if (std::abs(f) <= 32.0 * eps * scale) break;
            if (f > 0.0) bhi = tau; else blo = tau;
        }
    }
    return {anchor, tau};
}

} // namespace

SecularRoots solve_secular_anchored(const Arrowhead& A, const KernelSummation&) {
    const size_t K = A.shaft.size();
    for (size_t j = 0; j + 1 < K; ++j)
        if (!(A.shaft[j] < A.shaft[j + 1]))
            throw domain_error("solve_secular: shaft must be strictly increasing after deflation");
    double znorm2 = 0.0;
    for (double z : A.spike) znorm2 += z * z;
    SecularRoots out;
    out.lambda.resize(K + 1);
    out.repr.resize(K + 1);
    for (size_t i = 0; i <= K; ++i) {
        RootState r = solve_one_root(A.shaft, A.spike, A.tip, i, znorm2);
        out.repr[i] = {r.anchor, r.tau};
        out.lambda[i] = (r.anchor == AnchoredPoint::npos ? 0.0 : A.shaft[r.anchor]) + r.tau;
    }
    return out;
}

std::vector<double> solve_secular(const Arrowhead& A, const KernelSummation& ks) {
    return solve_secular_anchored(A, ks).lambda;
}

// difference lambda_i - a_j in the anchored representation
static inline double root_minus_shaft(const std::vector<double>& shaft, const AnchoredPoint& r,
                                      size_t j) {
    double base = r.anchor == AnchoredPoint::npos ? -shaft[j] : shaft[r.anchor] - shaft[j];
    return base + r.offset;
}

void reconstruct(const Arrowhead& A, const SecularRoots& roots, std::vector<double>& spike_hat,
                 double& tip_hat) {
    const size_t K = A.shaft.size();
    if (roots.lambda.size() != K + 1) throw domain_error("reconstruct: root count mismatch");
    // strict interlacing lambda_0 < a_0 < lambda_1 < ... < a_{K-1} < lambda_K
    for (size_t j = 0; j < K; ++j) {
        if (!(root_minus_shaft(A.shaft, roots.repr[j], j) < 0.0) ||
            !(root_minus_shaft(A.shaft, roots.repr[j + 1], j) > 0.0))
            throw numerical_error("reconstruct: interlacing violated");
    }
    spike_hat.assign(K, 0.0);
    for (size_t i = 0; i < K; ++i) {
        // exponential of sums of logarithms; every ratio is positive under interlacing
        double logsum = std::log(-root_minus_shaft(A.shaft, roots.repr[0], i)) +
                        std::log(root_minus_shaft(A.shaft, roots.repr[K], i));
        for (size_t j = 0; j < i; ++j) {
            double num = root_minus_shaft(A.shaft, roots.repr[j + 1], i);  // < 0
            double den = A.shaft[j] - A.shaft[i];                          // < 0
            logsum += std::log(num / den);
        }
        for (size_t j = i + 1; j < K; ++j) {
            double num = root_minus_shaft(A.shaft, roots.repr[j], i);  // > 0
            double den = A.shaft[j] - A.shaft[i];                      // > 0
            logsum += std::log(num / den);
        }
        double mag = std::exp(0.5 * logsum);
        spike_hat[i] = A.spike[i] < 0.0 ? -mag : mag;
    }
    CompensatedSum cs;
    cs.add(roots.lambda[K]);
    for (size_t i = 0; i < K; ++i) cs.add(root_minus_shaft(A.shaft, roots.repr[i], i));
    tip_hat = cs.value();
}

// ---------------- arrowhead conquest ----------------

ArrowheadDecomposition::ArrowheadDecomposition(Arrowhead A, const KernelSummation& ks) : ks_(&ks) {
    const size_t K0 = A.shaft.size();
    n_ = K0 + 1;
    for (size_t j = 0; j + 1 < K0; ++j)
        if (A.shaft[j] > A.shaft[j + 1])
            throw domain_error("ArrowheadDecomposition: shaft must be sorted");

    double znorm2 = 0.0;
    for (double z : A.spike) znorm2 += z * z;
    double anorm = std::abs(A.tip) + std::sqrt(znorm2);
    for (double a : A.shaft) anorm = std::max(anorm, std::abs(a));
    const double ctol = 8.0 * eps * std::max(anorm, 1e-300);

    // rotate clustered shaft entries so all but the first of a run lose their spike weight
    std::vector<double> a = std::move(A.shaft), z = std::move(A.spike);
    size_t run = 0;
    for (size_t j = 1; j < K0; ++j) {
        if (a[j] - a[run] <= ctol) {
            double r = std::hypot(z[run], z[j]);
            if (r > 0.0) {
                double c = z[run] / r, s = z[j] / r;
                double arun = a[run], aj = a[j];
                a[run] = c * c * arun + s * s * aj;
                a[j] = s * s * arun + c * c * aj;
                z[run] = r;
                z[j] = 0.0;
                rotations_.push_back({run, j, c, s});
            }
        } else {
            run = j;
        }
    }
    for (size_t j = 0; j < K0; ++j) {
        if (std::abs(z[j]) <= ctol) {
            deflated_.push_back(j);
            deflated_values_.push_back(a[j]);
        } else {
            kept_.push_back(j);
        }
    }

    shaft_.reserve(kept_.size());
    std::vector<double> zk;
    zk.reserve(kept_.size());
    for (size_t j : kept_) {
        shaft_.push_back(a[j]);
        zk.push_back(z[j]);
    }
    Arrowhead red{shaft_, zk, A.tip};
    roots_ = solve_secular_anchored(red, ks);

    // interlacing nudge before reconstruction. Offsets may legitimately be as small as
    // spike^2, which the anchored representation keeps exactly, so only a root that
    // landed exactly on its pole is displaced (by a subnormal-scale offset); roots on
    // the wrong side are left for reconstruct() to reject.
    const size_t K = shaft_.size();
    for (size_t i = 0; i <= K; ++i) {
        auto& r = roots_.repr[i];
        if (r.anchor == AnchoredPoint::npos) continue;
        if (r.offset == 0.0) {
            double dir = r.anchor == i ? -1.0 : 1.0;  // anchor below the root => positive
            r.offset = dir * 1e-290;
        }
        roots_.lambda[i] = shaft_[r.anchor] + r.offset;
    }

    double tip_hat;
    reconstruct(red, roots_, spike_hat_, tip_hat);
    double be = 0.0;
    for (size_t i = 0; i < K; ++i) be += (spike_hat_[i] - zk[i]) * (spike_hat_[i] - zk[i]);
    backward_error_ = std::sqrt(be) + std::abs(tip_hat - A.tip);

    // eigenvector norms nu_i = sqrt(1 + sum_j bhat_j^2/(lambda_i - a_j)^2)
    inv_norms_.resize(K + 1);
    if (K > 0) {
        std::vector<AnchoredPoint> poles(K);
        std::vector<double> w(K);
        for (size_t j = 0; j < K; ++j) {
            poles[j] = {j, 0.0};
            w[j] = spike_hat_[j] * spike_hat_[j];
        }
        std::vector<double> s2(K + 1);
        ks.cauchy_sums(shaft_, poles, w, roots_.repr, 2, s2);
        for (size_t i = 0; i <= K; ++i) inv_norms_[i] = 1.0 / std::sqrt(1.0 + s2[i]);
    } else {
        inv_norms_[0] = 1.0;
    }

    // merge deflated eigenvalues (already non-spiked coordinates) with secular roots
    struct Tagged { double v; bool defl; size_t idx; };
    std::vector<Tagged> all;
    all.reserve(n_);
    for (size_t i = 0; i <= K; ++i) all.push_back({roots_.lambda[i], false, i});
    for (size_t t = 0; t < deflated_.size(); ++t) all.push_back({deflated_values_[t], true, t});
    std::stable_sort(all.begin(), all.end(), [](const Tagged& x, const Tagged& y) { return x.v < y.v; });
    eigenvalues_.resize(n_);
    order_.resize(n_);
    for (size_t i = 0; i < n_; ++i) {
        eigenvalues_[i] = all[i].v;
        order_[i] = {all[i].defl, all[i].idx};
    }
}

std::vector<double> ArrowheadDecomposition::apply(const std::vector<double>& x, bool transpose) const {
    if (x.size() != n_) throw domain_error("ArrowheadDecomposition::apply: length mismatch");
    const size_t K = shaft_.size();

    if (!transpose) {
        // split eigen-ordered input into secular and deflated parts
        std::vector<double> xr(K + 1), y(n_, 0.0);
        std::vector<double> xd(deflated_.size());
        for (size_t i = 0; i < n_; ++i) {
            auto [defl, idx] = order_[i];
            if (defl) xd[idx] = x[i]; else xr[idx] = x[i];
        }
        // reduced eigenvectors: coords (kept shaft..., tip)
        std::vector<double> w(K + 1);
        for (size_t i = 0; i <= K; ++i) w[i] = xr[i] * inv_norms_[i];
        if (K > 0) {
            std::vector<AnchoredPoint> queries(K);
            for (size_t j = 0; j < K; ++j) queries[j] = {j, 0.0};
            std::vector<double> sums(K);
            ks_->cauchy_sums(shaft_, roots_.repr, w, queries, 1, sums);  // sum_r w_r/(lambda_r - a_j)
            for (size_t j = 0; j < K; ++j) y[kept_[j]] = spike_hat_[j] * sums[j];
        }
        double tipsum = 0.0;
        for (double v : w) tipsum += v;
        y[n_ - 1] = tipsum;
        for (size_t t = 0; t < deflated_.size(); ++t) y[deflated_[t]] += xd[t];
        // undo the cluster rotations (reverse creation order)
        for (auto it = rotations_.rbegin(); it != rotations_.rend(); ++it) {
            double yi = y[it->i], yj = y[it->j];
            y[it->i] = it->c * yi - it->s * yj;
            y[it->j] = it->s * yi + it->c * yj;
        }
        return y;
    }

    // transpose: rotations first (forward order), then project on eigenvectors
    std::vector<double> t(x);
    for (const auto& rot : rotations_) {
        double ti = t[rot.i], tj = t[rot.j];
        t[rot.i] = rot.c * ti + rot.s * tj;
        t[rot.j] = -rot.s * ti + rot.c * tj;
    }
    std::vector<double> yr(K + 1, 0.0);
    if (K > 0) {
        std::vector<AnchoredPoint> poles(K);
        std::vector<double> w(K);
        for (size_t j = 0; j < K; ++j) {
            poles[j] = {j, 0.0};
            w[j] = spike_hat_[j] * t[kept_[j]];
        }
        std::vector<double> sums(K + 1);
        ks_->cauchy_sums(shaft_, poles, w, roots_.repr, 1, sums);  // sum_j w_j/(a_j - lambda_i)
        for (size_t i = 0; i <= K; ++i) yr[i] = -sums[i];
    }
    for (size_t i = 0; i <= K; ++i) yr[i] = (yr[i] + t[n_ - 1]) * inv_norms_[i];
    std::vector<double> y(n_);
    for (size_t i = 0; i < n_; ++i) {
        auto [defl, idx] = order_[i];
        y[i] = defl ? t[deflated_[idx]] : yr[idx];
    }
    return y;
}

DenseMatrix ArrowheadDecomposition::materialize() const {
    DenseMatrix Q(n_, n_);
    std::vector<double> e(n_, 0.0);
    for (size_t j = 0; j < n_; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        auto col = apply(e, false);
        for (size_t i = 0; i < n_; ++i) Q(i, j) = col[i];
    }
    return Q;
}

// ---------------- divide and the recursion ----------------

std::tuple<SymTridiagonal, SymTridiagonal, double, double, double> divide(const SymTridiagonal& T,
                                                                          size_t split) {
    const size_t n = T.size();
    if (n < 3) throw domain_error("divide: matrices smaller than 3 belong to a dense leaf solver");
    if (split < 1 || split > n - 2) throw domain_error("divide: split out of range");
    SymTridiagonal T1{{T.diag.begin(), T.diag.begin() + split},
                      {T.off.begin(), T.off.begin() + (split - 1)}};
    SymTridiagonal T2{{T.diag.begin() + split + 1, T.diag.end()},
                      {T.off.begin() + split + 1, T.off.end()}};
    return {std::move(T1), std::move(T2), T.off[split - 1], T.off[split], T.diag[split]};
}

// dense generalized leaf: B-orthonormal V, ascending eigenvalues (B = nullptr: regular)
static void dense_leaf(const SymTridiagonal& T, const SymTridiagonal* S, std::vector<double>& evals,
                       DenseMatrix& V) {
    const size_t n = T.size();
    DenseMatrix A(n, n);
    for (size_t i = 0; i < n; ++i) {
        A(i, i) = T.diag[i];
        if (i + 1 < n) { A(i, i + 1) = T.off[i]; A(i + 1, i) = T.off[i]; }
    }
    if (!S) {
        jacobi_eigh(A, evals, V);
        return;
    }
    // Cholesky S = L L^T, two-sided transform, back substitution
    DenseMatrix L(n, n);
    for (size_t i = 0; i < n; ++i) {
        L(i, i) = S->diag[i];
        if (i + 1 < n) { L(i + 1, i) = S->off[i]; }
    }
    // banded Cholesky in place (lower bidiagonal result)
    for (size_t i = 0; i < n; ++i) {
        double d = L(i, i) - (i > 0 ? L(i, i - 1) * L(i, i - 1) : 0.0);
        if (!(d > 0.0)) throw numerical_error("generalized leaf: S not positive-definite");
        L(i, i) = std::sqrt(d);
        if (i + 1 < n) L(i + 1, i) /= L(i, i);
    }
    auto fwd_solve = [&](std::vector<double>& x) {  // L x = b
        for (size_t i = 0; i < n; ++i) {
            if (i > 0) x[i] -= L(i, i - 1) * x[i - 1];
            x[i] /= L(i, i);
        }
    };
    DenseMatrix Atil(n, n);
    std::vector<double> col(n);
    for (size_t j = 0; j < n; ++j) {  // W = L^{-1} A
        for (size_t i = 0; i < n; ++i) col[i] = A(i, j);
        fwd_solve(col);
        for (size_t i = 0; i < n; ++i) Atil(i, j) = col[i];
    }
    for (size_t i = 0; i < n; ++i) {  // Atil = W L^{-T}: solve rows
        for (size_t j = 0; j < n; ++j) col[j] = Atil(i, j);
        fwd_solve(col);
        for (size_t j = 0; j < n; ++j) Atil(i, j) = col[j];
    }
    for (size_t i = 0; i < n; ++i)  // symmetrize rounding
        for (size_t j = i + 1; j < n; ++j) {
            double v = 0.5 * (Atil(i, j) + Atil(j, i));
            Atil(i, j) = Atil(j, i) = v;
        }
    DenseMatrix Q;
    jacobi_eigh(Atil, evals, Q);
    V = DenseMatrix(n, n);
    for (size_t j = 0; j < n; ++j) {  // V = L^{-T} Q: back substitution per column
        for (size_t i = 0; i < n; ++i) col[i] = Q(i, j);
        for (size_t ii = n; ii-- > 0;) {
            if (ii + 1 < n) col[ii] -= L(ii + 1, ii) * col[ii + 1];
            col[ii] /= L(ii, ii);
        }
        for (size_t i = 0; i < n; ++i) V(i, j) = col[i];
    }
}

DCTree eigen_tree(const SymTridiagonal& T, const SymTridiagonal* S, size_t leaf_size,
                  const KernelSummation& ks) {
    if (T.size() == 0) throw domain_error("eigen: empty matrix");
    if (S && S->size() != T.size()) throw domain_error("eigen: pencil size mismatch");
    if (leaf_size < 3) leaf_size = 3;
    DCTree tree;
    tree.n_ = T.size();
    tree.ks_ = &ks;

    struct Built {
        int idx;
        std::vector<double> evals;
    };
    std::function<Built(size_t, size_t)> rebuild = [&](size_t lo, size_t n) -> Built {
        if (n <= leaf_size) {
            DCTree::Node node;
            node.lo = lo;
            node.n = n;
            node.leaf = true;
            SymTridiagonal Ts{{T.diag.begin() + lo, T.diag.begin() + lo + n},
                              n > 1 ? std::vector<double>(T.off.begin() + lo, T.off.begin() + lo + n - 1)
                                    : std::vector<double>{}};
            std::vector<double> ev;
            DenseMatrix V;
            if (S) {
                SymTridiagonal Ss{{S->diag.begin() + lo, S->diag.begin() + lo + n},
                                  n > 1 ? std::vector<double>(S->off.begin() + lo, S->off.begin() + lo + n - 1)
                                        : std::vector<double>{}};
                dense_leaf(Ts, &Ss, ev, V);
            } else {
                dense_leaf(Ts, nullptr, ev, V);
            }
            node.Q = std::move(V);
            tree.nodes_.push_back(std::move(node));
            return {static_cast<int>(tree.nodes_.size() - 1), std::move(ev)};
        }
        size_t k = n / 2;
        Built L = rebuild(lo, k);
        Built R = rebuild(lo + k + 1, n - k - 1);
        const size_t n1 = k, n2 = n - k - 1;
        const size_t g = lo + k;

        // spike of the similarity-transformed coupling: Q1^T a and Q2^T b
        std::vector<double> e1(n1, 0.0), e2(n2, 0.0);
        e1[n1 - 1] = 1.0;
        e2[0] = 1.0;
        std::vector<double> row1, row2;
        {
            std::vector<double> tmp = e1;
            tree.apply_node(L.idx, tmp, true);
            row1 = std::move(tmp);
            tmp = e2;
            tree.apply_node(R.idx, tmp, true);
            row2 = std::move(tmp);
        }
        std::vector<double> tspike(n - 1);
        for (size_t i = 0; i < n1; ++i) tspike[i] = T.off[g - 1] * row1[i];
        for (size_t i = 0; i < n2; ++i) tspike[n1 + i] = T.off[g] * row2[i];
        double ttip = T.diag[g];

        DCTree::Node node;
        node.lo = lo;
        node.n = n;
        node.leaf = false;
        node.left = L.idx;
        node.right = R.idx;
        node.split = k;

        if (S) {
            std::vector<double> sspike(n - 1);
            for (size_t i = 0; i < n1; ++i) sspike[i] = S->off[g - 1] * row1[i];
            for (size_t i = 0; i < n2; ++i) sspike[n1 + i] = S->off[g] * row2[i];
            double q = S->diag[g];
            double ss = 0.0, st = 0.0, sls = 0.0;
            std::vector<double> lam(n - 1);
            for (size_t i = 0; i < n1; ++i) lam[i] = L.evals[i];
            for (size_t i = 0; i < n2; ++i) lam[n1 + i] = R.evals[i];
            for (size_t i = 0; i < n - 1; ++i) {
                ss += sspike[i] * sspike[i];
                st += sspike[i] * tspike[i];
                sls += sspike[i] * lam[i] * sspike[i];
            }
            double theta2 = q - ss;
            if (!(theta2 > 0.0))
                throw numerical_error("sd_tridiag_gevp: S lost positive-definiteness at node [" +
                                      std::to_string(lo) + "," + std::to_string(lo + n) + ")");
            double theta = std::sqrt(theta2);
            for (size_t i = 0; i < n - 1; ++i) tspike[i] = (tspike[i] - lam[i] * sspike[i]) / theta;
            ttip = (ttip - 2.0 * st + sls) / theta2;
            node.chol_spike = std::move(sspike);
            node.chol_theta = theta;
        }

        // sort the merged shaft
        std::vector<double> shaft(n - 1);
        for (size_t i = 0; i < n1; ++i) shaft[i] = L.evals[i];
        for (size_t i = 0; i < n2; ++i) shaft[n1 + i] = R.evals[i];
        std::vector<size_t> perm(n - 1);
        std::iota(perm.begin(), perm.end(), size_t{0});
        std::stable_sort(perm.begin(), perm.end(),
                         [&](size_t x, size_t y) { return shaft[x] < shaft[y]; });
        std::vector<double> sa(n - 1), sz(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) {
            sa[i] = shaft[perm[i]];
            sz[i] = tspike[perm[i]];
        }
        node.sort_perm = std::move(perm);
        node.arrow = std::make_unique<ArrowheadDecomposition>(Arrowhead{sa, sz, ttip}, ks);
        double nb = 0.0;
        for (double v : sa) nb = std::max(nb, std::abs(v));
        nb = std::max(nb, std::abs(ttip)) + norm2(sz);
        tree.max_backward_error_ =
            std::max(tree.max_backward_error_, node.arrow->backward_error() / std::max(nb, 1e-300));
        std::vector<double> ev = node.arrow->eigenvalues();
        tree.nodes_.push_back(std::move(node));
        return {static_cast<int>(tree.nodes_.size() - 1), std::move(ev)};
    };

    Built top = rebuild(0, T.size());
    tree.root_ = top.idx;
    tree.eigenvalues_ = std::move(top.evals);
    return tree;
}

DCTree eigen(const SymTridiagonal& T, size_t leaf_size, const KernelSummation& ks) {
    return eigen_tree(T, nullptr, leaf_size, ks);
}

void DCTree::apply_node(int idx, std::vector<double>& x, bool transpose) const {
    const Node& node = nodes_[static_cast<size_t>(idx)];
    const size_t n = node.n;
    if (node.leaf) {
        x = transpose ? node.Q.multiply_transposed(x) : node.Q.multiply(x);
        return;
    }
    const size_t k = node.split, n1 = k, n2 = n - k - 1;
    if (!transpose) {
        std::vector<double> t1 = node.arrow->apply(x, false);
        // unsort shaft, keep tip last
        std::vector<double> t2(n);
        for (size_t i = 0; i + 1 < n; ++i) t2[node.sort_perm[i]] = t1[i];
        t2[n - 1] = t1[n - 1];
        if (!node.chol_spike.empty()) {  // L^{-T}: head -= (last/theta) s ; last /= theta
            double last = t2[n - 1] / node.chol_theta;
            for (size_t i = 0; i + 1 < n; ++i) t2[i] -= last * node.chol_spike[i];
            t2[n - 1] = last;
        }
        std::vector<double> xl(t2.begin(), t2.begin() + n1);
        std::vector<double> xr(t2.begin() + n1, t2.begin() + n1 + n2);
        apply_node(node.left, xl, false);
        apply_node(node.right, xr, false);
        x.resize(n);
        std::copy(xl.begin(), xl.end(), x.begin());
        x[k] = t2[n - 1];
        std::copy(xr.begin(), xr.end(), x.begin() + k + 1);
        return;
    }
    // transpose: arrange [left, right, tip], children transposed, L^{-1}, sort, arrow^T
    std::vector<double> xl(x.begin(), x.begin() + k);
    std::vector<double> xr(x.begin() + k + 1, x.end());
    double tip = x[k];
    apply_node(node.left, xl, true);
    apply_node(node.right, xr, true);
    std::vector<double> t2(n);
    std::copy(xl.begin(), xl.end(), t2.begin());
    std::copy(xr.begin(), xr.end(), t2.begin() + n1);
    t2[n - 1] = tip;
    if (!node.chol_spike.empty()) {  // L^{-1}: last = (last - s^T head)/theta
        double dot = 0.0;
        for (size_t i = 0; i + 1 < n; ++i) dot += node.chol_spike[i] * t2[i];
        t2[n - 1] = (t2[n - 1] - dot) / node.chol_theta;
    }
    std::vector<double> t1(n);
    for (size_t i = 0; i + 1 < n; ++i) t1[i] = t2[node.sort_perm[i]];
    t1[n - 1] = t2[n - 1];
    x = node.arrow->apply(t1, true);
}

std::vector<double> DCTree::apply(const std::vector<double>& x, bool transpose) const {
    if (x.size() != n_) throw domain_error("DCTree::apply: length mismatch");
    std::vector<double> y(x);
    apply_node(root_, y, transpose);
    return y;
}

DenseMatrix DCTree::materialize() const {
    DenseMatrix Q(n_, n_);
    std::vector<double> e(n_, 0.0);
    for (size_t j = 0; j < n_; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        auto col = apply(e, false);
        for (size_t i = 0; i < n_; ++i) Q(i, j) = col[i];
    }
    return Q;
}

} // namespace hpt
