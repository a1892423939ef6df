#include "hpt/special_functions.hpp"

#include <algorithm>
#include <cstdio>

namespace hpt {

double jacobi_recurrence_diag(int n, const JacobiParams& p) {
    const double a = p.alpha, b = p.beta;
    if (n == 0) return (b - a) / (a + b + 2.0);
    const double t = 2.0 * n + a + b;
    return (b - a) * (b + a) / (t * (t + 2.0));
}

double jacobi_recurrence_offdiag(int n, const JacobiParams& p) {
    const double a = p.alpha, b = p.beta;
    if (n < 1) throw domain_error("jacobi_recurrence_offdiag: n >= 1 required");
    if (n == 1) {
        // (1+a+b)/(1+a+b) cancelled; removable 0/0 at a+b = -1
        return 2.0 * std::sqrt((1.0 + a) * (1.0 + b) / ((2.0 + a + b) * (2.0 + a + b) * (3.0 + a + b)));
    }
    const double t = 2.0 * n + a + b;
    return 2.0 * std::sqrt(n * (n + a) * (n + b) * (n + a + b) / ((t - 1.0) * t * t * (t + 1.0)));
}

static double jacobi_p0(const JacobiParams& p) {
    // 1/sqrt(h_0), h_0 = 2^{a+b+1} Gamma(a+1) Gamma(b+1) / Gamma(a+b+2)
    const double a = p.alpha, b = p.beta;
    double logh0 = (a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                   std::lgamma(a + b + 2.0);
    return std::exp(-0.5 * logh0);
}

static void check_eval_domain(int n, double x) {
    if (n < 0) throw domain_error("eval_jacobi: negative degree");
    if (std::abs(x) > 1.0) throw domain_error("eval_jacobi: |x| > 1");
}

double eval_jacobi_orthonormal(int n, const JacobiParams& p, double x) {
    check_eval_domain(n, x);
    double pm1 = 0.0, pc = jacobi_p0(p);
    for (int k = 0; k < n; ++k) {
        double next = ((x - jacobi_recurrence_diag(k, p)) * pc -
                       (k >= 1 ? jacobi_recurrence_offdiag(k, p) * pm1 : 0.0)) /
                      jacobi_recurrence_offdiag(k + 1, p);
        pm1 = pc;
        pc = next;
    }
    return pc;
}

std::vector<double> eval_jacobi_orthonormal_all(int nmax, const JacobiParams& p, double x) {
    check_eval_domain(nmax, x);
    std::vector<double> out(static_cast<size_t>(nmax) + 1);
    out[0] = jacobi_p0(p);
    for (int k = 0; k < nmax; ++k)
        out[k + 1] = ((x - jacobi_recurrence_diag(k, p)) * out[k] -
                      (k >= 1 ? jacobi_recurrence_offdiag(k, p) * out[k - 1] : 0.0)) /
                     jacobi_recurrence_offdiag(k + 1, p);
    return out;
}

void eval_jacobi_orthonormal_diff(int n, const JacobiParams& p, double x, double& value,
                                  double& derivative) {
    check_eval_domain(n, x);
    double pm1 = 0.0, pc = jacobi_p0(p), dm1 = 0.0, dc = 0.0;
    for (int k = 0; k < n; ++k) {
        double A1 = jacobi_recurrence_offdiag(k + 1, p);
        double B = jacobi_recurrence_diag(k, p);
        double A = k >= 1 ? jacobi_recurrence_offdiag(k, p) : 0.0;
        double pn = ((x - B) * pc - A * pm1) / A1;
        double dn = ((x - B) * dc + pc - A * dm1) / A1;
        pm1 = pc; pc = pn;
        dm1 = dc; dc = dn;
    }
    value = pc;
    derivative = dc;
}

double eval_weighted_jacobi(int n, const JacobiParams& p, double x) {
    check_eval_domain(n, x);
    // limits at the endpoints: positive exponent kills the value, zero exponent is 1
    double w = 1.0;
    if (p.alpha != 0.0) {
        if (x == 1.0) return 0.0;  // alpha > 0 => limit 0; alpha<0 diverges, report the signed inf
        w *= std::pow(1.0 - x, 0.5 * p.alpha);
    }
    if (p.beta != 0.0) {
        if (x == -1.0) return 0.0;
        w *= std::pow(1.0 + x, 0.5 * p.beta);
    }
    return w * eval_jacobi_orthonormal(n, p, x);
}

double eval_assoc_legendre_norm(int l, int m, double x) {
    if (m < 0 || l < 0) throw domain_error("eval_assoc_legendre_norm: negative index");
    if (m > l) throw domain_error("eval_assoc_legendre_norm: m > l");
    return eval_weighted_jacobi(l - m, JacobiParams(m, m), x);
}

// Sturm count for the symmetric tridiagonal Jacobi matrix: number of eigenvalues < sigma.
// Local to the oracle layer; deliberately independent of the production eigensolvers.
static int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double sigma) {
    int count = 0;
    double d = 1.0;
    const double tiny = 1e-300;
    for (size_t i = 0; i < diag.size(); ++i) {
        double offsq = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
        d = diag[i] - sigma - offsq / d;
        if (d == 0.0) d = -tiny;
        if (d < 0.0) ++count;
    }
    return count;
}

QuadratureRule gauss_jacobi_rule(int N, const JacobiParams& p) {
    if (N < 1) throw domain_error("gauss_jacobi_rule: N >= 1 required");
    std::vector<double> diag(N), off(N - 1);
    for (int i = 0; i < N; ++i) diag[i] = jacobi_recurrence_diag(i, p);
    for (int i = 0; i + 1 < N; ++i) off[i] = jacobi_recurrence_offdiag(i + 1, p);

    // bisection on [-1,1] (all nodes interior), then Newton refinement to 4 eps
    std::vector<double> nodes(N);
    for (int k = 0; k < N; ++k) {
        double lo = -1.0, hi = 1.0;
        while (hi - lo > 16.0 * eps) {
            double mid = 0.5 * (lo + hi);
            if (sturm_count(diag, off, mid) <= k) lo = mid; else hi = mid;
        }
        nodes[k] = 0.5 * (lo + hi);
    }
    for (int k = 0; k < N; ++k) {
        double x = nodes[k];
        for (int it = 0; it < 8; ++it) {
            double v, d;
            eval_jacobi_orthonormal_diff(N, p, x, v, d);
            if (d == 0.0) break;
            double dx = v / d;
            x -= dx;
            x = std::clamp(x, -1.0, 1.0);
            if (std::abs(dx) <= 4.0 * eps * std::max(1.0, std::abs(x))) break;
        }
        nodes[k] = x;
    }
    std::sort(nodes.begin(), nodes.end());

    // Christoffel weights 1 / sum_k p_k(x)^2; they sum to the total mass by construction
    QuadratureRule rule{std::move(nodes), std::vector<double>(N), p};
    for (int k = 0; k < N; ++k) {
        auto vals = eval_jacobi_orthonormal_all(N - 1, p, rule.nodes[k]);
        double s = 0.0;
        for (double v : vals) s += v * v;
        rule.weights[k] = 1.0 / s;
    }
    return rule;
}

DenseMatrix connection_oracle(const Family1D& psi_to, const Family1D& phi_from,
                              const QuadratureRule& rule, size_t rows, size_t cols,
                              int integrand_degree) {
    if (rule.exact_degree() < integrand_degree)
        std::fprintf(stderr,
                     "hpt: connection_oracle: %zu-point rule is exact to degree %d, integrand degree %d\n",
                     rule.size(), rule.exact_degree(), integrand_degree);
    DenseMatrix C(rows, cols);
    const size_t np = rule.size();
    std::vector<double> pv(rows);
    for (size_t q = 0; q < np; ++q) {
        double x = rule.nodes[q], w = rule.weights[q];
        for (size_t l = 0; l < rows; ++l) pv[l] = psi_to(static_cast<int>(l), x);
        for (size_t n = 0; n < cols; ++n) {
            double f = w * phi_from(static_cast<int>(n), x);
            for (size_t l = 0; l < rows; ++l) C(l, n) += pv[l] * f;
        }
    }
    return C;
}

std::complex<double> eval_geometry_harmonic(const GeometryKind& kind, int l, int m, double u,
                                            double v) {
    using cplx = std::complex<double>;
    const double inv_sqrt_2pi = 1.0 / std::sqrt(8.0 * std::atan(1.0));
    switch (kind.family) {
    case GeometryKind::Family::Sphere: {
        if (std::abs(m) > l) throw domain_error("sphere harmonic: |m| > l");
        // u = theta, v = phi; P~_l^{-m} == P~_l^{m} under the folded phase convention
        double plm = eval_assoc_legendre_norm(l, std::abs(m), std::cos(u));
        return std::polar(1.0, m * v) * (inv_sqrt_2pi * plm);
    }
    case GeometryKind::Family::Disk: {
        int ma = std::abs(m);
        if (ma > l || ((l - ma) % 2) != 0) throw domain_error("disk harmonic: invalid (l,m) parity");
        int k = (l - ma) / 2;
        double r = u, theta = v;
        double radial = std::pow(2.0, 0.5 * (ma + 2)) * std::pow(r, ma) *
                        eval_jacobi_orthonormal(k, JacobiParams(0.0, ma), 2.0 * r * r - 1.0);
        return std::polar(1.0, m * theta) * (inv_sqrt_2pi * radial);
    }
    case GeometryKind::Family::Triangle: {
        if (m < 0 || m > l) throw domain_error("triangle harmonic: need 0 <= m <= l");
        double x = u, y = v;
        JacobiParams px(2.0 * m + kind.beta + kind.gamma + 1.0, kind.alpha);
        JacobiParams py(kind.gamma, kind.beta);
        if (x == 1.0) return m == 0 ? cplx(std::sqrt(2.0) * eval_jacobi_orthonormal(l, px, 1.0) *
                                           eval_jacobi_orthonormal(0, py, 0.0))
                                    : cplx(0.0);
        double xf = std::pow(2.0 * (1.0 - x), m) * eval_jacobi_orthonormal(l - m, px, 2.0 * x - 1.0);
        double yf = eval_jacobi_orthonormal(m, py, 2.0 * y / (1.0 - x) - 1.0);
        // sqrt(2) restores orthonormality under w = 2^{a+2b+2c+2} x^a y^b (1-x-y)^c
        return cplx(std::sqrt(2.0) * xf * yf);
    }
    }
    throw domain_error("eval_geometry_harmonic: unknown geometry");
}

} // namespace hpt
