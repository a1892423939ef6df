#ifndef HPT_SPECIAL_FUNCTIONS_HPP
#define HPT_SPECIAL_FUNCTIONS_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "hpt/util.hpp"

namespace hpt {

struct JacobiParams {
    double alpha;
    double beta;
    JacobiParams(double a, double b) : alpha(a), beta(b) {
        if (!(a > -1.0) || !(b > -1.0))
            throw domain_error("JacobiParams: alpha and beta must exceed -1");
    }
    bool operator==(const JacobiParams& o) const { return alpha == o.alpha && beta == o.beta; }
};

struct QuadratureRule {
    std::vector<double> nodes;    // strictly increasing, in (-1,1)
    std::vector<double> weights;  // positive, sum to the weight's total mass
    JacobiParams params;
    size_t size() const { return nodes.size(); }
    // polynomials up to this degree integrate exactly against the Jacobi weight
    int exact_degree() const { return 2 * static_cast<int>(nodes.size()) - 1; }
};

struct GeometryKind {
    enum class Family : std::uint8_t { Sphere = 0, Disk = 1, Triangle = 2 };
    Family family = Family::Sphere;
    double alpha = 0.0, beta = 0.0, gamma = 0.0;  // triangle weight exponents

    static GeometryKind sphere() { return {Family::Sphere, 0, 0, 0}; }
    static GeometryKind disk() { return {Family::Disk, 0, 0, 0}; }
    static GeometryKind triangle(double a, double b, double g) {
        if (!(a > -1.0) || !(b > -1.0) || !(g > -1.0))
            throw domain_error("GeometryKind::triangle: parameters must exceed -1");
        return {Family::Triangle, a, b, g};
    }
};

// Orthonormal three-term recurrence  x p_n = A_{n+1} p_{n+1} + B_n p_n + A_n p_{n-1}.
// The n = 0 diagonal and the n = 1 off-diagonal use the cancelled forms, which
// removes the 0/0 at alpha+beta in {0,-1}.
double jacobi_recurrence_diag(int n, const JacobiParams& p);
double jacobi_recurrence_offdiag(int n, const JacobiParams& p);  // n >= 1

// orthonormal P~_n^{(alpha,beta)}(x)
double eval_jacobi_orthonormal(int n, const JacobiParams& p, double x);
// all degrees 0..nmax at one point
std::vector<double> eval_jacobi_orthonormal_all(int nmax, const JacobiParams& p, double x);
// value and derivative, for Newton refinement of quadrature nodes
void eval_jacobi_orthonormal_diff(int n, const JacobiParams& p, double x, double& value,
                                  double& derivative);

// P^_n = (1-x)^{alpha/2} (1+x)^{beta/2} P~_n, orthonormal in unweighted L^2
double eval_weighted_jacobi(int n, const JacobiParams& p, double x);

// Orthonormal associated Legendre P~_l^m with the Condon-Shortley phase folded into a
// real sign, so that P~_l^m == P^_{l-m}^{(m,m)} (positive for all l >= m >= 0).
double eval_assoc_legendre_norm(int l, int m, double x);

// Golub-Welsch nodes with Newton refinement; Christoffel weights.
QuadratureRule gauss_jacobi_rule(int N, const JacobiParams& p);

// c_{l,n} = <psi_l, phi_n> under the rule's measure; ground truth for tests.
// integrand_degree is the caller's degree count for the full integrand; a rule that
// cannot integrate it exactly triggers a warning on stderr.
using Family1D = std::function<double(int n, double x)>;
DenseMatrix connection_oracle(const Family1D& psi_to, const Family1D& phi_from,
                              const QuadratureRule& rule, size_t rows, size_t cols,
                              int integrand_degree);

// Y_l^m(theta,phi), Z_l^m(r,theta), or the triangle harmonic at (x,y).
// Sphere/disk return the e^{im phi}/sqrt(2pi) complex convention; triangle is real.
std::complex<double> eval_geometry_harmonic(const GeometryKind& kind, int l, int m, double u,
                                            double v);

} // namespace hpt

#endif
