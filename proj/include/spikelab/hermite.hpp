#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace spikelab {

// Probabilist's Hermite polynomial H_k(x); three-term recurrence
// H_{k+1} = x H_k - k H_{k-1}. k is capped at 64.
double hermite_eval(int k, double x);

// H_k'(x) = k H_{k-1}(x).
double hermite_deriv(int k, double x);

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Quadrature rule for integrals against the standard normal density.
// Composite Gauss-Legendre panels with an edge pinned at zero, so kinked
// activations (shifted ReLU) integrate to machine precision. `order` is the
// total node budget across panels.
struct QuadratureRule {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;

    static const QuadratureRule& normal(int order = 200);

    template <typename F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (Eigen::Index i = 0; i < nodes.size(); ++i) s += weights(i) * f(nodes(i));
        return s;
    }
};

// Hermite coefficients c_k = E[sigma(Z) H_k(Z)] / k!  for k = 0..K.
struct HermiteCoeffs {
    std::vector<double> coeffs;

    int order() const { return static_cast<int>(coeffs.size()) - 1; }
    double operator[](int k) const { return coeffs[static_cast<std::size_t>(k)]; }
};

HermiteCoeffs hermite_coeffs(const std::function<double(double)>& activation, int K,
                             int quad_order = 200);

// (c_total, c_gt1): c_total^2 = sum_{k>=1} k! c_k^2, c_gt1^2 = sum_{k>=2} k! c_k^2.
std::pair<double, double> hermite_norms(const HermiteCoeffs& coeffs);

// Monomial-to-Hermite conversion table: x^p = sum_i xi[p][i] H_i(x).
// Built by the exact integer recursion xi_{p+1,i} = xi_{p,i-1} + (i+1) xi_{p,i+1}.
class XiTable {
  public:
    static constexpr int kDefaultMaxDegree = 8;

    explicit XiTable(int max_degree = kDefaultMaxDegree);

    int max_degree() const { return max_degree_; }
    const std::vector<double>& row(int p) const;
    double operator()(int p, int i) const;

  private:
    int max_degree_;
    std::vector<std::vector<double>> rows_;
};

// Row xi_{p,.} of the default table.
std::vector<double> monomial_to_hermite(int p);

}  // namespace spikelab
