#pragma once

#include <map>
#include <string>
#include <vector>

#include "spikelab/config.hpp"

namespace spikelab {

// Solution of the coupled fixed-point system for (m1, m2) at ridge lambda,
// together with the lambda-derivatives obtained by implicit differentiation.
struct FixedPoint {
    double m1 = 0.0;
    double m2 = 0.0;
    double residual[2] = {0.0, 0.0};
    double m1_prime = 0.0;
    double m2_prime = 0.0;
};

// Newton with damping and positivity clipping, seeded at the infinite-sample
// value phi/(lambda psi); falls back to the quartic reduction in m1 when
// Newton stalls. Residuals are asserted below 1e-10.
FixedPoint solve_fixed_point(double phi, double psi, double lambda, double c1, double c_gt1);

// (dm1/dlambda, dm2/dlambda) by implicit differentiation, cross-checked
// against central finite differences (step 1e-6 * lambda, 1e-4 relative).
std::pair<double, double> fixed_point_derivatives(const FixedPoint& fp, double phi, double psi,
                                                  double lambda, double c1, double c_gt1);

// Limiting |cos| between the estimated and true directions:
// |c_star1| / sqrt(c_star1^2 + phi (c_star^2 + sigma_eps^2)).
double alignment_limit(double c_star1, double c_star, double sigma_eps, double phi);

// Everything the closed forms need: geometry, ridge, noise, student norms and
// the teacher's Hermite coefficients.
struct TheoryInputs {
    double phi = 0.0;
    double psi = 0.0;
    double lambda = 0.0;
    double sigma_eps = 0.0;
    double c1 = 0.0;                    // student
    double c_gt1 = 0.0;                 // student
    std::vector<double> student_coeffs; // c_k, k = 0..K
    std::vector<double> teacher_coeffs; // c_star_k, k = 0..K
    double c_star = 0.0;

    static TheoryInputs from_config(const ExperimentConfig& cfg);
    double c_star_k(int k) const {
        return (k >= 0 && k < static_cast<int>(teacher_coeffs.size()))
                   ? teacher_coeffs[static_cast<std::size_t>(k)]
                   : 0.0;
    }
    double student_c(int k) const {
        return (k >= 0 && k < static_cast<int>(student_coeffs.size()))
                   ? student_coeffs[static_cast<std::size_t>(k)]
                   : 0.0;
    }
    // b^2 = c_star1^2 + phi (c_star^2 + sigma_eps^2)
    double b_sq() const {
        return c_star_k(1) * c_star_k(1) + phi * (c_star * c_star + sigma_eps * sigma_eps);
    }
};

// Limiting training-loss improvements.
double delta_1(const TheoryInputs& in, const FixedPoint& fp);
double delta_2(const TheoryInputs& in, const FixedPoint& fp);
// General-ell form via the xi table and the Omega matrix; 1 <= ell <= 6 and
// the student's c_1..c_ell must be nonzero.
double delta_ell_general(int ell, const TheoryInputs& in, const FixedPoint& fp);

// Limiting test-error improvements.
double lambda_1(const TheoryInputs& in, const FixedPoint& fp);
double lambda_2(const TheoryInputs& in, const FixedPoint& fp);

// Internal constants of the test-error derivation and the second route to
// lambda_1 / lambda_2 through them (used as an algebraic cross-check).
double m_const(const FixedPoint& fp);      // 1 - 2 m2/m1 - m2'/m1^2
double m_bar_const(const FixedPoint& fp);  // 1 - m2/m1
double m_hat_const(const FixedPoint& fp);  // -m1'/m1^2 - 1
double lambda_1_via_m(const TheoryInputs& in, const FixedPoint& fp);
double lambda_2_via_m(const TheoryInputs& in, const FixedPoint& fp);

// Predicted limits of the resolvent quadratic forms used as simulation
// cross-checks. Keys:
//   beta_xtrx_beta, a_f0r0f0_a_minus_norm, h2_mixed, theta2_r_theta2,
//   hermite_table_<i>_<j> for i,j <= ell, r_<p> for p <= ell.
std::map<std::string, double> limiting_quadratic_forms(const TheoryInputs& in,
                                                        const FixedPoint& fp, int ell = 2);

struct TheoryPoint {
    TheoryInputs inputs;
    FixedPoint fp;
    double alignment = 0.0;
    std::map<int, double> delta;       // ell -> Delta_ell
    std::map<int, double> lambda_gap;  // ell -> Lambda_ell
};

// Solves the fixed point and evaluates the closed forms for ell = 1, 2 and,
// where the student coefficients allow, the general form up to max_ell.
TheoryPoint theory_point(const TheoryInputs& in, int max_ell = 2);
TheoryPoint theory_point(const ExperimentConfig& cfg);

}  // namespace spikelab
