#pragma once

#include <Eigen/Dense>

#include "spikelab/activation.hpp"
#include "spikelab/config.hpp"
#include "spikelab/rng.hpp"

namespace spikelab {

// Two independent splits of size n each: (X, y) feeds the gradient step,
// (X_tilde, y_tilde) the ridge stage. Labels y_i = teacher(x_i' beta_star) + eps_i.
struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::MatrixXd X_tilde;
    Eigen::VectorXd y_tilde;
    Eigen::VectorXd beta_star;
};

struct NetworkInit {
    Eigen::MatrixXd W0;  // N x d, rows on the unit sphere
    Eigen::VectorXd a;   // N, iid N(0, 1/N)
};

Dataset generate_data(const ExperimentConfig& cfg, RngStream& rng);
NetworkInit init_network(const ExperimentConfig& cfg, RngStream& rng);

// Rescaled negative gradient of the first layer at W0:
// G = (1/n) [(a y' - (1/sqrt(N)) a a' sigma(W0 X')) o sigma'(W0 X')] X.
Eigen::MatrixXd rescaled_gradient(const Eigen::MatrixXd& W0, const Eigen::VectorXd& a,
                                  const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Activation& student);

// W = W0 + eta * G.
Eigen::MatrixXd gradient_step(const Eigen::MatrixXd& W0, const Eigen::VectorXd& a,
                              const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Activation& student, double eta);

// Entrywise sigma(X_any W').
Eigen::MatrixXd features(const Eigen::MatrixXd& X_any, const Eigen::MatrixXd& W,
                         const Activation& student);

// beta = X' y / n.
Eigen::VectorXd estimate_beta(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// F0 + sum_{k=1..ell} c1^k c_k eta^k (X_tilde beta)^{ok} (a^{ok})'.
Eigen::MatrixXd spiked_approximation(const Eigen::MatrixXd& F0, const Eigen::MatrixXd& X_tilde,
                                     const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& a,
                                     double eta, int ell, const HermiteCoeffs& student_coeffs);

// c1 * X_tilde W0' + c_gt1 * Z with Z iid standard normal.
Eigen::MatrixXd gaussian_equivalent_features(const Eigen::MatrixXd& X_tilde,
                                             const Eigen::MatrixXd& W0, double c1, double c_gt1,
                                             RngStream& rng);

// Operator norm by power iteration on the Gram of the smaller side.
double operator_norm(const Eigen::MatrixXd& M, double rel_tol = 1e-8, int max_iter = 1000);

}  // namespace spikelab
