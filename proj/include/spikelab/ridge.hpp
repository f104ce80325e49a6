#pragma once

#include <Eigen/Dense>

#include "spikelab/activation.hpp"
#include "spikelab/rng.hpp"

namespace spikelab {

struct RidgeFit {
    Eigen::VectorXd a_hat;
    double train_loss = 0.0;  // (1/n)||y - F a||^2 + lambda ||a||^2 at the minimizer
    double lambda = 0.0;
};

// Solves a_hat = (F'F + lambda n I)^{-1} F' y via the primal normal equations
// when N <= n and the dual form F'(FF' + lambda n I)^{-1} y otherwise.
RidgeFit ridge_fit(const Eigen::MatrixXd& F, const Eigen::VectorXd& y_tilde, double lambda);

// lambda * y'(FF' + lambda n I)^{-1} y; equals the ridge objective at the
// minimizer.
double train_loss_resolvent(const Eigen::MatrixXd& F, const Eigen::VectorXd& y_tilde,
                            double lambda);

struct McEstimate {
    double value = 0.0;
    double std_err = 0.0;
    long n_samples = 0;
};

// Monte Carlo estimate of E (y - a_hat' sigma(W x))^2 over fresh x ~ N(0, I_d).
McEstimate test_error_mc(const Eigen::MatrixXd& W, const Eigen::VectorXd& a_hat,
                         const Activation& teacher, const Eigen::VectorXd& beta_star,
                         double sigma_eps, const Activation& student, long n_test,
                         RngStream& rng);

// Gaussian moment E (x'beta)^k = (k-1)!! * ||beta||^k for even k, 0 for odd.
double test_moment_aleph(int k, double beta_norm_sq);

}  // namespace spikelab
