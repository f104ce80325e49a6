#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spikelab/ridge.hpp"

using namespace spikelab;

TEST_CASE("ridge_fit: zero features") {
    const Eigen::MatrixXd F = Eigen::MatrixXd::Zero(10, 6);
    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) y(i) = i - 4.5;
    const RidgeFit fit = ridge_fit(F, y, 0.5);
    CHECK(fit.a_hat.norm() == 0.0);
    CHECK(fit.train_loss == doctest::Approx(y.squaredNorm() / 10.0).epsilon(1e-14));
}

TEST_CASE("ridge_fit: identity features with lambda n = 1") {
    const int n = 8;
    const Eigen::MatrixXd F = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = std::sin(i + 1.0);
    const RidgeFit fit = ridge_fit(F, y, 1.0 / n);
    CHECK((fit.a_hat - y / 2.0).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ridge_fit: primal and dual paths agree") {
    RngStream rng(17);
    const Eigen::MatrixXd F = rng.normal_matrix(50, 80);  // n < N forces the dual path
    const Eigen::VectorXd y = rng.normal_vector(50);
    const double lambda = 0.05;
    const RidgeFit dual = ridge_fit(F, y, lambda);

    // primal closed form, solved directly
    const int N = 80;
    const Eigen::MatrixXd A =
        F.transpose() * F + lambda * 50.0 * Eigen::MatrixXd::Identity(N, N);
    const Eigen::VectorXd primal = A.ldlt().solve(F.transpose() * y);
    CHECK((dual.a_hat - primal).norm() / primal.norm() < 1e-8);
}

TEST_CASE("ridge_fit rejects bad lambda and non-finite input") {
    const Eigen::MatrixXd F = Eigen::MatrixXd::Ones(4, 3);
    const Eigen::VectorXd y = Eigen::VectorXd::Ones(4);
    CHECK_THROWS(ridge_fit(F, y, 0.0));
    Eigen::MatrixXd bad = F;
    bad(1, 1) = std::nan("");
    CHECK_THROWS(ridge_fit(bad, y, 0.1));
}

TEST_CASE("train_loss_resolvent equals the ridge objective at the minimizer") {
    RngStream rng(23);
    const Eigen::MatrixXd F = rng.normal_matrix(40, 60);
    const Eigen::VectorXd y = rng.normal_vector(40);
    for (double lambda : {0.01, 0.3, 2.0}) {
        const RidgeFit fit = ridge_fit(F, y, lambda);
        const double res = train_loss_resolvent(F, y, lambda);
        CHECK(std::abs(res - fit.train_loss) / fit.train_loss < 1e-8);
    }
}

TEST_CASE("train_loss_resolvent limits") {
    RngStream rng(29);
    const Eigen::VectorXd y = rng.normal_vector(30);
    const Eigen::MatrixXd Fz = Eigen::MatrixXd::Zero(30, 5);
    CHECK(train_loss_resolvent(Fz, y, 0.7) ==
          doctest::Approx(y.squaredNorm() / 30.0).epsilon(1e-12));

    // lambda -> infinity approaches ||y||^2/n monotonically
    const Eigen::MatrixXd F = rng.normal_matrix(30, 20);
    double prev = 0.0;
    for (double lambda : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
        const double v = train_loss_resolvent(F, y, lambda);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(prev <= y.squaredNorm() / 30.0 + 1e-12);
    CHECK(prev > 0.99 * y.squaredNorm() / 30.0);
}

TEST_CASE("ridge optimality and the norm bound from the zero-vector comparison") {
    RngStream rng(31);
    const Eigen::MatrixXd F = rng.normal_matrix(40, 25);
    const Eigen::VectorXd y = rng.normal_vector(40);
    const double lambda = 0.2;
    const RidgeFit fit = ridge_fit(F, y, lambda);
    CHECK(fit.train_loss <= y.squaredNorm() / 40.0 + 1e-12);
    CHECK(fit.a_hat.squaredNorm() <= y.squaredNorm() / (lambda * 40.0) + 1e-12);

    auto objective = [&](const Eigen::VectorXd& a) {
        return (y - F * a).squaredNorm() / 40.0 + lambda * a.squaredNorm();
    };
    const double at_min = objective(fit.a_hat);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd dir = rng.normal_vector(25).normalized() * 1e-3;
        CHECK(objective(fit.a_hat + dir) > at_min);
    }
}

TEST_CASE("train loss is nondecreasing in lambda") {
    RngStream rng(37);
    const Eigen::MatrixXd F = rng.normal_matrix(35, 20);
    const Eigen::VectorXd y = rng.normal_vector(35);
    double prev = 0.0;
    for (double lambda : {0.01, 0.05, 0.2, 1.0, 5.0}) {
        const double v = ridge_fit(F, y, lambda).train_loss;
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("test_error_mc: zero teacher, zero noise, zero coefficients") {
    const Activation zero_teacher = Activation::hermite_combo({0.0, 0.0});
    RngStream rng(41);
    const Eigen::MatrixXd W = rng.normal_matrix(6, 5);
    const Eigen::VectorXd beta = rng.normal_vector(5);
    const Eigen::VectorXd a0 = Eigen::VectorXd::Zero(6);
    const McEstimate est = test_error_mc(W, a0, zero_teacher, beta, 0.0,
                                         Activation::from_name("identity"), 2000, rng);
    CHECK(est.value == 0.0);
    CHECK(est.std_err == 0.0);
}

TEST_CASE("test_error_mc: a_hat = 0 estimates E y^2 = c_star^2 + sigma_eps^2") {
    const Activation teacher = Activation::hermite_combo({0.0, 1.0, 1.0});  // c_star^2 = 3
    const double sigma_eps = std::sqrt(0.5);
    RngStream rng(43);
    const Eigen::MatrixXd W = rng.normal_matrix(8, 200);
    Eigen::VectorXd beta = rng.normal_vector(200);
    beta /= std::sqrt(200.0);
    const Eigen::VectorXd a0 = Eigen::VectorXd::Zero(8);
    RngStream mc(47);
    const McEstimate est = test_error_mc(W, a0, teacher, beta, sigma_eps,
                                         Activation::from_name("relu_shifted"), 50000, mc);
    // E y^2 for y = z + (z^2 - 1) + eps with z ~ N(0, v): 3v^2 - v + 1 + sigma^2;
    // at v = ||beta_star||^2 ~ 1 this is the c_star^2 + sigma^2 = 3.5 of the
    // orthogonality computation
    const double v = beta.squaredNorm();
    const double target = 3.0 * v * v - v + 1.0 + 0.5;
    CHECK(std::abs(est.value - target) < 3.0 * est.std_err + 0.01);
    CHECK(est.n_samples == 50000);
}

TEST_CASE("test_error_mc: standard error shrinks like 1/sqrt(n_test)") {
    const Activation teacher = Activation::hermite_combo({0.0, 1.0});
    RngStream rng(53);
    const Eigen::MatrixXd W = rng.normal_matrix(10, 40);
    Eigen::VectorXd beta = rng.normal_vector(40);
    beta /= std::sqrt(40.0);
    const Eigen::VectorXd a = rng.normal_vector(10) * 0.1;
    RngStream mc1(59), mc2(59);
    const McEstimate e1 = test_error_mc(W, a, teacher, beta, 0.5,
                                        Activation::from_name("tanh"), 100000, mc1);
    const McEstimate e2 = test_error_mc(W, a, teacher, beta, 0.5,
                                        Activation::from_name("tanh"), 400000, mc2);
    const double ratio = e2.std_err / e1.std_err;  // expect ~1/2
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
}

TEST_CASE("test_moment_aleph gaussian moments") {
    CHECK(test_moment_aleph(1, 2.7) == 0.0);
    CHECK(test_moment_aleph(3, 0.9) == 0.0);
    CHECK(test_moment_aleph(2, 1.7) == doctest::Approx(1.7));
    CHECK(test_moment_aleph(4, 1.7) == doctest::Approx(3.0 * 1.7 * 1.7));
    CHECK(test_moment_aleph(6, 2.0) == doctest::Approx(15.0 * 8.0));

    // cross-check against gaussian quadrature of E (s v)^k with v^2 = s^2
    const auto& rule = QuadratureRule::normal(200);
    for (int k : {2, 4, 6, 8}) {
        const double v = 1.3;
        const double quad =
            rule.integrate([&](double z) { return std::pow(std::sqrt(v) * z, k); });
        CHECK(test_moment_aleph(k, v) == doctest::Approx(quad).epsilon(1e-10));
    }
    CHECK_THROWS(test_moment_aleph(9, 1.0));
}
