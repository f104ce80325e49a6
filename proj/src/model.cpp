#include "spikelab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace spikelab {

Dataset generate_data(const ExperimentConfig& cfg, RngStream& rng) {
    Dataset ds;
    ds.beta_star = rng.normal_vector(cfg.d) / std::sqrt(static_cast<double>(cfg.d));

    auto make_split = [&](Eigen::MatrixXd& X, Eigen::VectorXd& y) {
        X = rng.normal_matrix(cfg.n, cfg.d);
        const Eigen::VectorXd z = X * ds.beta_star;
        y.resize(cfg.n);
        for (Eigen::Index i = 0; i < y.size(); ++i)
            y(i) = cfg.teacher(z(i)) + cfg.sigma_eps * rng.normal();
    };
    make_split(ds.X, ds.y);
    make_split(ds.X_tilde, ds.y_tilde);
    return ds;
}

NetworkInit init_network(const ExperimentConfig& cfg, RngStream& rng) {
    NetworkInit init;
    init.W0 = rng.normal_matrix(cfg.N, cfg.d);
    for (Eigen::Index r = 0; r < init.W0.rows(); ++r) init.W0.row(r).normalize();
    init.a = rng.normal_vector(cfg.N) / std::sqrt(static_cast<double>(cfg.N));
    return init;
}

Eigen::MatrixXd rescaled_gradient(const Eigen::MatrixXd& W0, const Eigen::VectorXd& a,
                                  const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const Activation& student) {
    const Eigen::Index N = W0.rows();
    const Eigen::Index n = X.rows();
    if (W0.cols() != X.cols() || a.size() != N || y.size() != n)
        throw std::invalid_argument("rescaled_gradient: inconsistent shapes");

    Eigen::MatrixXd Z = W0 * X.transpose();  // N x n pre-activations
    Eigen::MatrixXd S(N, n);                 // sigma(Z)
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < N; ++i) S(i, j) = student(Z(i, j));

    const Eigen::RowVectorXd proj = a.transpose() * S;  // 1 x n
    // E = (a y' - (1/sqrt N) a (a'S)) o sigma'(Z), built in place over Z
    const double inv_sqrt_N = 1.0 / std::sqrt(static_cast<double>(N));
    for (Eigen::Index j = 0; j < n; ++j) {
        const double yj = y(j);
        const double pj = proj(j) * inv_sqrt_N;
        for (Eigen::Index i = 0; i < N; ++i) {
            const double e = a(i) * (yj - pj);
            Z(i, j) = e * student.deriv(Z(i, j));
        }
    }
    Eigen::MatrixXd G = (Z * X) / static_cast<double>(n);
    if (!G.allFinite())
        throw std::runtime_error("rescaled_gradient: non-finite entries (activation derivative "
                                 "blow-up?)");
    return G;
}

Eigen::MatrixXd gradient_step(const Eigen::MatrixXd& W0, const Eigen::VectorXd& a,
                              const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Activation& student, double eta) {
    if (eta == 0.0) return W0;
    return W0 + eta * rescaled_gradient(W0, a, X, y, student);
}

Eigen::MatrixXd features(const Eigen::MatrixXd& X_any, const Eigen::MatrixXd& W,
                         const Activation& student) {
    if (X_any.cols() != W.cols())
        throw std::invalid_argument("features: column counts must match");
    Eigen::MatrixXd F = X_any * W.transpose();
    for (Eigen::Index j = 0; j < F.cols(); ++j)
        for (Eigen::Index i = 0; i < F.rows(); ++i) F(i, j) = student(F(i, j));
    return F;
}

Eigen::VectorXd estimate_beta(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("estimate_beta: inconsistent shapes");
    return X.transpose() * y / static_cast<double>(X.rows());
}

Eigen::MatrixXd spiked_approximation(const Eigen::MatrixXd& F0, const Eigen::MatrixXd& X_tilde,
                                     const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& a,
                                     double eta, int ell, const HermiteCoeffs& student_coeffs) {
    if (ell < 0) throw std::invalid_argument("spiked_approximation: ell must be non-negative");
    if (ell > student_coeffs.order())
        throw std::invalid_argument("spiked_approximation: ell exceeds coefficient truncation");
    Eigen::MatrixXd F = F0;
    if (ell == 0) return F;

    const Eigen::VectorXd theta = X_tilde * beta_hat;
    const double c1 = student_coeffs[1];
    Eigen::VectorXd theta_pow = Eigen::VectorXd::Ones(theta.size());
    Eigen::VectorXd a_pow = Eigen::VectorXd::Ones(a.size());
    double scale = 1.0;
    for (int k = 1; k <= ell; ++k) {
        theta_pow = theta_pow.cwiseProduct(theta);
        a_pow = a_pow.cwiseProduct(a);
        scale *= c1 * eta;
        const double coef = scale * student_coeffs[k];
        if (coef != 0.0) F.noalias() += coef * theta_pow * a_pow.transpose();
    }
    return F;
}

Eigen::MatrixXd gaussian_equivalent_features(const Eigen::MatrixXd& X_tilde,
                                             const Eigen::MatrixXd& W0, double c1, double c_gt1,
                                             RngStream& rng) {
    if (X_tilde.cols() != W0.cols())
        throw std::invalid_argument("gaussian_equivalent_features: column counts must match");
    Eigen::MatrixXd F = c1 * (X_tilde * W0.transpose());
    if (c_gt1 != 0.0) F += c_gt1 * rng.normal_matrix(X_tilde.rows(), W0.rows());
    return F;
}

double operator_norm(const Eigen::MatrixXd& M, double rel_tol, int max_iter) {
    if (M.size() == 0) return 0.0;
    const bool tall = M.rows() >= M.cols();
    const Eigen::Index dim = tall ? M.cols() : M.rows();
    // power iteration on M'M (or MM') without forming the Gram
    Eigen::VectorXd v = Eigen::VectorXd::Ones(dim) / std::sqrt(static_cast<double>(dim));
    double lambda_prev = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w;
        if (tall)
            w = M.transpose() * (M * v);
        else
            w = M * (M.transpose() * v);
        const double lambda = w.norm();
        if (lambda == 0.0) return 0.0;
        v = w / lambda;
        if (it > 0 && std::abs(lambda - lambda_prev) <= rel_tol * lambda) {
            lambda_prev = lambda;
            break;
        }
        lambda_prev = lambda;
    }
    return std::sqrt(lambda_prev);
}

}  // namespace spikelab
