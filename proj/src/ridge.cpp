#include "spikelab/ridge.hpp"

#include <cmath>
#include <stdexcept>

namespace spikelab {

RidgeFit ridge_fit(const Eigen::MatrixXd& F, const Eigen::VectorXd& y_tilde, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("ridge_fit: lambda must be positive");
    const Eigen::Index n = F.rows();
    const Eigen::Index N = F.cols();
    if (y_tilde.size() != n) throw std::invalid_argument("ridge_fit: inconsistent shapes");

    RidgeFit fit;
    fit.lambda = lambda;
    const double ln = lambda * static_cast<double>(n);
    if (N <= n) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
        A.selfadjointView<Eigen::Lower>().rankUpdate(F.transpose());
        A.diagonal().array() += ln;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("ridge_fit: normal equations not SPD (non-finite inputs?)");
        fit.a_hat = llt.solve(F.transpose() * y_tilde);
    } else {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        A.selfadjointView<Eigen::Lower>().rankUpdate(F);
        A.diagonal().array() += ln;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("ridge_fit: dual system not SPD (non-finite inputs?)");
        fit.a_hat = F.transpose() * llt.solve(y_tilde);
    }
    const Eigen::VectorXd resid = y_tilde - F * fit.a_hat;
    fit.train_loss = resid.squaredNorm() / static_cast<double>(n) + lambda * fit.a_hat.squaredNorm();
    if (!std::isfinite(fit.train_loss))
        throw std::runtime_error("ridge_fit: non-finite training loss");
    return fit;
}

double train_loss_resolvent(const Eigen::MatrixXd& F, const Eigen::VectorXd& y_tilde,
                            double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("train_loss_resolvent: lambda must be positive");
    const Eigen::Index n = F.rows();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    A.selfadjointView<Eigen::Lower>().rankUpdate(F);
    A.diagonal().array() += lambda * static_cast<double>(n);
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    return lambda * y_tilde.dot(llt.solve(y_tilde));
}

McEstimate test_error_mc(const Eigen::MatrixXd& W, const Eigen::VectorXd& a_hat,
                         const Activation& teacher, const Eigen::VectorXd& beta_star,
                         double sigma_eps, const Activation& student, long n_test,
                         RngStream& rng) {
    if (n_test < 1000) throw std::invalid_argument("test_error_mc: n_test must be at least 1000");
    const Eigen::Index d = W.cols();
    if (beta_star.size() != d || a_hat.size() != W.rows())
        throw std::invalid_argument("test_error_mc: inconsistent shapes");

    // streaming mean/variance over batches
    double mean = 0.0, m2 = 0.0;
    long count = 0;
    const Eigen::Index batch = 2048;
    while (count < n_test) {
        const Eigen::Index b = std::min<long>(batch, n_test - count);
        const Eigen::MatrixXd X = rng.normal_matrix(b, d);
        const Eigen::VectorXd z = X * beta_star;
        Eigen::MatrixXd F = X * W.transpose();
        for (Eigen::Index j = 0; j < F.cols(); ++j)
            for (Eigen::Index i = 0; i < b; ++i) F(i, j) = student(F(i, j));
        const Eigen::VectorXd pred = F * a_hat;
        for (Eigen::Index i = 0; i < b; ++i) {
            const double y = teacher(z(i)) + sigma_eps * rng.normal();
            const double r = y - pred(i);
            const double sq = r * r;
            ++count;
            const double delta = sq - mean;
            mean += delta / static_cast<double>(count);
            m2 += delta * (sq - mean);
        }
    }
    McEstimate est;
    est.value = mean;
    est.n_samples = count;
    est.std_err = std::sqrt(m2 / (static_cast<double>(count) - 1.0) / static_cast<double>(count));
    return est;
}

double test_moment_aleph(int k, double beta_norm_sq) {
    if (k < 0 || k > 8) throw std::invalid_argument("test_moment_aleph: k must be in [0, 8]");
    if (k % 2 == 1) return 0.0;
    double dfact = 1.0;
    for (int i = k - 1; i >= 1; i -= 2) dfact *= i;
    return dfact * std::pow(beta_norm_sq, k / 2.0);
}

}  // namespace spikelab
