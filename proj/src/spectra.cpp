#include "spikelab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace spikelab {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& M, bool scale_by_sqrt_n) {
    if (!M.allFinite()) throw std::invalid_argument("singular_values: non-finite matrix");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
    if (svd.info() != Eigen::Success)
        throw std::runtime_error("singular_values: SVD did not converge");
    Eigen::VectorXd s = svd.singularValues();
    if (scale_by_sqrt_n) s /= std::sqrt(static_cast<double>(M.rows()));
    return s;
}

int predicted_ell(double alpha) {
    if (alpha <= 0.0 || alpha >= 0.5)
        throw std::domain_error("predicted_ell: alpha must lie in (0, 0.5)");
    for (int l = 1; l <= 1000000; ++l) {
        const double lo = (l - 1.0) / (2.0 * l);
        const double hi = static_cast<double>(l) / (2.0 * l + 2.0);
        if (std::abs(alpha - lo) < 1e-9 || std::abs(alpha - hi) < 1e-9)
            throw std::domain_error("predicted_ell: alpha sits on a regime boundary, where the "
                                    "limit is open");
        if (alpha > lo && alpha < hi) return l;
    }
    throw std::domain_error("predicted_ell: alpha too close to 0.5");
}

SpikeDetection detect_spikes(const Eigen::VectorXd& svals_scaled, double bulk_edge,
                             double margin) {
    if (bulk_edge <= 0.0) throw std::invalid_argument("detect_spikes: bulk_edge must be positive");
    SpikeDetection det;
    const double threshold = (1.0 + margin) * bulk_edge;
    for (Eigen::Index i = 0; i < svals_scaled.size(); ++i) {
        if (svals_scaled(i) > threshold) det.values.push_back(svals_scaled(i));
    }
    det.count = static_cast<int>(det.values.size());
    return det;
}

namespace {

void check_orthonormal(const Eigen::MatrixXd& U, const char* which) {
    const Eigen::MatrixXd G = U.transpose() * U;
    const double err = (G - Eigen::MatrixXd::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
    if (err > 1e-8)
        throw std::invalid_argument(std::string("principal_angle_distance: ") + which +
                                    " does not have orthonormal columns");
}

}  // namespace

double principal_angle_distance(const Eigen::MatrixXd& U1, const Eigen::MatrixXd& U2) {
    if (U1.rows() != U2.rows() || U1.cols() != U2.cols())
        throw std::invalid_argument("principal_angle_distance: dimension mismatch");
    check_orthonormal(U1, "U1");
    check_orthonormal(U2, "U2");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(U1.transpose() * U2);
    const double sigma_min = svd.singularValues().minCoeff();
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::min(1.0, sigma_min)));
}

AlignmentReport spike_alignment(const Eigen::MatrixXd& F,
                                const std::vector<Eigen::VectorXd>& targets) {
    if (targets.empty()) throw std::invalid_argument("spike_alignment: no targets");
    const int ell = static_cast<int>(targets.size());
    for (const auto& t : targets)
        if (t.size() != F.rows())
            throw std::invalid_argument("spike_alignment: target length mismatch");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(F, Eigen::ComputeThinU);
    const Eigen::MatrixXd U = svd.matrixU().leftCols(ell);

    // orthonormalize the targets; reject near-dependent sets
    Eigen::MatrixXd T(F.rows(), ell);
    for (int k = 0; k < ell; ++k) T.col(k) = targets[static_cast<std::size_t>(k)];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(T);
    const double rmax = std::abs(qr.matrixR()(0, 0));
    const double rmin = std::abs(qr.matrixR()(ell - 1, ell - 1));
    if (rmin <= 1e-10 * rmax)
        throw std::invalid_argument("spike_alignment: targets are linearly dependent");
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(F.rows(), ell);

    AlignmentReport rep;
    for (int k = 0; k < ell; ++k) {
        const Eigen::VectorXd& t = targets[static_cast<std::size_t>(k)];
        const double tn = t.norm();
        double best = 0.0;
        for (int j = 0; j < ell; ++j)
            best = std::max(best, std::abs(U.col(j).dot(t)) / tn);
        rep.cosines.emplace_back(k + 1, best);
    }
    rep.subspace_distance = principal_angle_distance(U, Q);
    return rep;
}

Histogram make_histogram(const Eigen::VectorXd& values, int bins) {
    if (bins < 1) throw std::invalid_argument("make_histogram: bins must be positive");
    Histogram h;
    const double lo = values.minCoeff();
    const double hi = values.maxCoeff();
    const double width = (hi > lo) ? (hi - lo) / bins : 1.0;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = lo + b * width;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        int b = static_cast<int>((values(i) - lo) / width);
        b = std::clamp(b, 0, bins - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

}  // namespace spikelab
