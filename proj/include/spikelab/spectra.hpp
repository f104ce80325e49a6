#pragma once

#include <vector>

#include <Eigen/Dense>

namespace spikelab {

// Full singular value set, descending; divided by sqrt(rows) when scaled.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& M, bool scale_by_sqrt_n = false);

// The unique l with (l-1)/(2l) < alpha < l/(2l+2). Throws std::domain_error
// on a boundary (within 1e-9), where the theory is open.
int predicted_ell(double alpha);

struct SpikeDetection {
    int count = 0;
    std::vector<double> values;
};

// Scaled singular values exceeding (1 + margin) * bulk_edge.
SpikeDetection detect_spikes(const Eigen::VectorXd& svals_scaled, double bulk_edge,
                             double margin = 0.1);

// min over orthogonal Q of ||U1 - U2 Q||_op, computed from the principal
// angle cosines of U1'U2 as sqrt(2 - 2 sigma_min). Inputs must have
// orthonormal columns to 1e-8.
double principal_angle_distance(const Eigen::MatrixXd& U1, const Eigen::MatrixXd& U2);

struct AlignmentReport {
    // per target k (1-based degree): best |cos| against the individual top-l
    // left singular vectors
    std::vector<std::pair<int, double>> cosines;
    double subspace_distance = 0.0;
};

// Top-l left singular vectors of F against the given targets; l = targets.size().
AlignmentReport spike_alignment(const Eigen::MatrixXd& F,
                                const std::vector<Eigen::VectorXd>& targets);

struct SpectrumReport {
    Eigen::VectorXd svals;  // descending, scaled by 1/sqrt(n)
    double bulk_edge = 0.0;
    std::vector<double> spike_values;
    int spike_count = 0;
    AlignmentReport alignments;
    double subspace_distance = 0.0;
};

struct Histogram {
    std::vector<double> edges;   // bins + 1 entries
    std::vector<long> counts;    // bins entries
};

Histogram make_histogram(const Eigen::VectorXd& values, int bins = 60);

}  // namespace spikelab
