#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace spikelab {

// splitmix64 finalizer; used both to whiten seeds and to derive
// per-cell streams: derive(master, j, k) = mix(mix(mix(master) ^ j') ^ k').
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t j, std::uint64_t k) {
    return mix64(mix64(mix64(master) ^ mix64(j + 0x51ed2701)) ^ mix64(k + 0xc2b2ae35));
}

// Deterministic normal/uniform stream. Gaussians come from our own
// Box-Muller on top of mt19937_64 so that the byte stream does not depend
// on the standard library's distribution implementation.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : gen_(mix64(seed)) {}

    static RngStream derive(std::uint64_t master, std::uint64_t j, std::uint64_t k) {
        return RngStream(derive_seed(master, j, k));
    }

    // uniform on (0, 1]
    double uniform() {
        const std::uint64_t u = gen_();
        return (static_cast<double>(u >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double t = 2.0 * M_PI * uniform();
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd m(rows, cols);
        // row-major fill so the draw order matches the sample-by-sample story
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
        return m;
    }

    Eigen::VectorXd normal_vector(Eigen::Index size) {
        Eigen::VectorXd v(size);
        for (Eigen::Index i = 0; i < size; ++i) v(i) = normal();
        return v;
    }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace spikelab
