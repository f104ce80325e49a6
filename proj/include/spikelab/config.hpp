#pragma once

#include <cstdint>
#include <string>

#include "spikelab/activation.hpp"

namespace spikelab {

// One experiment cell: dimensions, step size eta = eta_scale * n^alpha,
// ridge lambda, noise level, activations, RNG seed.
struct ExperimentConfig {
    int n = 1000;
    int d = 300;
    int N = 500;
    double alpha = 0.29;
    double eta_scale = 1.0;
    double lambda = 0.01;
    double sigma_eps = 0.0;
    Activation student = Activation::from_name("relu_shifted");
    Activation teacher = Activation::hermite_combo({0.0, 1.0, 1.0});
    std::uint64_t seed = 1;

    double phi() const { return static_cast<double>(d) / n; }
    double psi() const { return static_cast<double>(d) / N; }
    double eta() const { return eta_scale * std::pow(static_cast<double>(n), alpha); }

    // Throws on hard violations; warns when alpha sits within 0.005 of a
    // regime boundary (l-1)/(2l), where the theory is open.
    void validate() const;

    std::string hash() const;
};

// Flat key=value config file; unknown keys are errors. Activations accept
// names or "hermite_combo:c0,c1,...".
ExperimentConfig load_config(const std::string& path);
ExperimentConfig apply_config_text(ExperimentConfig base, const std::string& text);

// Presets: paper-fig2, paper-fig3-setting1, paper-fig3-setting2.
ExperimentConfig preset(const std::string& name);

std::string config_to_text(const ExperimentConfig& cfg);

}  // namespace spikelab
