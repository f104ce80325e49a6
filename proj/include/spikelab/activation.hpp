#pragma once

#include <memory>
#include <string>
#include <vector>

#include "spikelab/hermite.hpp"

namespace spikelab {

// An activation together with its Hermite coefficients and derived norms.
// Student activations default to truncation K=16, teachers to K=8; for
// hermite_combo the given coefficients are the expansion, no quadrature.
class Activation {
  public:
    static Activation from_name(const std::string& name, int truncation = 16);
    static Activation hermite_combo(std::vector<double> coeffs);

    // Parses "relu_shifted", "tanh", ..., or "hermite_combo:c0,c1,...".
    static Activation parse(const std::string& spec, int truncation = 16);

    double operator()(double x) const;
    double deriv(double x) const;

    const std::string& name() const { return name_; }
    const HermiteCoeffs& coeffs() const { return coeffs_; }
    double c1() const { return coeffs_[1]; }
    double c_total() const { return c_total_; }
    double c_gt1() const { return c_gt1_; }
    // coefficient c_k (0 beyond the truncation order)
    double c(int k) const {
        return (k >= 0 && k <= coeffs_.order()) ? coeffs_[k] : 0.0;
    }

  private:
    enum class Kind { kReluShifted, kTanh, kSigmoidShifted, kIdentity, kHermiteCombo };

    Activation(Kind kind, std::string name, HermiteCoeffs coeffs, std::vector<double> combo);
    void finalize();

    Kind kind_;
    std::string name_;
    HermiteCoeffs coeffs_;
    std::vector<double> combo_;  // only for kHermiteCombo
    double c_total_ = 0.0;
    double c_gt1_ = 0.0;
};

}  // namespace spikelab
