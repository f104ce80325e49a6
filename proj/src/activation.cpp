#include "spikelab/activation.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace spikelab {

namespace {

constexpr double kShift = 0.3989422804014327;  // 1/sqrt(2*pi)

double relu_shifted(double x) { return (x > 0.0 ? x : 0.0) - kShift; }
// left-continuous subgradient, deriv(0) = 0
double relu_shifted_d(double x) { return x > 0.0 ? 1.0 : 0.0; }

double sigmoid_shifted(double x) { return 1.0 / (1.0 + std::exp(-x)) - 0.5; }
double sigmoid_shifted_d(double x) {
    const double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 - s);
}

}  // namespace

Activation::Activation(Kind kind, std::string name, HermiteCoeffs coeffs,
                       std::vector<double> combo)
    : kind_(kind), name_(std::move(name)), coeffs_(std::move(coeffs)), combo_(std::move(combo)) {
    finalize();
}

void Activation::finalize() {
    auto norms = hermite_norms(coeffs_);
    c_total_ = norms.first;
    c_gt1_ = norms.second;
    if (std::abs(coeffs_[0]) > 1e-8) {
        std::cerr << "[spikelab] warning: activation '" << name_
                  << "' is not centered (c0 = " << coeffs_[0] << ")\n";
    }
}

Activation Activation::from_name(const std::string& name, int truncation) {
    std::function<double(double)> f;
    if (name == "relu_shifted") {
        f = relu_shifted;
    } else if (name == "tanh") {
        f = [](double x) { return std::tanh(x); };
    } else if (name == "sigmoid_shifted") {
        f = sigmoid_shifted;
    } else if (name == "identity") {
        HermiteCoeffs c;
        c.coeffs.assign(static_cast<std::size_t>(truncation) + 1, 0.0);
        c.coeffs[1] = 1.0;
        return Activation(Kind::kIdentity, name, std::move(c), {});
    } else {
        throw std::invalid_argument("Activation: unknown name '" + name + "'");
    }
    HermiteCoeffs c = hermite_coeffs(f, truncation);
    Kind kind = name == "relu_shifted" ? Kind::kReluShifted
                : name == "tanh"       ? Kind::kTanh
                                       : Kind::kSigmoidShifted;
    return Activation(kind, name, std::move(c), {});
}

Activation Activation::hermite_combo(std::vector<double> coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("hermite_combo: empty coefficient list");
    HermiteCoeffs c;
    c.coeffs = coeffs;
    if (c.coeffs.size() < 2) c.coeffs.resize(2, 0.0);
    std::ostringstream name;
    name << "hermite_combo:";
    for (std::size_t i = 0; i < coeffs.size(); ++i) name << (i ? "," : "") << coeffs[i];
    return Activation(Kind::kHermiteCombo, name.str(), std::move(c), std::move(coeffs));
}

Activation Activation::parse(const std::string& spec, int truncation) {
    const std::string prefix = "hermite_combo";
    if (spec.rfind(prefix, 0) == 0) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("hermite_combo requires a coefficient list, e.g. "
                                        "hermite_combo:0,1,1");
        std::vector<double> cs;
        std::stringstream ss(spec.substr(colon + 1));
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (!tok.empty()) cs.push_back(std::stod(tok));
        }
        return hermite_combo(std::move(cs));
    }
    return from_name(spec, truncation);
}

double Activation::operator()(double x) const {
    switch (kind_) {
        case Kind::kReluShifted: return relu_shifted(x);
        case Kind::kTanh: return std::tanh(x);
        case Kind::kSigmoidShifted: return sigmoid_shifted(x);
        case Kind::kIdentity: return x;
        case Kind::kHermiteCombo: {
            double s = 0.0;
            for (std::size_t k = 0; k < combo_.size(); ++k)
                if (combo_[k] != 0.0) s += combo_[k] * hermite_eval(static_cast<int>(k), x);
            return s;
        }
    }
    return 0.0;
}

double Activation::deriv(double x) const {
    switch (kind_) {
        case Kind::kReluShifted: return relu_shifted_d(x);
        case Kind::kTanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Kind::kSigmoidShifted: return sigmoid_shifted_d(x);
        case Kind::kIdentity: return 1.0;
        case Kind::kHermiteCombo: {
            double s = 0.0;
            for (std::size_t k = 1; k < combo_.size(); ++k)
                if (combo_[k] != 0.0)
                    s += combo_[k] * k * hermite_eval(static_cast<int>(k) - 1, x);
            return s;
        }
    }
    return 0.0;
}

}  // namespace spikelab
