#include "spikelab/config.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "spikelab/rng.hpp"

namespace spikelab {

void ExperimentConfig::validate() const {
    if (n < 2 || d < 2 || N < 2)
        throw std::invalid_argument("config: n, d, N must all be at least 2");
    if (lambda <= 0.0) throw std::invalid_argument("config: lambda must be positive");
    if (sigma_eps < 0.0) throw std::invalid_argument("config: sigma_eps must be non-negative");
    if (alpha < 0.0 || alpha >= 0.5)
        throw std::invalid_argument("config: alpha must lie in [0, 0.5)");
    for (int l = 2; l <= 24; ++l) {
        const double boundary = (l - 1.0) / (2.0 * l);
        if (std::abs(alpha - boundary) < 0.005) {
            std::cerr << "[spikelab] warning: alpha = " << alpha
                      << " is within 0.005 of the regime boundary (l-1)/(2l) for l = " << l
                      << "; the limit theory there is open\n";
            break;
        }
    }
}

std::string ExperimentConfig::hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    auto add = [&h](std::uint64_t v) { h = mix64(h ^ mix64(v)); };
    add(static_cast<std::uint64_t>(n));
    add(static_cast<std::uint64_t>(d));
    add(static_cast<std::uint64_t>(N));
    auto addf = [&add](double x) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        add(bits);
    };
    addf(alpha);
    addf(eta_scale);
    addf(lambda);
    addf(sigma_eps);
    for (char c : student.name()) add(static_cast<std::uint64_t>(c));
    for (char c : teacher.name()) add(static_cast<std::uint64_t>(c));
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig apply_config_text(ExperimentConfig cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "n") cfg.n = std::stoi(value);
        else if (key == "d") cfg.d = std::stoi(value);
        else if (key == "N") cfg.N = std::stoi(value);
        else if (key == "alpha") cfg.alpha = std::stod(value);
        else if (key == "eta_scale") cfg.eta_scale = std::stod(value);
        else if (key == "lambda") cfg.lambda = std::stod(value);
        else if (key == "sigma_eps") cfg.sigma_eps = std::stod(value);
        else if (key == "student") cfg.student = Activation::parse(value, 16);
        else if (key == "teacher") cfg.teacher = Activation::parse(value, 8);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": unknown key '" + key + "'");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return apply_config_text(ExperimentConfig{}, ss.str());
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig cfg;
    cfg.student = Activation::from_name("relu_shifted");
    cfg.lambda = 0.01;
    if (name == "paper-fig2") {
        cfg.n = 1000;
        cfg.d = 300;
        cfg.N = 500;
        cfg.alpha = 0.29;
        cfg.teacher = Activation::hermite_combo({0.0, 1.0, 1.0});
        cfg.sigma_eps = std::sqrt(0.5);
    } else if (name == "paper-fig3-setting1") {
        cfg.n = 1000;
        cfg.d = 300;
        cfg.N = 500;
        cfg.alpha = 0.20;
        cfg.teacher = Activation::hermite_combo({0.0, 1.0});
        cfg.sigma_eps = 1.0;
    } else if (name == "paper-fig3-setting2") {
        cfg.n = 1000;
        cfg.d = 300;
        cfg.N = 500;
        cfg.alpha = 0.20;
        cfg.teacher = Activation::hermite_combo({0.0, 1.0, 1.0 / std::sqrt(2.0)});
        cfg.sigma_eps = 0.0;
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    return cfg;
}

std::string config_to_text(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "n = " << cfg.n << "\n"
       << "d = " << cfg.d << "\n"
       << "N = " << cfg.N << "\n"
       << "alpha = " << cfg.alpha << "\n"
       << "eta_scale = " << cfg.eta_scale << "\n"
       << "lambda = " << cfg.lambda << "\n"
       << "sigma_eps = " << cfg.sigma_eps << "\n"
       << "student = " << cfg.student.name() << "\n"
       << "teacher = " << cfg.teacher.name() << "\n"
       << "seed = " << cfg.seed << "\n";
    return os.str();
}

}  // namespace spikelab
