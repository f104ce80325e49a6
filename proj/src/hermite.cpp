#include "spikelab/hermite.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace spikelab {

double hermite_eval(int k, double x) {
    if (k < 0) throw std::invalid_argument("hermite_eval: negative degree");
    if (k > 64) throw std::invalid_argument("hermite_eval: degree exceeds supported cap 64");
    if (k == 0) return 1.0;
    double hm1 = 1.0;
    double h = x;
    for (int j = 1; j < k; ++j) {
        const double hp1 = x * h - j * hm1;
        hm1 = h;
        h = hp1;
    }
    return h;
}

double hermite_deriv(int k, double x) {
    if (k == 0) return 0.0;
    return k * hermite_eval(k - 1, x);
}

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p0 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

QuadratureRule build_normal_rule(int order) {
    // Panel edges symmetric about zero; 0 is an edge so one-sided kinks stay
    // inside analytic panels. Beyond |z|=12 the normal mass is ~1e-32.
    static const double edges[] = {-12.0, -8.0, -6.0, -4.5, -3.0, -2.0, -1.0, -0.5,
                                   0.0,   0.5,  1.0,  2.0,  3.0,  4.5,  6.0,  8.0, 12.0};
    const int n_panels = static_cast<int>(sizeof(edges) / sizeof(edges[0])) - 1;
    const int per_panel = std::max(8, (order + n_panels - 1) / n_panels);

    std::vector<double> xg, wg;
    gauss_legendre(per_panel, xg, wg);

    QuadratureRule rule;
    rule.nodes.resize(static_cast<Eigen::Index>(n_panels) * per_panel);
    rule.weights.resize(rule.nodes.size());
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
    Eigen::Index idx = 0;
    for (int p = 0; p < n_panels; ++p) {
        const double a = edges[p], b = edges[p + 1];
        for (int i = 0; i < per_panel; ++i, ++idx) {
            const double z = 0.5 * (b - a) * xg[static_cast<std::size_t>(i)] + 0.5 * (a + b);
            rule.nodes(idx) = z;
            rule.weights(idx) =
                0.5 * (b - a) * wg[static_cast<std::size_t>(i)] * std::exp(-0.5 * z * z) * inv_sqrt_2pi;
        }
    }
    return rule;
}

}  // namespace

const QuadratureRule& QuadratureRule::normal(int order) {
    static std::mutex mu;
    static std::map<int, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, build_normal_rule(order)).first;
    return it->second;
}

HermiteCoeffs hermite_coeffs(const std::function<double(double)>& activation, int K,
                             int quad_order) {
    if (K < 0) throw std::invalid_argument("hermite_coeffs: K must be non-negative");
    if (quad_order < 2 * K + 8)
        throw std::invalid_argument("hermite_coeffs: quad_order must be at least 2K+8");

    const QuadratureRule& rule = QuadratureRule::normal(quad_order);
    const Eigen::Index m = rule.nodes.size();

    Eigen::VectorXd fz(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        fz(i) = activation(rule.nodes(i));
        if (!std::isfinite(fz(i)))
            throw std::runtime_error("hermite_coeffs: activation returned a non-finite value");
    }

    HermiteCoeffs out;
    out.coeffs.resize(static_cast<std::size_t>(K) + 1);
    // evaluate all H_k on the node set by the recurrence, one degree at a time
    Eigen::VectorXd hm1 = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd h = rule.nodes;
    for (int k = 0; k <= K; ++k) {
        const Eigen::VectorXd& hk = (k == 0) ? hm1 : h;
        out.coeffs[static_cast<std::size_t>(k)] =
            (rule.weights.array() * fz.array() * hk.array()).sum() / factorial(k);
        if (k >= 1) {
            const Eigen::VectorXd hp1 = rule.nodes.array() * h.array() - k * hm1.array();
            hm1 = h;
            h = hp1;
        }
    }
    return out;
}

std::pair<double, double> hermite_norms(const HermiteCoeffs& coeffs) {
    double total_sq = 0.0;
    double gt1_sq = 0.0;
    for (int k = 1; k <= coeffs.order(); ++k) {
        const double term = factorial(k) * coeffs[k] * coeffs[k];
        total_sq += term;
        if (k >= 2) gt1_sq += term;
    }
    return {std::sqrt(total_sq), std::sqrt(gt1_sq)};
}

XiTable::XiTable(int max_degree) : max_degree_(max_degree) {
    if (max_degree < 0) throw std::invalid_argument("XiTable: negative degree");
    rows_.resize(static_cast<std::size_t>(max_degree) + 1);
    rows_[0] = {1.0};
    for (int p = 0; p < max_degree; ++p) {
        const auto& prev = rows_[static_cast<std::size_t>(p)];
        std::vector<double> next(static_cast<std::size_t>(p) + 2, 0.0);
        for (int i = 0; i <= p + 1; ++i) {
            double v = 0.0;
            if (i >= 1) v += prev[static_cast<std::size_t>(i - 1)];
            if (i + 1 <= p) v += (i + 1) * prev[static_cast<std::size_t>(i + 1)];
            next[static_cast<std::size_t>(i)] = v;
        }
        rows_[static_cast<std::size_t>(p) + 1] = std::move(next);
    }
}

const std::vector<double>& XiTable::row(int p) const {
    if (p < 0 || p > max_degree_)
        throw std::invalid_argument("XiTable: degree outside table range");
    return rows_[static_cast<std::size_t>(p)];
}

double XiTable::operator()(int p, int i) const {
    const auto& r = row(p);
    if (i < 0 || i > p) return 0.0;
    return r[static_cast<std::size_t>(i)];
}

std::vector<double> monomial_to_hermite(int p) {
    static const XiTable table;
    return table.row(p);
}

}  // namespace spikelab
