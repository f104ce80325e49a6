#include "spikelab/rmt.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "spikelab/hermite.hpp"

namespace spikelab {

namespace {

struct System {
    double phi, psi, lambda, c1_sq, cgt1_sq;

    double psi_term(double m1) const { return lambda * psi * m1 / phi - 1.0; }

    Eigen::Vector2d residual(double m1, double m2) const {
        const double Psi = c1_sq * m1 * m2 * psi_term(m1);
        Eigen::Vector2d f;
        f(0) = phi * (m1 - m2) * (cgt1_sq * m1 + c1_sq * m2) + Psi;
        f(1) = (phi / psi) * (c1_sq * m1 * m2 + phi * (m2 - m1)) + Psi;
        return f;
    }

    Eigen::Matrix2d jacobian(double m1, double m2) const {
        const double dPsi_dm1 = c1_sq * m2 * psi_term(m1) + c1_sq * m1 * m2 * (lambda * psi / phi);
        const double dPsi_dm2 = c1_sq * m1 * psi_term(m1);
        Eigen::Matrix2d J;
        J(0, 0) = phi * (cgt1_sq * m1 + c1_sq * m2) + phi * (m1 - m2) * cgt1_sq + dPsi_dm1;
        J(0, 1) = -phi * (cgt1_sq * m1 + c1_sq * m2) + phi * (m1 - m2) * c1_sq + dPsi_dm2;
        J(1, 0) = (phi / psi) * (c1_sq * m2 - phi) + dPsi_dm1;
        J(1, 1) = (phi / psi) * (c1_sq * m1 + phi) + dPsi_dm2;
        return J;
    }

    double dres_dlambda(double m1, double m2) const {
        return c1_sq * m1 * m2 * (psi * m1 / phi);  // same for both equations
    }
};

constexpr double kResidualTol = 1e-10;

// The raw system degenerates numerically when phi/(lambda psi) is far from 1
// (all terms can sit at rounding scale), so Newton runs on the
// nondimensionalized variables u = m * (lambda psi / phi):
//   g1 = phi (u1 - u2)(cgt1^2 u1 + c1^2 u2) + c1^2 u1 u2 (u1 - 1)
//   g2 = (phi/psi) c1^2 u1 u2 + lambda phi (u2 - u1) + c1^2 u1 u2 (u1 - 1)
// These equal the raw residuals divided by (phi/(lambda psi))^2.
struct ScaledSystem {
    double phi, psi, lambda, c1_sq, cgt1_sq;

    Eigen::Vector2d residual(double u1, double u2) const {
        const double cross = c1_sq * u1 * u2 * (u1 - 1.0);
        Eigen::Vector2d g;
        g(0) = phi * (u1 - u2) * (cgt1_sq * u1 + c1_sq * u2) + cross;
        g(1) = (phi / psi) * c1_sq * u1 * u2 + lambda * phi * (u2 - u1) + cross;
        return g;
    }

    Eigen::Matrix2d jacobian(double u1, double u2) const {
        const double dcross_du1 = c1_sq * u2 * (2.0 * u1 - 1.0);
        const double dcross_du2 = c1_sq * u1 * (u1 - 1.0);
        Eigen::Matrix2d J;
        J(0, 0) = phi * (cgt1_sq * u1 + c1_sq * u2) + phi * (u1 - u2) * cgt1_sq + dcross_du1;
        J(0, 1) = -phi * (cgt1_sq * u1 + c1_sq * u2) + phi * (u1 - u2) * c1_sq + dcross_du2;
        J(1, 0) = (phi / psi) * c1_sq * u2 - lambda * phi + dcross_du1;
        J(1, 1) = (phi / psi) * c1_sq * u1 + lambda * phi + dcross_du2;
        return J;
    }
};

bool newton_scaled(const ScaledSystem& sys, double& u1, double& u2, double tol = 1e-13) {
    for (int it = 0; it < 400; ++it) {
        const Eigen::Vector2d g = sys.residual(u1, u2);
        if (g.cwiseAbs().maxCoeff() < tol) return true;
        Eigen::Vector2d step = sys.jacobian(u1, u2).partialPivLu().solve(-g);
        if (!step.allFinite()) return false;
        double t = 1.0;
        // positivity, and no component may shrink by more than half per step;
        // the origin is a spurious double root of the scaled system and a
        // free-falling line search would otherwise slide into it
        while (t > 1e-16 &&
               (u1 + t * step(0) < 0.5 * u1 || u2 + t * step(1) < 0.5 * u2))
            t *= 0.5;
        const double g_norm = g.squaredNorm();
        while (t > 1e-16) {
            const Eigen::Vector2d g_new = sys.residual(u1 + t * step(0), u2 + t * step(1));
            if (g_new.squaredNorm() < g_norm) break;
            t *= 0.5;
        }
        if (t <= 1e-16) break;
        u1 += t * step(0);
        u2 += t * step(1);
    }
    return sys.residual(u1, u2).cwiseAbs().maxCoeff() < std::max(tol, 1e-12);
}

// Solve by continuation in lambda from a well-conditioned starting ridge,
// which keeps Newton on the branch that is continuous with the
// lambda -> infinity behavior m ~ phi/(lambda psi); the fixed-point system
// can have spurious positive root pairs off that branch. The dimensionless
// iterate u = m lambda psi / phi varies slowly along the path and is carried
// over as the warm start.
bool newton_solve(const System& sys, double& m1, double& m2) {
    const double target = sys.lambda;
    std::vector<double> path;
    double lam = std::max(target, 1.0);
    while (lam > target * 1.000001) {
        path.push_back(lam);
        lam = std::max(target, lam * 0.25);
    }
    path.push_back(target);

    double u1 = 1.0, u2 = 1.0;
    for (double l : path) {
        const ScaledSystem scaled{sys.phi, sys.psi, l, sys.c1_sq, sys.cgt1_sq};
        if (!newton_scaled(scaled, u1, u2)) return false;
        if (std::max(u1, u2) < 1e-10) return false;  // collapsed to the origin root
    }
    const double s = sys.phi / (target * sys.psi);
    m1 = s * u1;
    m2 = s * u2;
    return true;
}

// Eliminating m2 from the second equation (linear in m2) reduces the system
// to a quartic in m1; used as a fallback root filter when Newton stalls.
bool quartic_solve(const System& sys, double& m1_out, double& m2_out) {
    const double phi = sys.phi, psi = sys.psi, lambda = sys.lambda;
    const double c1s = sys.c1_sq, g1s = sys.cgt1_sq;
    // m2 = A m1 / D(m1),  D = d2 m1^2 + d1 m1 + d0
    const double A = phi * phi / psi;
    const double d2 = c1s * lambda * psi / phi;
    const double d1 = c1s * (phi / psi - 1.0);
    const double d0 = phi * phi / psi;  // equals A, so D - A = m1 (d2 m1 + d1)

    // P(m1) = phi (D - A)(g1s D + c1s A) + c1s A (lambda psi m1/phi - 1) D
    // expand into coefficients of m1^0..m1^4
    auto poly_mul = [](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> c(a.size() + b.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
        return c;
    };
    auto poly_add = [](std::vector<double> a, const std::vector<double>& b) {
        if (b.size() > a.size()) a.resize(b.size(), 0.0);
        for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
        return a;
    };
    const std::vector<double> D = {d0, d1, d2};
    const std::vector<double> DmA = {0.0, d1, d2};
    std::vector<double> gD_cA = {g1s * d0 + c1s * A, g1s * d1, g1s * d2};
    std::vector<double> P = poly_mul(DmA, gD_cA);
    for (double& c : P) c *= phi;
    std::vector<double> lin = {-1.0, lambda * psi / phi};
    std::vector<double> Q = poly_mul(lin, D);
    for (double& c : Q) c *= c1s * A;
    P = poly_add(P, Q);
    while (P.size() > 1 && std::abs(P.back()) < 1e-300) P.pop_back();
    const int deg = static_cast<int>(P.size()) - 1;
    if (deg < 1) return false;

    // companion matrix roots
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 0; i < deg; ++i) C(i, deg - 1) = -P[static_cast<std::size_t>(i)] / P.back();
    for (int i = 1; i < deg; ++i) C(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(C);

    double best_resid = kResidualTol;
    bool found = false;
    for (int i = 0; i < deg; ++i) {
        const std::complex<double> r = es.eigenvalues()(i);
        if (std::abs(r.imag()) > 1e-9 * std::max(1.0, std::abs(r.real()))) continue;
        const double m1 = r.real();
        if (m1 <= 0.0) continue;
        const double Dv = d2 * m1 * m1 + d1 * m1 + d0;
        if (Dv == 0.0) continue;
        const double m2 = A * m1 / Dv;
        if (m2 <= 0.0) continue;
        const double resid = sys.residual(m1, m2).cwiseAbs().maxCoeff();
        if (resid < best_resid) {
            best_resid = resid;
            m1_out = m1;
            m2_out = m2;
            found = true;
        }
    }
    return found;
}

}  // namespace

FixedPoint solve_fixed_point(double phi, double psi, double lambda, double c1, double c_gt1) {
    if (phi <= 0.0 || psi <= 0.0 || lambda <= 0.0)
        throw std::invalid_argument("solve_fixed_point: phi, psi, lambda must be positive");
    if (c1 == 0.0) throw std::invalid_argument("solve_fixed_point: c1 must be nonzero");

    const System sys{phi, psi, lambda, c1 * c1, c_gt1 * c_gt1};
    double m1 = phi / (lambda * psi);
    double m2 = m1;
    bool ok = newton_solve(sys, m1, m2);
    if (!ok) ok = quartic_solve(sys, m1, m2);
    if (!ok) throw std::runtime_error("solve_fixed_point: no convergence after Newton and the "
                                      "quartic fallback");
    if (m1 <= 0.0 || m2 <= 0.0)
        throw std::runtime_error("solve_fixed_point: converged to a non-positive branch");

    // polish with a few undamped Newton steps for a crisp residual
    for (int it = 0; it < 4; ++it) {
        const Eigen::Vector2d f = sys.residual(m1, m2);
        if (f.cwiseAbs().maxCoeff() < 1e-14) break;
        const Eigen::Vector2d step = sys.jacobian(m1, m2).partialPivLu().solve(-f);
        if (!step.allFinite() || m1 + step(0) <= 0.0 || m2 + step(1) <= 0.0) break;
        m1 += step(0);
        m2 += step(1);
    }

    FixedPoint fp;
    fp.m1 = m1;
    fp.m2 = m2;
    const Eigen::Vector2d f = sys.residual(m1, m2);
    fp.residual[0] = f(0);
    fp.residual[1] = f(1);
    if (f.cwiseAbs().maxCoeff() >= kResidualTol)
        throw std::runtime_error("solve_fixed_point: residual above 1e-10 after convergence");
    const auto primes = fixed_point_derivatives(fp, phi, psi, lambda, c1, c_gt1);
    fp.m1_prime = primes.first;
    fp.m2_prime = primes.second;
    return fp;
}

std::pair<double, double> fixed_point_derivatives(const FixedPoint& fp, double phi, double psi,
                                                  double lambda, double c1, double c_gt1) {
    const System sys{phi, psi, lambda, c1 * c1, c_gt1 * c_gt1};
    const Eigen::Matrix2d J = sys.jacobian(fp.m1, fp.m2);
    if (std::abs(J.determinant()) < 1e-300)
        throw std::runtime_error("fixed_point_derivatives: singular Jacobian at the fixed point");
    const double dl = sys.dres_dlambda(fp.m1, fp.m2);
    const Eigen::Vector2d primes = J.partialPivLu().solve(Eigen::Vector2d(-dl, -dl));

    // audit against central finite differences; the step starts at 1e-6*lambda
    // and widens when the solver's m-space precision drowns the difference
    bool audited = false;
    for (double rel_h : {1e-6, 1e-5, 1e-4, 1e-3}) {
        const double h = rel_h * lambda;
        const System sp{phi, psi, lambda + h, c1 * c1, c_gt1 * c_gt1};
        const System sm{phi, psi, lambda - h, c1 * c1, c_gt1 * c_gt1};
        double m1p = fp.m1, m2p = fp.m2, m1m = fp.m1, m2m = fp.m2;
        if (!newton_solve(sp, m1p, m2p) || !newton_solve(sm, m1m, m2m)) continue;
        const double fd1 = (m1p - m1m) / (2.0 * h);
        const double fd2 = (m2p - m2m) / (2.0 * h);
        const double rel1 = std::abs(fd1 - primes(0)) / std::max(1e-12, std::abs(primes(0)));
        const double rel2 = std::abs(fd2 - primes(1)) / std::max(1e-12, std::abs(primes(1)));
        if (rel1 <= 1e-4 && rel2 <= 1e-4) {
            audited = true;
            break;
        }
    }
    if (!audited)
        throw std::runtime_error("fixed_point_derivatives: implicit and finite-difference "
                                 "derivatives disagree beyond 1e-4");
    return {primes(0), primes(1)};
}

double alignment_limit(double c_star1, double c_star, double sigma_eps, double phi) {
    const double denom_sq =
        c_star1 * c_star1 + phi * (c_star * c_star + sigma_eps * sigma_eps);
    if (denom_sq <= 0.0) throw std::invalid_argument("alignment_limit: degenerate inputs");
    return std::abs(c_star1) / std::sqrt(denom_sq);
}

TheoryInputs TheoryInputs::from_config(const ExperimentConfig& cfg) {
    TheoryInputs in;
    in.phi = cfg.phi();
    in.psi = cfg.psi();
    in.lambda = cfg.lambda;
    in.sigma_eps = cfg.sigma_eps;
    in.c1 = cfg.student.c1();
    in.c_gt1 = cfg.student.c_gt1();
    in.student_coeffs = cfg.student.coeffs().coeffs;
    in.teacher_coeffs = cfg.teacher.coeffs().coeffs;
    in.c_star = cfg.teacher.c_total();
    return in;
}

double delta_1(const TheoryInputs& in, const FixedPoint& fp) {
    const double cs1 = in.c_star_k(1);
    return in.psi * in.lambda * std::pow(cs1, 4) * fp.m2 / (in.phi * in.b_sq());
}

double delta_2(const TheoryInputs& in, const FixedPoint& fp) {
    const double cs1 = in.c_star_k(1);
    const double cs2 = in.c_star_k(2);
    const double b2 = in.b_sq();
    return delta_1(in, fp) +
           4.0 * in.psi * in.lambda * std::pow(cs1, 4) * cs2 * cs2 * fp.m1 /
               (3.0 * in.phi * b2 * b2);
}

namespace {

// Omega^{-1} = Mbar2 with entries b^{i+j} (psi/phi) [m2 xi_i1 xi_j1
//   + m1 sum_{k != 1} k! xi_ik xi_jk], i,j in [ell].
Eigen::MatrixXd build_mbar2(int ell, const TheoryInputs& in, const FixedPoint& fp,
                            const XiTable& xi) {
    const double b = std::sqrt(in.b_sq());
    Eigen::MatrixXd M(ell, ell);
    for (int i = 1; i <= ell; ++i) {
        for (int j = 1; j <= ell; ++j) {
            double s = fp.m2 * xi(i, 1) * xi(j, 1);
            double s1 = 0.0;
            for (int k = 0; k <= std::min(i, j); ++k) {
                if (k == 1) continue;
                s1 += factorial(k) * xi(i, k) * xi(j, k);
            }
            s += fp.m1 * s1;
            M(i - 1, j - 1) = std::pow(b, i + j) * (in.psi / in.phi) * s;
        }
    }
    return M;
}

double r_coef(int p, const TheoryInputs& in, const FixedPoint& fp) {
    const double b = std::sqrt(in.b_sq());
    const double ratio = in.c_star_k(1) / b;
    if (p == 1) return (in.psi * fp.m2 / in.phi) * ratio;
    return factorial(p) * (in.psi * fp.m1 / in.phi) * std::pow(ratio, p);
}

}  // namespace

double delta_ell_general(int ell, const TheoryInputs& in, const FixedPoint& fp) {
    if (ell < 1 || ell > 6)
        throw std::invalid_argument("delta_ell_general: ell must lie in [1, 6]");
    for (int k = 1; k <= ell; ++k)
        if (std::abs(in.student_c(k)) < 1e-12)
            throw std::invalid_argument("delta_ell_general: student coefficient c_" +
                                        std::to_string(k) + " vanishes; the ell-spike regime "
                                        "requires c_1..c_ell nonzero");

    const XiTable xi(std::max(ell, XiTable::kDefaultMaxDegree));
    const Eigen::MatrixXd Mbar2 = build_mbar2(ell, in, fp, xi);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Mbar2);
    const double ev_min = es.eigenvalues().minCoeff();
    const double ev_max = es.eigenvalues().maxCoeff();
    if (ev_min <= 0.0 || ev_max / ev_min > 1e12)
        throw std::runtime_error("delta_ell_general: Omega^{-1} is numerically singular");
    const Eigen::MatrixXd Omega = Mbar2.inverse();

    const double b = std::sqrt(in.b_sq());
    double total = 0.0;
    for (int p = 1; p <= ell; ++p) {
        const double cp = in.c_star_k(p);
        if (cp == 0.0) continue;
        for (int q = 1; q <= ell; ++q) {
            const double cq = in.c_star_k(q);
            if (cq == 0.0) continue;
            double inner = 0.0;
            for (int i = 1; i <= ell; ++i)
                for (int j = 1; j <= ell; ++j)
                    inner += Omega(i - 1, j - 1) * std::pow(b, i + j) * xi(i, p) * xi(j, q);
            total += cp * cq * r_coef(p, in, fp) * r_coef(q, in, fp) * inner;
        }
    }
    return in.lambda * total;
}

double lambda_1(const TheoryInputs& in, const FixedPoint& fp) {
    const double cs1 = in.c_star_k(1);
    return -std::pow(cs1, 4) * fp.m2_prime / (in.b_sq() * fp.m1 * fp.m1);
}

double lambda_2(const TheoryInputs& in, const FixedPoint& fp) {
    const double cs1 = in.c_star_k(1);
    const double cs2 = in.c_star_k(2);
    const double b2 = in.b_sq();
    return lambda_1(in, fp) - 4.0 * std::pow(cs1, 4) * cs2 * cs2 * fp.m1_prime /
                                  (3.0 * b2 * b2 * fp.m1 * fp.m1);
}

double m_const(const FixedPoint& fp) {
    return 1.0 - 2.0 * fp.m2 / fp.m1 - fp.m2_prime / (fp.m1 * fp.m1);
}

double m_bar_const(const FixedPoint& fp) { return 1.0 - fp.m2 / fp.m1; }

double m_hat_const(const FixedPoint& fp) { return -fp.m1_prime / (fp.m1 * fp.m1) - 1.0; }

double lambda_1_via_m(const TheoryInputs& in, const FixedPoint& fp) {
    const double cs1 = in.c_star_k(1);
    return std::pow(cs1, 4) * (1.0 + m_const(fp) - 2.0 * m_bar_const(fp)) / in.b_sq();
}

double lambda_2_via_m(const TheoryInputs& in, const FixedPoint& fp) {
    const double cs1 = in.c_star_k(1);
    const double cs2 = in.c_star_k(2);
    const double b2 = in.b_sq();
    return lambda_1_via_m(in, fp) +
           4.0 * std::pow(cs1, 4) * cs2 * cs2 * (1.0 + m_hat_const(fp)) / (3.0 * b2 * b2);
}

std::map<std::string, double> limiting_quadratic_forms(const TheoryInputs& in,
                                                        const FixedPoint& fp, int ell) {
    std::map<std::string, double> out;
    const double cs1 = in.c_star_k(1);
    const double noise_sq = in.c_star * in.c_star + in.sigma_eps * in.sigma_eps;
    const double b2 = in.b_sq();
    out["beta_xtrx_beta"] = in.psi * noise_sq * fp.m2 + (in.psi / in.phi) * cs1 * cs1 * fp.m2;
    out["a_f0r0f0_a_minus_norm"] =
        -in.lambda * in.psi * in.psi * fp.m1 / (in.phi * in.phi) + in.psi / in.phi - 1.0;
    out["h2_mixed"] = 2.0 * cs1 * cs1 * in.psi * fp.m1 / in.phi;
    out["theta2_r_theta2"] = 3.0 * in.psi * fp.m1 / in.phi * b2 * b2;

    const XiTable xi(std::max(ell, XiTable::kDefaultMaxDegree));
    const Eigen::MatrixXd table = build_mbar2(ell, in, fp, xi);
    for (int i = 1; i <= ell; ++i)
        for (int j = 1; j <= ell; ++j) {
            std::ostringstream key;
            key << "hermite_table_" << i << "_" << j;
            out[key.str()] = table(i - 1, j - 1);
        }
    for (int p = 1; p <= ell; ++p) {
        std::ostringstream key;
        key << "r_" << p;
        out[key.str()] = r_coef(p, in, fp);
    }
    return out;
}

TheoryPoint theory_point(const TheoryInputs& in, int max_ell) {
    TheoryPoint tp;
    tp.inputs = in;
    tp.fp = solve_fixed_point(in.phi, in.psi, in.lambda, in.c1, in.c_gt1);
    tp.alignment = alignment_limit(in.c_star_k(1), in.c_star, in.sigma_eps, in.phi);
    tp.delta[1] = delta_1(in, tp.fp);
    tp.delta[2] = delta_2(in, tp.fp);
    tp.lambda_gap[1] = lambda_1(in, tp.fp);
    tp.lambda_gap[2] = lambda_2(in, tp.fp);
    for (int l = 3; l <= max_ell && l <= 6; ++l) {
        bool ok = true;
        for (int k = 1; k <= l; ++k) ok = ok && std::abs(in.student_c(k)) >= 1e-12;
        if (!ok) break;
        tp.delta[l] = delta_ell_general(l, in, tp.fp);
    }
    return tp;
}

TheoryPoint theory_point(const ExperimentConfig& cfg) {
    return theory_point(TheoryInputs::from_config(cfg));
}

}  // namespace spikelab
