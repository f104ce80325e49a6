#include "spikelab/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "spikelab/model.hpp"
#include "spikelab/ridge.hpp"
#include "spikelab/rng.hpp"

namespace spikelab {

namespace {

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%FT%TZ");
    return os.str();
}

void put(RunRecord& rec, const std::string& key, double value, const std::string& estimator,
         long count, double std_err = 0.0) {
    rec.measured[key] = Measured{value, std_err, estimator, count};
}

// run the body for indices [0, total) across `workers` threads; slot writes
// keep the merge deterministic regardless of completion order
template <typename Body>
void parallel_cells(int total, int workers, Body&& body) {
    workers = std::max(1, workers);
    if (workers == 1 || total <= 1) {
        for (int i = 0; i < total; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= total) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min(workers, total);
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

RunRecord run_single(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    RunRecord rec;
    rec.config_hash = cfg.hash();
    rec.seed = cfg.seed;
    rec.alpha = cfg.alpha;
    rec.timestamp = now_iso8601();

    RngStream data_rng = RngStream::derive(cfg.seed, 0, 0);
    RngStream init_rng = RngStream::derive(cfg.seed, 0, 1);
    RngStream test_rng = RngStream::derive(cfg.seed, 0, 2);

    const Dataset ds = generate_data(cfg, data_rng);
    const NetworkInit net = init_network(cfg, init_rng);
    const double eta = cfg.eta();

    const Eigen::MatrixXd W =
        gradient_step(net.W0, net.a, ds.X, ds.y, cfg.student, eta);
    const Eigen::MatrixXd F0 = features(ds.X_tilde, net.W0, cfg.student);
    const Eigen::MatrixXd F = features(ds.X_tilde, W, cfg.student);
    const Eigen::VectorXd beta_hat = estimate_beta(ds.X, ds.y);

    const RidgeFit fit0 = ridge_fit(F0, ds.y_tilde, cfg.lambda);
    const RidgeFit fit = ridge_fit(F, ds.y_tilde, cfg.lambda);
    const long n = cfg.n;
    put(rec, "train_loss_f0", fit0.train_loss, "ridge objective at the minimizer", n);
    put(rec, "train_loss_f", fit.train_loss, "ridge objective at the minimizer", n);
    put(rec, "train_gap", fit0.train_loss - fit.train_loss, "difference of ridge objectives", n);
    put(rec, "beta_alignment",
        std::abs(beta_hat.dot(ds.beta_star)) / (beta_hat.norm() * ds.beta_star.norm()),
        "cosine of estimated vs true direction", cfg.d);
    put(rec, "beta_norm_sq", beta_hat.squaredNorm(), "squared norm of the estimated direction",
        cfg.d);

    if (opts.compute_test_error) {
        const McEstimate te0 = test_error_mc(net.W0, fit0.a_hat, cfg.teacher, ds.beta_star,
                                             cfg.sigma_eps, cfg.student, opts.n_test, test_rng);
        const McEstimate te = test_error_mc(W, fit.a_hat, cfg.teacher, ds.beta_star,
                                            cfg.sigma_eps, cfg.student, opts.n_test, test_rng);
        put(rec, "test_error_f0", te0.value, "Monte Carlo over fresh draws", te0.n_samples,
            te0.std_err);
        put(rec, "test_error_f", te.value, "Monte Carlo over fresh draws", te.n_samples,
            te.std_err);
        put(rec, "test_gap", te0.value - te.value, "difference of Monte Carlo estimates",
            te.n_samples, std::sqrt(te0.std_err * te0.std_err + te.std_err * te.std_err));
    }

    if (opts.compute_spectrum) {
        const Eigen::VectorXd sv = singular_values(F, /*scale_by_sqrt_n=*/true);
        const Eigen::VectorXd sv0 = singular_values(F0, /*scale_by_sqrt_n=*/true);
        const double bulk_edge = sv0(0);
        const SpikeDetection det = detect_spikes(sv, bulk_edge, opts.spike_margin);
        put(rec, "bulk_edge", bulk_edge, "top scaled singular value of untrained features", n);
        put(rec, "spike_count", det.count, "scaled singular values above (1+margin)*edge", n);
        put(rec, "top_sval", sv(0), "top scaled singular value of trained features", n);
        put(rec, "second_sval", sv.size() > 1 ? sv(1) : 0.0, "second scaled singular value", n);

        int ell = 0;
        if (eta > 0.0 && cfg.alpha > 0.0) {
            try {
                ell = predicted_ell(cfg.alpha);
            } catch (const std::domain_error&) {
                ell = 0;  // boundary alpha: no prediction
            }
        }
        if (ell > 0) {
            const Eigen::VectorXd theta = ds.X_tilde * beta_hat;
            std::vector<Eigen::VectorXd> targets;
            Eigen::VectorXd pow = Eigen::VectorXd::Ones(theta.size());
            for (int k = 1; k <= ell; ++k) {
                pow = pow.cwiseProduct(theta);
                targets.push_back(pow);
            }
            const AlignmentReport rep = spike_alignment(F, targets);
            for (const auto& [k, cosv] : rep.cosines)
                put(rec, "spike_cos_" + std::to_string(k), cosv,
                    "best |cos| of top singular vectors vs monomial feature", n);
            put(rec, "subspace_distance", rep.subspace_distance,
                "principal-angle distance, top-ell space vs monomial span", n);
        }
        if (opts.keep_singular_values)
            rec.singular_values.assign(sv.data(), sv.data() + sv.size());
    }

    try {
        rec.theory = theory_point(cfg);
    } catch (const std::exception&) {
        // theory point undefined (e.g. boundary alpha); simulation output stands alone
    }
    rec.ok = true;
    return rec;
}

std::vector<RunRecord> run_sweep(const SweepSpec& spec, const RunOptions& opts) {
    const int J = static_cast<int>(spec.alpha_grid.size());
    const int R = std::max(1, spec.replicates);
    std::vector<RunRecord> records(static_cast<std::size_t>(J) * R);
    parallel_cells(J * R, opts.workers, [&](int idx) {
        const int j = idx / R;
        const int k = idx % R;
        ExperimentConfig cfg = spec.base;
        cfg.alpha = spec.alpha_grid[static_cast<std::size_t>(j)];
        cfg.seed = derive_seed(spec.base.seed, static_cast<std::uint64_t>(j),
                               static_cast<std::uint64_t>(k));
        RunOptions cell_opts = opts;
        cell_opts.workers = 1;
        auto& slot = records[static_cast<std::size_t>(idx)];
        try {
            slot = run_single(cfg, cell_opts);
        } catch (const std::exception& e) {
            slot.ok = false;
            slot.error = e.what();
            slot.alpha = cfg.alpha;
            slot.seed = cfg.seed;
            slot.config_hash = cfg.hash();
            slot.timestamp = now_iso8601();
        }
    });
    return records;
}

std::vector<SweepRow> aggregate_sweep(const std::vector<RunRecord>& records) {
    std::map<double, std::vector<const RunRecord*>> by_alpha;
    for (const auto& r : records) by_alpha[r.alpha].push_back(&r);

    std::vector<SweepRow> rows;
    for (const auto& [alpha, group] : by_alpha) {
        SweepRow row;
        row.alpha = alpha;
        try {
            row.ell = predicted_ell(alpha);
        } catch (const std::exception&) {
            row.ell = 0;
        }
        std::map<std::string, std::vector<double>> samples;
        for (const auto* r : group) {
            if (!r->ok) {
                ++row.n_failed;
                continue;
            }
            ++row.n_ok;
            for (const auto& [key, m] : r->measured) samples[key].push_back(m.value);
        }
        for (const auto& [key, vals] : samples) {
            const double n = static_cast<double>(vals.size());
            double mean = 0.0;
            for (double v : vals) mean += v;
            mean /= n;
            double var = 0.0;
            for (double v : vals) var += (v - mean) * (v - mean);
            const double se = (vals.size() > 1) ? std::sqrt(var / (n - 1.0) / n) : 0.0;
            row.aggregated[key] =
                Measured{mean, se, "mean over replicates", static_cast<long>(vals.size())};
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

GeReport ge_check(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    RngStream data_rng = RngStream::derive(cfg.seed, 0, 0);
    RngStream init_rng = RngStream::derive(cfg.seed, 0, 1);
    RngStream test_rng = RngStream::derive(cfg.seed, 0, 2);
    RngStream ge_rng = RngStream::derive(cfg.seed, 0, 3);

    const Dataset ds = generate_data(cfg, data_rng);
    const NetworkInit net = init_network(cfg, init_rng);
    const double eta = cfg.eta();

    GeReport rep;
    // (i) Gaussian equivalence of the untrained features
    const Eigen::MatrixXd F0 = features(ds.X_tilde, net.W0, cfg.student);
    const Eigen::MatrixXd F0_lin = gaussian_equivalent_features(
        ds.X_tilde, net.W0, cfg.student.c1(), cfg.student.c_gt1(), ge_rng);
    rep.ltr_f0 = ridge_fit(F0, ds.y_tilde, cfg.lambda).train_loss;
    rep.ltr_f0_lin = ridge_fit(F0_lin, ds.y_tilde, cfg.lambda).train_loss;

    // (ii) trained features vs the spiked approximation
    rep.ell = 0;
    if (eta > 0.0 && cfg.alpha > 0.0) rep.ell = predicted_ell(cfg.alpha);
    const Eigen::MatrixXd W = gradient_step(net.W0, net.a, ds.X, ds.y, cfg.student, eta);
    const Eigen::MatrixXd F = features(ds.X_tilde, W, cfg.student);
    const Eigen::VectorXd beta_hat = estimate_beta(ds.X, ds.y);
    const Eigen::MatrixXd F_ell = spiked_approximation(F0, ds.X_tilde, beta_hat, net.a, eta,
                                                       rep.ell, cfg.student.coeffs());
    const RidgeFit fit_f = ridge_fit(F, ds.y_tilde, cfg.lambda);
    const RidgeFit fit_fell = ridge_fit(F_ell, ds.y_tilde, cfg.lambda);
    rep.ltr_f = fit_f.train_loss;
    rep.ltr_f_ell = fit_fell.train_loss;

    // (iii) test errors of both ridge vectors; both predict through sigma(Wx)
    if (opts.compute_test_error) {
        RngStream test_rng2 = test_rng;  // shared draw stream for a paired comparison
        const McEstimate te_f = test_error_mc(W, fit_f.a_hat, cfg.teacher, ds.beta_star,
                                              cfg.sigma_eps, cfg.student, opts.n_test, test_rng);
        const McEstimate te_fell =
            test_error_mc(W, fit_fell.a_hat, cfg.teacher, ds.beta_star, cfg.sigma_eps,
                          cfg.student, opts.n_test, test_rng2);
        rep.lte_f = te_f.value;
        rep.lte_f_se = te_f.std_err;
        rep.lte_f_ell = te_fell.value;
        rep.lte_f_ell_se = te_fell.std_err;
    }
    return rep;
}

namespace {

using nlohmann::json;

json measured_to_json(const Measured& m) {
    return json{{"value", m.value},
                {"std_err", m.std_err},
                {"estimator", m.estimator},
                {"count", m.count}};
}

Measured measured_from_json(const json& j) {
    Measured m;
    m.value = j.at("value").get<double>();
    m.std_err = j.at("std_err").get<double>();
    m.estimator = j.at("estimator").get<std::string>();
    m.count = j.at("count").get<long>();
    return m;
}

json theory_to_json(const TheoryPoint& tp) {
    json deltas = json::object();
    for (const auto& [l, v] : tp.delta) deltas[std::to_string(l)] = v;
    json lambdas = json::object();
    for (const auto& [l, v] : tp.lambda_gap) lambdas[std::to_string(l)] = v;
    return json{{"phi", tp.inputs.phi},
                {"psi", tp.inputs.psi},
                {"lambda", tp.inputs.lambda},
                {"sigma_eps", tp.inputs.sigma_eps},
                {"c1", tp.inputs.c1},
                {"c_gt1", tp.inputs.c_gt1},
                {"c_star", tp.inputs.c_star},
                {"teacher_coeffs", tp.inputs.teacher_coeffs},
                {"student_coeffs", tp.inputs.student_coeffs},
                {"m1", tp.fp.m1},
                {"m2", tp.fp.m2},
                {"m1_prime", tp.fp.m1_prime},
                {"m2_prime", tp.fp.m2_prime},
                {"alignment", tp.alignment},
                {"delta", deltas},
                {"lambda_gap", lambdas}};
}

TheoryPoint theory_from_json(const json& j) {
    TheoryPoint tp;
    tp.inputs.phi = j.at("phi").get<double>();
    tp.inputs.psi = j.at("psi").get<double>();
    tp.inputs.lambda = j.at("lambda").get<double>();
    tp.inputs.sigma_eps = j.at("sigma_eps").get<double>();
    tp.inputs.c1 = j.at("c1").get<double>();
    tp.inputs.c_gt1 = j.at("c_gt1").get<double>();
    tp.inputs.c_star = j.at("c_star").get<double>();
    tp.inputs.teacher_coeffs = j.at("teacher_coeffs").get<std::vector<double>>();
    tp.inputs.student_coeffs = j.at("student_coeffs").get<std::vector<double>>();
    tp.fp.m1 = j.at("m1").get<double>();
    tp.fp.m2 = j.at("m2").get<double>();
    tp.fp.m1_prime = j.at("m1_prime").get<double>();
    tp.fp.m2_prime = j.at("m2_prime").get<double>();
    tp.alignment = j.at("alignment").get<double>();
    for (const auto& [k, v] : j.at("delta").items()) tp.delta[std::stoi(k)] = v.get<double>();
    for (const auto& [k, v] : j.at("lambda_gap").items())
        tp.lambda_gap[std::stoi(k)] = v.get<double>();
    return tp;
}

json record_to_json(const RunRecord& r) {
    json j{{"ok", r.ok},
           {"error", r.error},
           {"config_hash", r.config_hash},
           {"seed", r.seed},
           {"alpha", r.alpha},
           {"timestamp", r.timestamp},
           {"code_version", r.code_version}};
    json ms = json::object();
    for (const auto& [k, m] : r.measured) ms[k] = measured_to_json(m);
    j["measured"] = ms;
    if (r.theory) j["theory"] = theory_to_json(*r.theory);
    if (!r.singular_values.empty()) j["singular_values"] = r.singular_values;
    return j;
}

RunRecord record_from_json(const json& j) {
    RunRecord r;
    r.ok = j.at("ok").get<bool>();
    r.error = j.at("error").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.alpha = j.at("alpha").get<double>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.code_version = j.at("code_version").get<std::string>();
    for (const auto& [k, v] : j.at("measured").items()) r.measured[k] = measured_from_json(v);
    if (j.contains("theory")) r.theory = theory_from_json(j.at("theory"));
    if (j.contains("singular_values"))
        r.singular_values = j.at("singular_values").get<std::vector<double>>();
    return r;
}

std::vector<std::string> collect_metric_keys(const std::vector<RunRecord>& records) {
    std::vector<std::string> keys;
    for (const auto& r : records)
        for (const auto& [k, m] : r.measured)
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    return keys;
}

}  // namespace

void write_runs_csv(const std::vector<RunRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const auto keys = collect_metric_keys(records);
    out << "alpha,seed,ok";
    for (const auto& k : keys) out << "," << k << "," << k << "_se";
    out << "\n";
    out << std::setprecision(17);
    for (const auto& r : records) {
        out << r.alpha << "," << r.seed << "," << (r.ok ? 1 : 0);
        for (const auto& k : keys) {
            auto it = r.measured.find(k);
            if (it == r.measured.end())
                out << ",,";
            else
                out << "," << it->second.value << "," << it->second.std_err;
        }
        out << "\n";
    }
}

void write_runs_json(const std::vector<RunRecord>& records, const std::string& path) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) arr.push_back(record_to_json(r));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << arr.dump(2) << "\n";
}

std::vector<RunRecord> read_runs_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    nlohmann::json arr;
    in >> arr;
    std::vector<RunRecord> records;
    for (const auto& j : arr) records.push_back(record_from_json(j));
    return records;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    std::vector<std::string> keys;
    for (const auto& row : rows)
        for (const auto& [k, m] : row.aggregated)
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    out << "alpha,ell,n_ok,n_failed";
    for (const auto& k : keys) out << "," << k << "," << k << "_se";
    out << "\n";
    out << std::setprecision(17);
    for (const auto& row : rows) {
        out << row.alpha << "," << row.ell << "," << row.n_ok << "," << row.n_failed;
        for (const auto& k : keys) {
            auto it = row.aggregated.find(k);
            if (it == row.aggregated.end())
                out << ",,";
            else
                out << "," << it->second.value << "," << it->second.std_err;
        }
        out << "\n";
    }
}

void write_spectrum_csv(const Histogram& hist, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "bin_lo,bin_hi,count\n" << std::setprecision(17);
    for (std::size_t b = 0; b < hist.counts.size(); ++b)
        out << hist.edges[b] << "," << hist.edges[b + 1] << "," << hist.counts[b] << "\n";
}

std::vector<RunRecord> replicate_runs(const ExperimentConfig& cfg, int replicates,
                                      const RunOptions& opts) {
    SweepSpec spec;
    spec.base = cfg;
    spec.alpha_grid = {cfg.alpha};
    spec.replicates = replicates;
    return run_sweep(spec, opts);
}

std::pair<double, double> mean_std_err(const std::vector<RunRecord>& records,
                                       const std::string& metric) {
    std::vector<double> vals;
    for (const auto& r : records) {
        if (!r.ok) continue;
        auto it = r.measured.find(metric);
        if (it != r.measured.end()) vals.push_back(it->second.value);
    }
    if (vals.empty()) throw std::runtime_error("mean_std_err: no samples for metric " + metric);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double se = vals.size() > 1
                          ? std::sqrt(var / (static_cast<double>(vals.size()) - 1.0) /
                                      static_cast<double>(vals.size()))
                          : 0.0;
    return {mean, se};
}

}  // namespace spikelab
