// Command-line front end: single runs, alpha sweeps, spectrum export, theory
// tables, equivalence checks and theory-vs-simulation comparisons.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "spikelab/harness.hpp"
#include "spikelab/model.hpp"

namespace fs = std::filesystem;
using namespace spikelab;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset_name;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "structured text config (key = value)");
    cmd->add_option("--preset", args.preset_name,
                    "preset name: paper-fig2, paper-fig3-setting1, paper-fig3-setting2");
    cmd->add_option("--seed", args.seed, "master seed")->each([&args](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--workers", args.workers, "worker threads for replicate cells");
    cmd->add_option("--out", args.out_dir, "output directory");
}

ExperimentConfig resolve_config(const CommonArgs& args) {
    ExperimentConfig cfg;
    if (!args.preset_name.empty()) cfg = preset(args.preset_name);
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw std::runtime_error("cannot open config file: " + args.config_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        cfg = apply_config_text(cfg, ss.str());
    }
    if (args.seed_set) cfg.seed = args.seed;
    cfg.validate();
    return cfg;
}

fs::path ensure_out(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    fs::create_directories(dir);
    return dir;
}

void print_record(const RunRecord& rec) {
    std::cout << std::setprecision(8);
    std::cout << "run (seed " << rec.seed << ", alpha " << rec.alpha << ")\n";
    for (const auto& [key, m] : rec.measured) {
        std::cout << "  " << std::left << std::setw(22) << key << " " << m.value;
        if (m.std_err > 0.0) std::cout << " +- " << m.std_err;
        std::cout << "\n";
    }
    if (rec.theory) {
        const auto& tp = *rec.theory;
        std::cout << "  theory: m1 " << tp.fp.m1 << ", m2 " << tp.fp.m2 << ", alignment "
                  << tp.alignment;
        for (const auto& [l, v] : tp.delta) std::cout << ", delta_" << l << " " << v;
        for (const auto& [l, v] : tp.lambda_gap) std::cout << ", lambda_" << l << " " << v;
        std::cout << "\n";
    }
}

std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> grid;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) grid.push_back(std::stod(tok));
    return grid;
}

int cmd_simulate(const CommonArgs& args, long n_test) {
    const ExperimentConfig cfg = resolve_config(args);
    RunOptions opts;
    opts.n_test = n_test;
    opts.workers = args.workers;
    const RunRecord rec = run_single(cfg, opts);
    print_record(rec);
    const fs::path dir = ensure_out(args);
    write_runs_csv({rec}, (dir / "runs.csv").string());
    write_runs_json({rec}, (dir / "runs.json").string());
    std::cout << "wrote " << (dir / "runs.csv") << " and " << (dir / "runs.json") << "\n";
    return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& alphas, int replicates, long n_test) {
    SweepSpec spec;
    spec.base = resolve_config(args);
    spec.alpha_grid = parse_grid(alphas);
    spec.replicates = replicates;
    if (spec.alpha_grid.empty()) {
        std::cout << "empty alpha grid; nothing to do\n";
        return 0;
    }
    RunOptions opts;
    opts.n_test = n_test;
    opts.workers = args.workers;
    opts.compute_spectrum = false;
    const auto records = run_sweep(spec, opts);
    const auto rows = aggregate_sweep(records);
    const fs::path dir = ensure_out(args);
    write_runs_csv(records, (dir / "runs.csv").string());
    write_runs_json(records, (dir / "runs.json").string());
    write_sweep_csv(rows, (dir / "sweep.csv").string());
    std::cout << std::setprecision(6);
    std::cout << "alpha  ell  train_gap            test_gap\n";
    for (const auto& row : rows) {
        const auto tg = row.aggregated.count("train_gap") ? row.aggregated.at("train_gap")
                                                          : Measured{};
        const auto te = row.aggregated.count("test_gap") ? row.aggregated.at("test_gap")
                                                         : Measured{};
        std::cout << std::setw(5) << row.alpha << "  " << std::setw(3) << row.ell << "  "
                  << tg.value << " +- " << tg.std_err << "  " << te.value << " +- " << te.std_err
                  << "\n";
    }
    std::cout << "wrote sweep outputs under " << dir << "\n";
    return 0;
}

int cmd_spectrum(const CommonArgs& args, int bins) {
    const ExperimentConfig cfg = resolve_config(args);
    RunOptions opts;
    opts.compute_test_error = false;
    opts.keep_singular_values = true;
    const RunRecord rec = run_single(cfg, opts);
    const fs::path dir = ensure_out(args);
    Eigen::VectorXd sv =
        Eigen::Map<const Eigen::VectorXd>(rec.singular_values.data(),
                                          static_cast<Eigen::Index>(rec.singular_values.size()));
    const Histogram hist = make_histogram(sv, bins);
    std::ostringstream name;
    name << "spectrum_" << cfg.alpha << ".csv";
    write_spectrum_csv(hist, (dir / name.str()).string());
    print_record(rec);
    std::cout << "wrote " << (dir / name.str()) << "\n";
    return 0;
}

int cmd_theory(const CommonArgs& args, const std::string& alphas) {
    const ExperimentConfig cfg = resolve_config(args);
    const TheoryInputs in = TheoryInputs::from_config(cfg);
    const fs::path dir = ensure_out(args);
    std::ofstream out(dir / "theory.csv");
    out << "phi,psi,lambda,m1,m2,m1_prime,m2_prime,alignment,delta_1,delta_2,lambda_1,lambda_2"
        << ",alpha,ell,delta_ell,lambda_ell\n"
        << std::setprecision(17);

    const TheoryPoint tp = theory_point(in);
    auto base_cols = [&](std::ostream& os) {
        os << in.phi << "," << in.psi << "," << in.lambda << "," << tp.fp.m1 << "," << tp.fp.m2
           << "," << tp.fp.m1_prime << "," << tp.fp.m2_prime << "," << tp.alignment << ","
           << tp.delta.at(1) << "," << tp.delta.at(2) << "," << tp.lambda_gap.at(1) << ","
           << tp.lambda_gap.at(2);
    };
    const std::vector<double> grid = alphas.empty() ? std::vector<double>{} : parse_grid(alphas);
    if (grid.empty()) {
        base_cols(out);
        out << ",,,,\n";
    }
    std::cout << std::setprecision(8);
    std::cout << "m1 " << tp.fp.m1 << ", m2 " << tp.fp.m2 << ", m1' " << tp.fp.m1_prime
              << ", m2' " << tp.fp.m2_prime << "\n"
              << "alignment " << tp.alignment << ", delta_1 " << tp.delta.at(1) << ", delta_2 "
              << tp.delta.at(2) << ", lambda_1 " << tp.lambda_gap.at(1) << ", lambda_2 "
              << tp.lambda_gap.at(2) << "\n";
    for (double a : grid) {
        base_cols(out);
        try {
            const int ell = predicted_ell(a);
            const double d = ell <= 2 ? tp.delta.at(ell) : delta_ell_general(ell, in, tp.fp);
            double lg = std::numeric_limits<double>::quiet_NaN();
            if (ell <= 2) lg = tp.lambda_gap.at(ell);
            out << "," << a << "," << ell << "," << d << "," << lg << "\n";
            std::cout << "alpha " << a << ": ell " << ell << ", delta " << d << "\n";
        } catch (const std::exception& e) {
            out << "," << a << ",,,\n";
            std::cout << "alpha " << a << ": " << e.what() << "\n";
        }
    }
    std::cout << "wrote " << (dir / "theory.csv") << "\n";
    return 0;
}

int cmd_ge_check(const CommonArgs& args, int replicates, long n_test) {
    const ExperimentConfig base = resolve_config(args);
    RunOptions opts;
    opts.n_test = n_test;
    std::vector<double> ge_gaps, spiked_gaps, test_gaps;
    for (int k = 0; k < replicates; ++k) {
        ExperimentConfig cfg = base;
        cfg.seed = derive_seed(base.seed, 0, static_cast<std::uint64_t>(k));
        const GeReport rep = ge_check(cfg, opts);
        ge_gaps.push_back(rep.gap_train_ge());
        spiked_gaps.push_back(rep.gap_train_spiked());
        test_gaps.push_back(rep.gap_test_spiked());
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t m = v.size() / 2;
        return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    };
    std::cout << std::setprecision(6);
    std::cout << "gaussian-equivalence check over " << replicates << " seeds\n"
              << "  |Ltr(F0) - Ltr(F0_lin)|   median " << median(ge_gaps) << "\n"
              << "  |Ltr(F)  - Ltr(F_ell)|    median " << median(spiked_gaps) << "\n"
              << "  |Lte(F)  - Lte(F_ell)|    median " << median(test_gaps) << "\n";
    return 0;
}

int cmd_compare(const CommonArgs& args, int replicates, long n_test) {
    const ExperimentConfig cfg = resolve_config(args);
    RunOptions opts;
    opts.n_test = n_test;
    opts.workers = args.workers;
    opts.compute_spectrum = false;
    const auto records = replicate_runs(cfg, replicates, opts);
    const auto [tg, tg_se] = mean_std_err(records, "train_gap");
    const auto [eg, eg_se] = mean_std_err(records, "test_gap");

    const TheoryPoint tp = theory_point(cfg);
    const int ell = predicted_ell(cfg.alpha);
    const double delta_th = tp.delta.count(ell) ? tp.delta.at(ell) : tp.delta.at(2);
    const double lambda_th = tp.lambda_gap.count(ell) ? tp.lambda_gap.at(ell)
                                                      : tp.lambda_gap.at(2);
    std::cout << std::setprecision(6);
    std::cout << "theory vs simulation (" << replicates << " replicates, ell = " << ell << ")\n"
              << "  train gap: measured " << tg << " +- " << tg_se << "   theory " << delta_th
              << "\n"
              << "  test gap:  measured " << eg << " +- " << eg_se << "   theory " << lambda_th
              << "\n";
    const fs::path dir = ensure_out(args);
    write_runs_csv(records, (dir / "runs.csv").string());
    write_runs_json(records, (dir / "runs.json").string());
    std::ofstream out(dir / "compare.csv");
    out << "metric,measured,std_err,theory\n"
        << std::setprecision(17) << "train_gap," << tg << "," << tg_se << "," << delta_th << "\n"
        << "test_gap," << eg << "," << eg_se << "," << lambda_th << "\n";
    std::cout << "wrote " << (dir / "compare.csv") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-step feature learning laboratory"};
    app.require_subcommand(1);

    CommonArgs args;
    long n_test = 100000;
    std::string alphas;
    int replicates = 1;
    int bins = 60;

    auto* simulate = app.add_subcommand("simulate", "single run with diagnostics");
    add_common(simulate, args);
    simulate->add_option("--n-test", n_test, "Monte Carlo test draws");

    auto* sweep = app.add_subcommand("sweep", "replicated runs over an alpha grid");
    add_common(sweep, args);
    sweep->add_option("--alphas", alphas, "comma-separated alpha grid")->required();
    sweep->add_option("--replicates", replicates, "replicates per alpha");
    sweep->add_option("--n-test", n_test, "Monte Carlo test draws");

    auto* spectrum = app.add_subcommand("spectrum", "export the scaled singular value histogram");
    add_common(spectrum, args);
    spectrum->add_option("--bins", bins, "histogram bins");

    auto* theory = app.add_subcommand("theory", "fixed point and closed-form predictions");
    add_common(theory, args);
    theory->add_option("--alphas", alphas, "alpha grid for the staircase columns");

    auto* ge = app.add_subcommand("ge-check", "equivalence comparisons at matched seeds");
    add_common(ge, args);
    ge->add_option("--replicates", replicates, "seeds to aggregate");
    ge->add_option("--n-test", n_test, "Monte Carlo test draws");

    auto* compare = app.add_subcommand("compare", "theory vs simulation report");
    add_common(compare, args);
    compare->add_option("--replicates", replicates, "replicates");
    compare->add_option("--n-test", n_test, "Monte Carlo test draws");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(args, n_test);
        if (sweep->parsed()) return cmd_sweep(args, alphas, replicates, n_test);
        if (spectrum->parsed()) return cmd_spectrum(args, bins);
        if (theory->parsed()) return cmd_theory(args, alphas);
        if (ge->parsed()) return cmd_ge_check(args, replicates, n_test);
        if (compare->parsed()) return cmd_compare(args, replicates, n_test);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
