#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spikelab/config.hpp"
#include "spikelab/rmt.hpp"
#include "spikelab/spectra.hpp"

namespace spikelab {

inline constexpr const char* kCodeVersion = "spikelab 0.1.0";

struct Measured {
    double value = 0.0;
    double std_err = 0.0;     // 0 when the estimator is exact
    std::string estimator;    // how the number was produced
    long count = 0;           // sample count behind the estimate
};

struct RunOptions {
    bool compute_test_error = true;
    long n_test = 100000;
    bool compute_spectrum = true;
    double spike_margin = 0.1;
    int workers = 1;
    bool keep_singular_values = false;  // retain the full scaled spectrum
};

struct RunRecord {
    bool ok = false;
    std::string error;
    std::string config_hash;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::map<std::string, Measured> measured;
    std::optional<TheoryPoint> theory;
    std::vector<double> singular_values;  // scaled; only when requested
    std::string timestamp;
    std::string code_version = kCodeVersion;
};

// One full cell: generate -> init -> gradient step -> features -> ridge on
// F0 and F; optional Monte Carlo test errors and spectrum diagnostics;
// attaches the matching theory point.
RunRecord run_single(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct SweepSpec {
    ExperimentConfig base;
    std::vector<double> alpha_grid;
    int replicates = 1;
};

// replicate k at alpha-index j runs with seed derive_seed(master, j, k); a
// failed cell is recorded and the sweep continues.
std::vector<RunRecord> run_sweep(const SweepSpec& spec, const RunOptions& opts = {});

struct SweepRow {
    double alpha = 0.0;
    int ell = 0;  // 0 when alpha sits on a boundary
    std::map<std::string, Measured> aggregated;  // mean with std error over replicates
    int n_ok = 0;
    int n_failed = 0;
};

std::vector<SweepRow> aggregate_sweep(const std::vector<RunRecord>& records);

// Matched-seed equivalence comparisons:
//  (i) train loss, untrained features vs their Gaussian-equivalent surrogate
//  (ii) train loss, trained features vs the spiked approximation F_ell
//  (iii) test error of the ridge vectors from (ii), shared test stream
struct GeReport {
    double ltr_f0 = 0.0, ltr_f0_lin = 0.0;
    double ltr_f = 0.0, ltr_f_ell = 0.0;
    double lte_f = 0.0, lte_f_se = 0.0;
    double lte_f_ell = 0.0, lte_f_ell_se = 0.0;
    int ell = 0;
    double gap_train_ge() const { return std::abs(ltr_f0 - ltr_f0_lin); }
    double gap_train_spiked() const { return std::abs(ltr_f - ltr_f_ell); }
    double gap_test_spiked() const { return std::abs(lte_f - lte_f_ell); }
};

GeReport ge_check(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Persistence. Paths are created inside `out_dir`.
void write_runs_csv(const std::vector<RunRecord>& records, const std::string& path);
void write_runs_json(const std::vector<RunRecord>& records, const std::string& path);
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path);
void write_spectrum_csv(const Histogram& hist, const std::string& path);
std::vector<RunRecord> read_runs_json(const std::string& path);

// Deterministic replicate runner: replicate k uses derive_seed(master, 0, k).
std::vector<RunRecord> replicate_runs(const ExperimentConfig& cfg, int replicates,
                                      const RunOptions& opts = {});

// Mean and standard error of a per-record metric over successful records.
std::pair<double, double> mean_std_err(const std::vector<RunRecord>& records,
                                       const std::string& metric);

}  // namespace spikelab
