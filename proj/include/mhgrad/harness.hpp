#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhgrad/rng.hpp"
#include "mhgrad/running_moments.hpp"

namespace mhgrad {

inline constexpr const char* kVersion = "mhgrad 0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Experiment { Table1, LambdaVsAlpha, BatchMse, VarReduction, Greeks, Timing };

Experiment experiment_from_id(const std::string& id);
std::string experiment_id(Experiment e);

// Full run description.  normalized_weight left unset selects the
// per-experiment default: raw weights everywhere except the lambda-vs-alpha
// and variance-reduction sweeps, which default to the normalized weight.
struct ExperimentConfig {
    Experiment experiment = Experiment::Table1;
    std::int64_t n_samples = 100000;
    std::int64_t replicates = 50;
    std::int64_t trials = 500; // batch-mse trials (separate from replicates)
    std::vector<std::int64_t> batch_sizes = {8, 16, 32, 64, 128, 256, 512};
    std::vector<double> alphas = default_alpha_grid();
    double theta = 0.8;
    double ridge = 0.0; // <= 0: scale-relative default
    std::uint64_t seed = 42;
    std::optional<bool> normalized_weight;
    bool split_batch = false;
    std::string loss = "clipquad"; // sweep objective
    std::string out_path;          // empty: stdout
    int workers = 1;
    bool timestamp = true;

    static std::vector<double> default_alpha_grid(); // 0.5 .. 3.0 step 0.25

    bool effective_normalized() const;
    void validate() const; // throws ConfigError
};

// key=value file, '#' comments; keys mirror the CLI flags.
void apply_config_file(ExperimentConfig& cfg, const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

std::vector<double> parse_alpha_grid(const std::string& text);       // "a:b:step"
std::vector<std::int64_t> parse_batch_sizes(const std::string& text); // "8,16,..."

// CSV document: '#'-prefixed meta block, header, then rows.  Floats are
// serialized with 17 significant digits so re-runs compare byte-for-byte.
struct CsvTable {
    std::vector<std::string> meta; // "key=value"
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_string() const;
};

std::string fmt_real(double x);

// --- experiment results -------------------------------------------------

struct Table1Row {
    std::string loss;
    std::string method;
    double rmse;
    double rmse_se;
    double g_true;
    std::optional<double> lambda_mean; // hybrid rows
    std::optional<double> lambda_se;
};
struct Table1Result {
    std::vector<Table1Row> rows;
    CsvTable table;
};
Table1Result run_table1(const ExperimentConfig& cfg);

struct LambdaAlphaRow {
    double alpha;
    double lambda_mean;
    double lambda_se;
};
struct LambdaAlphaResult {
    std::vector<LambdaAlphaRow> rows;
    CsvTable table;
};
LambdaAlphaResult run_lambda_vs_alpha(const ExperimentConfig& cfg);

struct BatchMseRow {
    std::int64_t batch_size;
    double mse;
    double mse_se;
};
struct BatchMseResult {
    std::vector<BatchMseRow> rows;
    double slope;
    double lambda_ref;
    CsvTable table;
};
BatchMseResult run_batch_mse(const ExperimentConfig& cfg);

struct VarReductionRow {
    double alpha;
    double reduction_pct;      // 100 (1 - v_hybrid / min(v_path, v_mall))
    double reduction_se;       // jackknife over replicates
    double rmse_reduction_pct; // same on the RMSE scale (diagnostic)
    double v_path;
    double v_mall;
    double v_hybrid;
    double lambda_mean;
};
struct VarReductionResult {
    std::vector<VarReductionRow> rows;
    CsvTable table;
};
VarReductionResult run_var_reduction(const ExperimentConfig& cfg);

struct GreeksRow {
    double moneyness;
    std::string method; // oracle|pathwise|malliavin|hybrid|bump
    double delta_mean;
    double delta_se;
    std::optional<double> variance;   // per-sample variance (MC rows)
    std::optional<double> lambda_hat; // hybrid rows
};
struct GreeksResult {
    std::vector<GreeksRow> rows;
    CsvTable table;
};
GreeksResult run_greeks(const ExperimentConfig& cfg);

struct TimingRow {
    std::string method;
    double ns_per_call;
    std::int64_t calls;
};
struct TimingResult {
    std::vector<TimingRow> rows;
    CsvTable table;
};
TimingResult run_timing(const ExperimentConfig& cfg);

// Run cfg.experiment and return the finished CSV text.
std::string run_experiment_csv(const ExperimentConfig& cfg);

// Write text to cfg.out_path ("" or "-" means stdout); IoError on failure.
void write_output(const ExperimentConfig& cfg, const std::string& text);

} // namespace mhgrad
