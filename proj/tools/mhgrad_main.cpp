#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mhgrad/harness.hpp"
#include "mhgrad/oracle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitConsistency = 3;
constexpr int kExitIo = 4;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo gradient estimators with variance-optimal mixing"};
    app.set_version_flag("--version", std::string(mhgrad::kVersion));

    std::string experiment;
    app.add_option("experiment", experiment,
                   "table1|lambda-vs-alpha|batch-mse|var-reduction|greeks|timing")
        ->required();

    std::string config_path;
    app.add_option("--config", config_path, "key=value config file (CLI flags override)");

    // tri-state CLI values so file settings are overridden only when given
    std::string samples, replicates, trials, theta, alpha_grid, batch_sizes, ridge, seed,
        loss, out, workers;
    app.add_option("--samples", samples, "MC samples per replicate");
    app.add_option("--replicates", replicates, "independent replicates");
    app.add_option("--trials", trials, "batch-mse trials");
    app.add_option("--theta", theta, "location parameter");
    app.add_option("--alpha-grid", alpha_grid, "a:b:step or comma list");
    app.add_option("--batch-sizes", batch_sizes, "comma list, e.g. 8,16,32");
    app.add_option("--ridge", ridge, "mixing ridge (<=0: scale-relative default)");
    app.add_option("--seed", seed, "master seed (64-bit unsigned)");
    app.add_option("--loss", loss, "hinge|clipquad|quad (sweep objective)");
    app.add_option("--out", out, "output CSV path (default stdout)");
    app.add_option("--workers", workers, "worker threads");

    bool normalized = false, raw = false, split_batch = false, no_timestamp = false;
    app.add_flag("--normalized", normalized, "use the normalized Malliavin weight");
    app.add_flag("--raw", raw, "use the raw Malliavin weight");
    app.add_flag("--split-batch", split_batch, "estimate lambda on first half, apply to second");
    app.add_flag("--no-timestamp", no_timestamp, "suppress the timestamp metadata line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    mhgrad::ExperimentConfig cfg;
    try {
        cfg.experiment = mhgrad::experiment_from_id(experiment);
        if (!config_path.empty()) mhgrad::apply_config_file(cfg, config_path);
        const auto set = [&](const char* key, const std::string& value) {
            if (!value.empty()) mhgrad::apply_config_entry(cfg, key, value);
        };
        set("samples", samples);
        set("replicates", replicates);
        set("trials", trials);
        set("theta", theta);
        set("alpha_grid", alpha_grid);
        set("batch_sizes", batch_sizes);
        set("ridge", ridge);
        set("seed", seed);
        set("loss", loss);
        set("out", out);
        set("workers", workers);
        if (normalized && raw) throw mhgrad::ConfigError("--normalized conflicts with --raw");
        if (normalized) cfg.normalized_weight = true;
        if (raw) cfg.normalized_weight = false;
        if (split_batch) cfg.split_batch = true;
        if (no_timestamp) cfg.timestamp = false;
        cfg.validate();
    } catch (const mhgrad::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const mhgrad::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        const std::string csv = mhgrad::run_experiment_csv(cfg);
        mhgrad::write_output(cfg, csv);
    } catch (const mhgrad::OracleConsistencyError& e) {
        std::cerr << "internal consistency error: " << e.what() << '\n';
        return kExitConsistency;
    } catch (const mhgrad::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
