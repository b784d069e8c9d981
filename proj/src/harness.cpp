#include "mhgrad/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mhgrad/estimators.hpp"
#include "mhgrad/greeks.hpp"
#include "mhgrad/losses.hpp"
#include "mhgrad/mixing.hpp"
#include "mhgrad/models.hpp"
#include "mhgrad/oracle.hpp"

namespace mhgrad {

namespace {

// ---- small utilities -----------------------------------------------------

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// standard error of the mean; 0 when fewer than 2 values
double se_of(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    const double m = mean_of(v);
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    s2 /= static_cast<double>(n - 1);
    return std::sqrt(s2 / static_cast<double>(n));
}

double variance_of(const std::vector<double>& v) {
    RunningMoments acc;
    for (double x : v) acc.push(x);
    return acc.variance();
}

struct RmseStat {
    double rmse;
    double se;
};

// RMSE of estimates against truth, with a delta-method standard error.
RmseStat rmse_of(const std::vector<double>& est, double truth) {
    std::vector<double> sq(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double d = est[i] - truth;
        sq[i] = d * d;
    }
    const double mse = mean_of(sq);
    const double rmse = std::sqrt(mse);
    const double se_mse = se_of(sq);
    return RmseStat{rmse, rmse > 0.0 ? se_mse / (2.0 * rmse) : 0.0};
}

// Static-slot work distribution: task i writes slot i, so values are
// independent of worker count and scheduling order.
void parallel_for(int workers, std::int64_t n, const std::function<void(std::int64_t)>& fn) {
    const std::int64_t cap = std::max<std::int64_t>(n, 1);
    const int w = static_cast<int>(std::min<std::int64_t>(std::max(workers, 1), cap));
    if (w <= 1 || n <= 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::mutex err_mu;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

std::vector<GradPair> draw_pairs(const CoupledGaussian1D& model, const LossFn& f,
                                 bool normalized, std::int64_t n, std::uint64_t seed) {
    NormalRng rng(seed);
    std::vector<GradPair> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        out.push_back(sample_grad_pair(model, f, rng.next(), normalized));
    return out;
}

struct RepEstimates {
    double mean_path;
    double mean_mall;
    double mean_hybrid;
    double lambda_hat;
};

RepEstimates replicate_estimates(const CoupledGaussian1D& model, const LossFn& f,
                                 bool normalized, bool split, std::int64_t n,
                                 std::uint64_t seed, double ridge) {
    const std::vector<GradPair> pairs = draw_pairs(model, f, normalized, n, seed);
    const BatchEstimate p = estimate_batch(pairs, EstimatorMode::Pathwise, ridge);
    const BatchEstimate m = estimate_batch(pairs, EstimatorMode::Malliavin, ridge);
    const BatchEstimate h = split ? estimate_batch_split(pairs, EstimatorMode::Hybrid, ridge)
                                  : estimate_batch(pairs, EstimatorMode::Hybrid, ridge);
    return RepEstimates{p.mean, m.mean, h.mean, h.mixing->lambda_hat};
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

std::string iso_utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string join_reals(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt_real(v[i]);
    }
    return s;
}

std::string join_counts(const std::vector<std::int64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

// Config echo.  Worker count and output path are execution details, not
// experiment parameters: they are omitted so results stay byte-identical
// across worker counts and destinations.
std::vector<std::string> base_meta(const ExperimentConfig& cfg) {
    std::vector<std::string> m;
    m.push_back(std::string("version=") + kVersion);
    m.push_back("experiment=" + experiment_id(cfg.experiment));
    m.push_back("theta=" + fmt_real(cfg.theta));
    m.push_back("alpha_grid=" + join_reals(cfg.alphas));
    m.push_back("n_samples=" + std::to_string(cfg.n_samples));
    m.push_back("replicates=" + std::to_string(cfg.replicates));
    m.push_back("trials=" + std::to_string(cfg.trials));
    m.push_back("batch_sizes=" + join_counts(cfg.batch_sizes));
    m.push_back("ridge=" + (cfg.ridge > 0.0 ? fmt_real(cfg.ridge) : std::string("auto")));
    m.push_back("seed=" + std::to_string(cfg.seed));
    m.push_back("loss=" + cfg.loss);
    m.push_back("normalized_weight=" + bool_str(cfg.effective_normalized()));
    m.push_back("split_batch=" + bool_str(cfg.split_batch));
    m.push_back("lambda_estimation=" + std::string(cfg.split_batch ? "split-batch" : "per-replicate"));
    return m;
}

void finish_meta(CsvTable& t, const ExperimentConfig& cfg) {
    if (cfg.timestamp) t.meta.push_back("timestamp=" + iso_utc_now());
}

std::string opt_cell(const std::optional<double>& v) {
    return v ? fmt_real(*v) : std::string();
}

} // namespace

// ---- config --------------------------------------------------------------

std::vector<double> ExperimentConfig::default_alpha_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(0.5 + 0.25 * i);
    return g;
}

bool ExperimentConfig::effective_normalized() const {
    if (normalized_weight) return *normalized_weight;
    return experiment == Experiment::VarReduction || experiment == Experiment::LambdaVsAlpha;
}

void ExperimentConfig::validate() const {
    if (n_samples < 2) throw ConfigError("n_samples must be >= 2");
    if (replicates < 1) throw ConfigError("replicates must be >= 1");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (!std::isfinite(theta)) throw ConfigError("theta must be finite");
    if (!std::isfinite(ridge)) throw ConfigError("ridge must be finite");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (alphas.empty()) throw ConfigError("alpha grid must be non-empty");
    for (double a : alphas)
        if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alphas must be finite and >= 0");
    if (batch_sizes.empty()) throw ConfigError("batch_sizes must be non-empty");
    for (std::int64_t b : batch_sizes)
        if (b < 2) throw ConfigError("batch sizes must be >= 2");
    if (split_batch && n_samples < 4) throw ConfigError("split_batch needs n_samples >= 4");
    try {
        loss_from_id(loss);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

Experiment experiment_from_id(const std::string& id) {
    if (id == "table1") return Experiment::Table1;
    if (id == "lambda-vs-alpha") return Experiment::LambdaVsAlpha;
    if (id == "batch-mse") return Experiment::BatchMse;
    if (id == "var-reduction") return Experiment::VarReduction;
    if (id == "greeks") return Experiment::Greeks;
    if (id == "timing") return Experiment::Timing;
    throw ConfigError("unknown experiment '" + id +
                      "' (expected table1|lambda-vs-alpha|batch-mse|var-reduction|greeks|timing)");
}

std::string experiment_id(Experiment e) {
    switch (e) {
    case Experiment::Table1: return "table1";
    case Experiment::LambdaVsAlpha: return "lambda-vs-alpha";
    case Experiment::BatchMse: return "batch-mse";
    case Experiment::VarReduction: return "var-reduction";
    case Experiment::Greeks: return "greeks";
    case Experiment::Timing: return "timing";
    }
    throw std::logic_error("unknown experiment enum");
}

std::vector<double> parse_alpha_grid(const std::string& text) {
    if (text.empty()) throw ConfigError("alpha grid must be non-empty");
    std::vector<double> out;
    try {
        if (text.find(':') != std::string::npos) {
            std::istringstream ss(text);
            std::string a, b, step;
            if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, step))
                throw ConfigError("alpha grid must be a:b:step");
            const double lo = std::stod(a);
            const double hi = std::stod(b);
            const double st = std::stod(step);
            if (!(st > 0.0) || hi < lo) throw ConfigError("alpha grid needs a <= b and step > 0");
            const int count = static_cast<int>(std::floor((hi - lo) / st + 1e-9)) + 1;
            for (int i = 0; i < count; ++i) out.push_back(lo + st * i);
        } else {
            std::istringstream ss(text);
            std::string tok;
            while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError("could not parse alpha grid '" + text + "'");
    } catch (const std::out_of_range&) {
        throw ConfigError("alpha grid value out of range in '" + text + "'");
    }
    if (out.empty()) throw ConfigError("alpha grid must be non-empty");
    return out;
}

std::vector<std::int64_t> parse_batch_sizes(const std::string& text) {
    std::vector<std::int64_t> out;
    std::istringstream ss(text);
    std::string tok;
    try {
        while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
    } catch (const std::exception&) {
        throw ConfigError("could not parse batch sizes '" + text + "'");
    }
    if (out.empty()) throw ConfigError("batch size list must be non-empty");
    return out;
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("boolean key '" + key + "' got '" + v + "'");
}

template <class T>
T parse_num(const std::string& v, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, double>) return std::stod(v);
        else if constexpr (std::is_same_v<T, std::uint64_t>) return std::stoull(v);
        else return static_cast<T>(std::stoll(v));
    } catch (const std::exception&) {
        throw ConfigError("could not parse value '" + v + "' for key '" + key + "'");
    }
}

} // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
    if (key == "experiment") cfg.experiment = experiment_from_id(value);
    else if (key == "n_samples" || key == "samples") cfg.n_samples = parse_num<std::int64_t>(value, key);
    else if (key == "replicates") cfg.replicates = parse_num<std::int64_t>(value, key);
    else if (key == "trials") cfg.trials = parse_num<std::int64_t>(value, key);
    else if (key == "theta") cfg.theta = parse_num<double>(value, key);
    else if (key == "alpha_grid") cfg.alphas = parse_alpha_grid(value);
    else if (key == "batch_sizes") cfg.batch_sizes = parse_batch_sizes(value);
    else if (key == "ridge") cfg.ridge = parse_num<double>(value, key);
    else if (key == "seed") cfg.seed = parse_num<std::uint64_t>(value, key);
    else if (key == "normalized_weight") cfg.normalized_weight = parse_bool(value, key);
    else if (key == "split_batch") cfg.split_batch = parse_bool(value, key);
    else if (key == "loss") cfg.loss = value;
    else if (key == "out") cfg.out_path = value;
    else if (key == "workers") cfg.workers = parse_num<int>(value, key);
    else if (key == "no_timestamp") cfg.timestamp = !parse_bool(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto ke = key.find_last_not_of(" \t");
        key = key.substr(0, ke == std::string::npos ? 0 : ke + 1);
        const auto vs = value.find_first_not_of(" \t");
        value = vs == std::string::npos ? std::string() : value.substr(vs);
        apply_config_entry(cfg, key, value);
    }
}

// ---- CSV -----------------------------------------------------------------

std::string fmt_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string CsvTable::to_string() const {
    std::string out;
    for (const std::string& m : meta) {
        out += "# ";
        out += m;
        out += '\n';
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

// ---- runners ---------------------------------------------------------------

Table1Result run_table1(const ExperimentConfig& cfg) {
    cfg.validate();
    const bool normalized = cfg.effective_normalized();
    const QuadratureRule rule = QuadratureRule::gauss_hermite(256);
    const std::vector<LossFn> losses = {LossFn(LossId::Hinge), LossFn(LossId::ClippedQuadratic)};
    const CoupledGaussian1D model(cfg.theta, 2.0);

    std::vector<double> g_true(losses.size());
    for (std::size_t li = 0; li < losses.size(); ++li)
        g_true[li] = true_gradient(model, losses[li], rule);

    const std::int64_t R = cfg.replicates;
    std::vector<std::vector<RepEstimates>> res(losses.size(),
                                               std::vector<RepEstimates>(static_cast<std::size_t>(R)));
    parallel_for(cfg.workers, static_cast<std::int64_t>(losses.size()) * R, [&](std::int64_t t) {
        const std::size_t li = static_cast<std::size_t>(t / R);
        const std::int64_t r = t % R;
        const std::uint64_t seed = derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(r), li);
        res[li][static_cast<std::size_t>(r)] = replicate_estimates(
            model, losses[li], normalized, cfg.split_batch, cfg.n_samples, seed, cfg.ridge);
    });

    Table1Result out;
    for (std::size_t li = 0; li < losses.size(); ++li) {
        std::vector<double> mp, mm, mh, lam;
        for (const RepEstimates& e : res[li]) {
            mp.push_back(e.mean_path);
            mm.push_back(e.mean_mall);
            mh.push_back(e.mean_hybrid);
            lam.push_back(e.lambda_hat);
        }
        const std::string loss_id = loss_id_string(losses[li]);
        const RmseStat rp = rmse_of(mp, g_true[li]);
        const RmseStat rm = rmse_of(mm, g_true[li]);
        const RmseStat rh = rmse_of(mh, g_true[li]);
        out.rows.push_back({loss_id, "pathwise", rp.rmse, rp.se, g_true[li], {}, {}});
        out.rows.push_back({loss_id, "malliavin", rm.rmse, rm.se, g_true[li], {}, {}});
        out.rows.push_back({loss_id, "hybrid", rh.rmse, rh.se, g_true[li], mean_of(lam), se_of(lam)});
    }

    out.table.meta = base_meta(cfg);
    out.table.meta.push_back("alpha=2");
    finish_meta(out.table, cfg);
    out.table.header = {"loss", "method", "rmse", "rmse_se", "g_true", "lambda_mean", "lambda_se"};
    for (const Table1Row& r : out.rows)
        out.table.rows.push_back({r.loss, r.method, fmt_real(r.rmse), fmt_real(r.rmse_se),
                                  fmt_real(r.g_true), opt_cell(r.lambda_mean), opt_cell(r.lambda_se)});
    return out;
}

LambdaAlphaResult run_lambda_vs_alpha(const ExperimentConfig& cfg) {
    cfg.validate();
    const bool normalized = cfg.effective_normalized();
    const LossFn f = loss_from_id(cfg.loss);
    const std::int64_t R = cfg.replicates;
    const std::int64_t A = static_cast<std::int64_t>(cfg.alphas.size());

    std::vector<std::vector<double>> lam(static_cast<std::size_t>(A),
                                         std::vector<double>(static_cast<std::size_t>(R)));
    parallel_for(cfg.workers, A * R, [&](std::int64_t t) {
        const std::size_t ai = static_cast<std::size_t>(t / R);
        const std::int64_t r = t % R;
        const CoupledGaussian1D model(cfg.theta, cfg.alphas[ai]);
        const std::uint64_t seed = derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(r), ai);
        const std::vector<GradPair> pairs = draw_pairs(model, f, normalized, cfg.n_samples, seed);
        lam[ai][static_cast<std::size_t>(r)] = mixing_stats(pairs, cfg.ridge).lambda_hat;
    });

    LambdaAlphaResult out;
    for (std::size_t ai = 0; ai < lam.size(); ++ai)
        out.rows.push_back({cfg.alphas[ai], mean_of(lam[ai]), se_of(lam[ai])});

    out.table.meta = base_meta(cfg);
    finish_meta(out.table, cfg);
    out.table.header = {"alpha", "lambda_mean", "lambda_se", "band_lo", "band_hi"};
    for (const LambdaAlphaRow& r : out.rows)
        out.table.rows.push_back({fmt_real(r.alpha), fmt_real(r.lambda_mean), fmt_real(r.lambda_se),
                                  fmt_real(r.lambda_mean - 2.0 * r.lambda_se),
                                  fmt_real(r.lambda_mean + 2.0 * r.lambda_se)});
    return out;
}

BatchMseResult run_batch_mse(const ExperimentConfig& cfg) {
    cfg.validate();
    const bool normalized = cfg.effective_normalized();
    const LossFn f = loss_from_id(cfg.loss);
    const CoupledGaussian1D model(cfg.theta, 2.0);

    // reference lambda* from one large paired run (reserved replicate tag)
    constexpr std::uint64_t kRefTag = 1000003;
    constexpr std::int64_t kRefSamples = 10000000;
    PairedMoments ref;
    {
        NormalRng rng(derive_stream_seed(cfg.seed, kRefTag, 0));
        for (std::int64_t i = 0; i < kRefSamples; ++i) {
            const GradPair p = sample_grad_pair(model, f, rng.next(), normalized);
            ref.push(p.g_path, p.g_mall);
        }
    }
    const double ref_ridge = cfg.ridge > 0.0 ? cfg.ridge : default_ridge(ref.var_p(), ref.var_m());
    const double lambda_ref = lambda_star(ref.var_p(), ref.var_m(), ref.cov(), ref_ridge);

    const std::int64_t T = cfg.trials;
    const std::int64_t NB = static_cast<std::int64_t>(cfg.batch_sizes.size());
    std::vector<std::vector<double>> sq(static_cast<std::size_t>(NB),
                                        std::vector<double>(static_cast<std::size_t>(T)));
    parallel_for(cfg.workers, NB * T, [&](std::int64_t task) {
        const std::size_t bi = static_cast<std::size_t>(task / T);
        const std::int64_t t = task % T;
        const std::uint64_t seed = derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(t), bi);
        const std::vector<GradPair> pairs =
            draw_pairs(model, f, normalized, cfg.batch_sizes[bi], seed);
        const double lam = mixing_stats(pairs, cfg.ridge).lambda_hat;
        const double d = lam - lambda_ref;
        sq[bi][static_cast<std::size_t>(t)] = d * d;
    });

    BatchMseResult out;
    out.lambda_ref = lambda_ref;
    for (std::size_t bi = 0; bi < sq.size(); ++bi)
        out.rows.push_back({cfg.batch_sizes[bi], mean_of(sq[bi]), se_of(sq[bi])});

    // log-log OLS slope of MSE vs batch size
    std::vector<double> xs, ys;
    for (const BatchMseRow& r : out.rows) {
        if (r.mse > 0.0) {
            xs.push_back(std::log(static_cast<double>(r.batch_size)));
            ys.push_back(std::log(r.mse));
        }
    }
    if (xs.size() >= 2) {
        const double xm = mean_of(xs);
        const double ym = mean_of(ys);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            num += (xs[i] - xm) * (ys[i] - ym);
            den += (xs[i] - xm) * (xs[i] - xm);
        }
        out.slope = num / den;
    } else {
        out.slope = 0.0;
    }

    out.table.meta = base_meta(cfg);
    out.table.meta.push_back("alpha=2");
    out.table.meta.push_back("lambda_ref=" + fmt_real(out.lambda_ref));
    out.table.meta.push_back("loglog_slope=" + fmt_real(out.slope));
    finish_meta(out.table, cfg);
    out.table.header = {"batch_size", "mse", "mse_se", "loglog_slope"};
    for (const BatchMseRow& r : out.rows)
        out.table.rows.push_back({std::to_string(r.batch_size), fmt_real(r.mse),
                                  fmt_real(r.mse_se), fmt_real(out.slope)});
    return out;
}

namespace {

double reduction_from(const std::vector<double>& mp, const std::vector<double>& mm,
                      const std::vector<double>& mh, bool rmse_scale) {
    const double vp = variance_of(mp);
    const double vm = variance_of(mm);
    const double vh = variance_of(mh);
    const double ratio = vh / std::min(vp, vm);
    return 100.0 * (1.0 - (rmse_scale ? std::sqrt(ratio) : ratio));
}

double jackknife_se_reduction(const std::vector<double>& mp, const std::vector<double>& mm,
                              const std::vector<double>& mh) {
    const std::size_t R = mp.size();
    if (R < 3) return 0.0;
    std::vector<double> reds;
    reds.reserve(R);
    std::vector<double> a, b, c;
    a.reserve(R - 1);
    b.reserve(R - 1);
    c.reserve(R - 1);
    for (std::size_t i = 0; i < R; ++i) {
        a.clear();
        b.clear();
        c.clear();
        for (std::size_t j = 0; j < R; ++j) {
            if (j == i) continue;
            a.push_back(mp[j]);
            b.push_back(mm[j]);
            c.push_back(mh[j]);
        }
        reds.push_back(reduction_from(a, b, c, false));
    }
    const double m = mean_of(reds);
    double s = 0.0;
    for (double r : reds) s += (r - m) * (r - m);
    return std::sqrt(s * (static_cast<double>(R - 1) / static_cast<double>(R)));
}

} // namespace

VarReductionResult run_var_reduction(const ExperimentConfig& cfg) {
    cfg.validate();
    const bool normalized = cfg.effective_normalized();
    const LossFn f = loss_from_id(cfg.loss);
    const std::int64_t R = cfg.replicates;
    const std::int64_t A = static_cast<std::int64_t>(cfg.alphas.size());

    std::vector<std::vector<RepEstimates>> res(static_cast<std::size_t>(A),
                                               std::vector<RepEstimates>(static_cast<std::size_t>(R)));
    parallel_for(cfg.workers, A * R, [&](std::int64_t t) {
        const std::size_t ai = static_cast<std::size_t>(t / R);
        const std::int64_t r = t % R;
        const CoupledGaussian1D model(cfg.theta, cfg.alphas[ai]);
        const std::uint64_t seed = derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(r), ai);
        res[ai][static_cast<std::size_t>(r)] = replicate_estimates(
            model, f, normalized, cfg.split_batch, cfg.n_samples, seed, cfg.ridge);
    });

    VarReductionResult out;
    for (std::size_t ai = 0; ai < res.size(); ++ai) {
        std::vector<double> mp, mm, mh, lam;
        for (const RepEstimates& e : res[ai]) {
            mp.push_back(e.mean_path);
            mm.push_back(e.mean_mall);
            mh.push_back(e.mean_hybrid);
            lam.push_back(e.lambda_hat);
        }
        VarReductionRow row;
        row.alpha = cfg.alphas[ai];
        row.v_path = variance_of(mp);
        row.v_mall = variance_of(mm);
        row.v_hybrid = variance_of(mh);
        row.reduction_pct = reduction_from(mp, mm, mh, false);
        row.rmse_reduction_pct = reduction_from(mp, mm, mh, true);
        row.reduction_se = jackknife_se_reduction(mp, mm, mh);
        row.lambda_mean = mean_of(lam);
        out.rows.push_back(row);
    }

    out.table.meta = base_meta(cfg);
    finish_meta(out.table, cfg);
    out.table.header = {"alpha", "reduction_pct", "reduction_se", "rmse_reduction_pct",
                        "v_path", "v_mall", "v_hybrid", "lambda_mean"};
    for (const VarReductionRow& r : out.rows)
        out.table.rows.push_back({fmt_real(r.alpha), fmt_real(r.reduction_pct),
                                  fmt_real(r.reduction_se), fmt_real(r.rmse_reduction_pct),
                                  fmt_real(r.v_path), fmt_real(r.v_mall), fmt_real(r.v_hybrid),
                                  fmt_real(r.lambda_mean)});
    return out;
}

GreeksResult run_greeks(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<double> moneyness = {0.5, 0.8, 1.0, 1.2, 2.0};
    const double s0 = 100.0, mu = 0.05, sigma = 0.2, T = 1.0;
    const double bump = 1e-4 * s0;
    const QuadratureRule rule = QuadratureRule::gauss_hermite(256);
    const std::int64_t R = cfg.replicates;
    const std::int64_t M = static_cast<std::int64_t>(moneyness.size());

    struct GreekRep {
        double mp, mm, mh, mb; // replicate means per method
        double vp, vm, vh, vb; // per-sample variances
        double lambda;
    };
    std::vector<std::vector<GreekRep>> res(static_cast<std::size_t>(M),
                                           std::vector<GreekRep>(static_cast<std::size_t>(R)));
    parallel_for(cfg.workers, M * R, [&](std::int64_t t) {
        const std::size_t mi = static_cast<std::size_t>(t / R);
        const std::int64_t r = t % R;
        const GbmSpec spec(s0, mu, sigma, T, moneyness[mi] * s0);
        NormalRng rng(derive_stream_seed(cfg.seed, static_cast<std::uint64_t>(r), mi));
        const double sqT = std::sqrt(T);
        std::vector<GradPair> pairs;
        pairs.reserve(static_cast<std::size_t>(cfg.n_samples));
        RunningMoments bump_acc;
        for (std::int64_t i = 0; i < cfg.n_samples; ++i) {
            const double w = sqT * rng.next();
            pairs.push_back(delta_pair(spec, w));
            bump_acc.push(delta_bump_sample(spec, w, bump));
        }
        const BatchEstimate p = estimate_batch(pairs, EstimatorMode::Pathwise, cfg.ridge);
        const BatchEstimate m = estimate_batch(pairs, EstimatorMode::Malliavin, cfg.ridge);
        const BatchEstimate h = cfg.split_batch
                                    ? estimate_batch_split(pairs, EstimatorMode::Hybrid, cfg.ridge)
                                    : delta_hybrid(spec, pairs, cfg.ridge);
        res[mi][static_cast<std::size_t>(r)] =
            GreekRep{p.mean,        m.mean,        h.mean,        bump_acc.mean,
                     *p.variance,   *m.variance,   *h.variance,   bump_acc.variance(),
                     h.mixing->lambda_hat};
    });

    GreeksResult out;
    for (std::size_t mi = 0; mi < res.size(); ++mi) {
        const GbmSpec spec(s0, mu, sigma, T, moneyness[mi] * s0);
        out.rows.push_back({moneyness[mi], "oracle", delta_oracle(spec, rule), 0.0, {}, {}});
        std::vector<double> mp, mm, mh, mb, lam;
        double vp = 0, vm = 0, vh = 0, vb = 0;
        for (const GreekRep& e : res[mi]) {
            mp.push_back(e.mp);
            mm.push_back(e.mm);
            mh.push_back(e.mh);
            mb.push_back(e.mb);
            lam.push_back(e.lambda);
            vp += e.vp;
            vm += e.vm;
            vh += e.vh;
            vb += e.vb;
        }
        const double nR = static_cast<double>(R);
        vp /= nR;
        vm /= nR;
        vh /= nR;
        vb /= nR;
        // single-replicate runs fall back to the per-sample variance for SE
        const auto se = [&](const std::vector<double>& v, double var_ps) {
            if (v.size() >= 2) return se_of(v);
            return std::sqrt(var_ps / static_cast<double>(cfg.n_samples));
        };
        out.rows.push_back({moneyness[mi], "pathwise", mean_of(mp), se(mp, vp), vp, {}});
        out.rows.push_back({moneyness[mi], "malliavin", mean_of(mm), se(mm, vm), vm, {}});
        out.rows.push_back({moneyness[mi], "hybrid", mean_of(mh), se(mh, vh), vh, mean_of(lam)});
        out.rows.push_back({moneyness[mi], "bump", mean_of(mb), se(mb, vb), vb, {}});
    }

    out.table.meta = base_meta(cfg);
    out.table.meta.push_back("gbm=s0:100,mu:0.05,sigma:0.2,T:1");
    out.table.meta.push_back("moneyness_grid=0.5,0.8,1,1.2,2");
    out.table.meta.push_back("bump_h=" + fmt_real(bump));
    finish_meta(out.table, cfg);
    out.table.header = {"moneyness", "method", "delta_mean", "delta_se", "variance", "lambda_hat"};
    for (const GreeksRow& r : out.rows)
        out.table.rows.push_back({fmt_real(r.moneyness), r.method, fmt_real(r.delta_mean),
                                  fmt_real(r.delta_se), opt_cell(r.variance),
                                  opt_cell(r.lambda_hat)});
    return out;
}

TimingResult run_timing(const ExperimentConfig& cfg) {
    cfg.validate();
    const CoupledGaussian1D model(cfg.theta, 2.0);
    const LossFn f = loss_from_id(cfg.loss);
    const bool normalized = cfg.effective_normalized();
    const QuadratureRule rule = QuadratureRule::gauss_hermite(256);
    NormalRng rng(cfg.seed);

    TimingResult out;
    const auto bench = [&](const std::string& name, std::int64_t calls,
                           const std::function<double()>& body) {
        volatile double sink = 0.0;
        const auto t0 = std::chrono::steady_clock::now();
        for (std::int64_t i = 0; i < calls; ++i) sink = sink + body();
        const auto t1 = std::chrono::steady_clock::now();
        (void)sink;
        const double ns =
            static_cast<double>(
                std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count()) /
            static_cast<double>(calls);
        out.rows.push_back({name, ns, calls});
    };
    const std::int64_t n = cfg.n_samples;
    bench("pathwise_sample", n, [&] { return pathwise_sample(model, f, rng.next()); });
    bench("malliavin_sample", n, [&] { return malliavin_sample(model, f, rng.next(), normalized); });
    bench("grad_pair", n, [&] { return sample_grad_pair(model, f, rng.next(), normalized).g_path; });
    bench("oracle_gradient", 50, [&] { return true_gradient(model, f, rule); });

    out.table.meta = base_meta(cfg);
    out.table.meta.push_back("note=wall-clock measurements; values vary run to run");
    finish_meta(out.table, cfg);
    out.table.header = {"method", "ns_per_call", "calls"};
    for (const TimingRow& r : out.rows)
        out.table.rows.push_back({r.method, fmt_real(r.ns_per_call), std::to_string(r.calls)});
    return out;
}

std::string run_experiment_csv(const ExperimentConfig& cfg) {
    switch (cfg.experiment) {
    case Experiment::Table1: return run_table1(cfg).table.to_string();
    case Experiment::LambdaVsAlpha: return run_lambda_vs_alpha(cfg).table.to_string();
    case Experiment::BatchMse: return run_batch_mse(cfg).table.to_string();
    case Experiment::VarReduction: return run_var_reduction(cfg).table.to_string();
    case Experiment::Greeks: return run_greeks(cfg).table.to_string();
    case Experiment::Timing: return run_timing(cfg).table.to_string();
    }
    throw std::logic_error("unknown experiment enum");
}

void write_output(const ExperimentConfig& cfg, const std::string& text) {
    if (cfg.out_path.empty() || cfg.out_path == "-") {
        std::cout << text;
        if (!std::cout) throw IoError("failed writing to stdout");
        return;
    }
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + cfg.out_path);
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing output file: " + cfg.out_path);
}

} // namespace mhgrad
