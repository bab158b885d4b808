#pragma once

#include "decal/decision_maker.hpp"
#include "decal/ingest.hpp"
#include "decal/loss.hpp"
#include "decal/prior.hpp"
#include "decal/toy_models.hpp"
#include "decal/trainer.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace decal {

enum class DataSource { generator, ingest };

/// Where training/evaluation targets come from when data is generated.
/// generator: the synthetic data-generating process.
/// posterior_predictive: independent draws from the exact posterior predictive
/// given the fit set, so empirical risk estimates the exact-predictive risk.
enum class TargetMode { generator, posterior_predictive };

enum class PriorKind { none, simple, bootstrap };

struct DataConfig {
    DataSource source = DataSource::generator;
    SyntheticKind generator = SyntheticKind::linear;
    /// Size of a separate set the posterior is conditioned on; 0 conditions on the train split.
    std::size_t n_fit = 0;
    std::size_t n_train = 1000;
    std::size_t n_val = 200;
    std::size_t n_test = 1000;
    std::vector<double> beta;
    double noise_std = 1.0;
    TargetMode targets = TargetMode::generator;
    std::filesystem::path samples_path;
    std::filesystem::path targets_path;
};

struct DmConfig {
    DmKind kind = DmKind::mlp;
    std::vector<std::size_t> hidden = {20, 20, 10};
    std::optional<double> init_level;
    std::optional<std::uint64_t> seed;
};

struct PriorConfig {
    PriorKind kind = PriorKind::bootstrap;
    std::size_t replicates = kDefaultBootstrapReplicates;
    double lambda = 1.0;
    std::optional<std::filesystem::path> path;
};

struct EvalConfig {
    std::vector<Split> splits = {Split::train, Split::val, Split::test};
    std::filesystem::path out_dir = "out";
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    DataConfig data;
    ConjugateLinRegModel model;
    ApproxSpec approx;
    std::size_t samples = kDefaultSampleCount;
    std::size_t quantiles = kDefaultQuantileCount;
    Loss loss = losses::Tilted{0.9};
    DmConfig dm;
    PriorConfig prior;
    TrainConfig train;
    std::optional<std::uint64_t> train_seed; // derived from the master seed when unset
    EvalConfig eval;
};

/// Strict parse: unknown keys and type mismatches raise ConfigError naming the field path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Pipeline failure tagged with the stage that raised it.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error("stage " + stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct SplitResult {
    Split split = Split::train;
    std::vector<std::string> ids;
    std::vector<QuantileSummary> summaries;
    std::vector<double> h_q;
    std::vector<double> h_dm;
    std::vector<double> h_p; // empty without an exact-posterior oracle
    std::vector<std::optional<double>> y;
    Eigen::MatrixXd x; // empty for ingested data

    bool has_targets() const;
    std::vector<double> targets() const;
};

struct RiskRow {
    Split split = Split::train;
    std::string method;
    double risk = 0.0;
    double std_error = 0.0;
    std::optional<double> improvement;
};

struct OracleRow {
    Split split = Split::train;
    std::string method;
    double p_risk = 0.0;
};

struct RunResult {
    std::vector<SplitResult> splits;
    DecisionMaker dm;
    TrainingRecord record;
    DecisionPrior prior;
    std::vector<RiskRow> risk;
    std::vector<OracleRow> oracle; // exact-predictive risks, generator data only
    std::optional<GaussianPosterior> posterior_true;

    const SplitResult* find(Split split) const;
    const RiskRow* find_risk(Split split, const std::string& method) const;
    const OracleRow* find_oracle(Split split, const std::string& method) const;
};

/// generate/ingest, fit, corrupt, summarize, prior, train, evaluate. No files are written.
RunResult run_experiment(const ExperimentConfig& config);

/// decisions.csv, risk.csv, training.csv, dm.json, prior.csv and (generator data) oracle.csv.
void write_run_outputs(const RunResult& result, const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Bootstrap decision prior at the train-split points (generator data only).
DecisionPrior build_bootstrap_prior(const ExperimentConfig& config);

enum class SweepParam { lambda, quantiles, samples, blend, variance_scale };

SweepParam sweep_param_from_string(const std::string& name);
std::string to_string(SweepParam param);

/// Copy of the config with one field replaced.
ExperimentConfig with_param(ExperimentConfig config, SweepParam param, double value);

struct SweepRow {
    double param_value = 0.0;
    std::string split;
    std::string method;
    double risk = 0.0;
    std::optional<double> improvement;
    std::string error;
};

/// One run per value with the shared master seed; failed runs yield a single
/// row with method "failed" and the message in `error`. Runs may execute in
/// parallel; row order follows the value list.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, SweepParam param, const std::vector<double>& values,
                                const std::filesystem::path& out_dir);

std::string sweep_csv(SweepParam param, const std::vector<SweepRow>& rows);

} // namespace decal
