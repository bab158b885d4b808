#pragma once

#include "decal/decision_maker.hpp"
#include "decal/loss.hpp"
#include "decal/prior.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace decal {

struct TrainConfig {
    double lambda = 1.0;
    double learning_rate = 0.01;
    double moment_decay_1 = 0.9;
    double moment_decay_2 = 0.999;
    double epsilon = 1e-8;
    int epochs = 500;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    int patience = 50;
};

void validate(const TrainConfig& config);

/// Quantile summaries with aligned targets.
struct LabeledSummaries {
    std::vector<QuantileSummary> summaries;
    std::vector<double> targets;

    std::size_t size() const noexcept { return targets.size(); }
};

/// Row k describes the parameters after k epochs; row 0 is the initialization.
struct TrainingRecord {
    std::vector<double> train_risk;
    std::vector<double> val_risk;
    std::vector<double> objective;
    std::size_t best_epoch = 0;

    std::size_t size() const noexcept { return objective.size(); }
};

struct TrainResult {
    DecisionMaker dm;
    TrainingRecord record;
};

/// Mean loss plus lambda times the mean Gaussian decision penalty (h - mu)^2 / (2 sigma^2).
double map_objective(const DecisionMaker& dm, std::span<const QuantileSummary> summaries, std::span<const double> targets,
                     const DecisionPrior& prior, const Loss& loss, double lambda);

/// Same objective; also writes its (sub)gradient with respect to the flat parameters.
double map_objective_gradient(const DecisionMaker& dm, std::span<const QuantileSummary> summaries,
                              std::span<const double> targets, const DecisionPrior& prior, const Loss& loss, double lambda,
                              std::vector<double>& grad);

/// Decisions of `dm` for every summary.
std::vector<double> decide(const DecisionMaker& dm, std::span<const QuantileSummary> summaries);

/// Minibatch Adam on the MAP objective with early stopping on validation risk.
/// An empty validation set makes the training risk the stopping criterion.
/// Returns the parameters from the epoch with the lowest monitored risk among
/// epochs whose objective does not exceed the initial one.
TrainResult train(DecisionMaker dm, const LabeledSummaries& train_set, const LabeledSummaries& validation,
                  const DecisionPrior& prior, const Loss& loss, const TrainConfig& config);

struct LambdaSelection {
    double best_lambda = 0.0;
    std::vector<double> mean_validation_risk; // aligned with the grid
};

/// k-fold selection of lambda by held-out empirical risk. Ties go to the larger lambda.
LambdaSelection cross_validate_lambda(std::span<const double> lambda_grid, std::size_t folds, const DecisionMaker& dm,
                                      const LabeledSummaries& data, const DecisionPrior& prior, const Loss& loss,
                                      const TrainConfig& config);

/// CSV with header epoch,train_risk,val_risk,objective.
std::string training_record_csv(const TrainingRecord& record);

} // namespace decal
