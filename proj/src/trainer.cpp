#include "decal/trainer.hpp"

#include "decal/error.hpp"
#include "decal/io.hpp"
#include "decal/random.hpp"
#include "decal/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace decal {

namespace {

void check_aligned(std::span<const QuantileSummary> summaries, std::span<const double> targets, const DecisionPrior& prior)
{
    if (summaries.size() != targets.size() || prior.size() != targets.size())
        throw InputError("summaries, targets and prior differ in length");
    if (targets.empty()) throw InputError("objective needs at least one point");
}

double penalty(double h, std::size_t i, const DecisionPrior& prior)
{
    const double r = (h - prior.mu[i]) / prior.sigma[i];
    return 0.5 * r * r;
}

double monitored_risk(const DecisionMaker& dm, const LabeledSummaries& set, const Loss& loss)
{
    return empirical_risk(decide(dm, set.summaries), set.targets, loss).empirical_risk;
}

LabeledSummaries pick(const LabeledSummaries& data, std::span<const std::size_t> idx)
{
    LabeledSummaries out;
    for (auto i : idx) {
        out.summaries.push_back(data.summaries[i]);
        out.targets.push_back(data.targets[i]);
    }
    return out;
}

DecisionPrior pick(const DecisionPrior& prior, std::span<const std::size_t> idx)
{
    DecisionPrior out;
    for (auto i : idx) {
        out.ids.push_back(prior.ids[i]);
        out.mu.push_back(prior.mu[i]);
        out.sigma.push_back(prior.sigma[i]);
    }
    return out;
}

} // namespace

void validate(const TrainConfig& c)
{
    if (!(c.learning_rate > 0.0)) throw InputError("learning_rate must be positive");
    if (!(c.moment_decay_1 >= 0.0 && c.moment_decay_1 < 1.0) || !(c.moment_decay_2 >= 0.0 && c.moment_decay_2 < 1.0))
        throw InputError("moment decays must lie in [0, 1)");
    if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) throw InputError("lambda must be a finite non-negative number");
    if (!(c.epsilon > 0.0)) throw InputError("epsilon must be positive");
    if (c.epochs <= 0) throw InputError("epochs must be positive");
    if (c.batch_size == 0) throw InputError("batch_size must be positive");
    if (c.patience < 0) throw InputError("patience must be non-negative");
}

std::vector<double> decide(const DecisionMaker& dm, std::span<const QuantileSummary> summaries)
{
    std::vector<double> out;
    out.reserve(summaries.size());
    for (const auto& s : summaries) out.push_back(dm_forward(dm, s));
    return out;
}

double map_objective(const DecisionMaker& dm, std::span<const QuantileSummary> summaries, std::span<const double> targets,
                     const DecisionPrior& prior, const Loss& loss, double lambda)
{
    check_aligned(summaries, targets, prior);
    double risk = 0.0;
    double pen = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double h = dm_forward(dm, summaries[i]);
        risk += eval_loss(loss, h, targets[i]);
        if (lambda != 0.0) pen += penalty(h, i, prior);
    }
    const auto n = static_cast<double>(targets.size());
    return risk / n + lambda * pen / n;
}

double map_objective_gradient(const DecisionMaker& dm, std::span<const QuantileSummary> summaries,
                              std::span<const double> targets, const DecisionPrior& prior, const Loss& loss, double lambda,
                              std::vector<double>& grad)
{
    check_aligned(summaries, targets, prior);
    grad.assign(parameter_count(dm), 0.0);
    const auto n = static_cast<double>(targets.size());
    double total = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double h = dm_forward(dm, summaries[i]);
        double upstream = loss_subgradient(loss, h, targets[i]);
        total += eval_loss(loss, h, targets[i]);
        if (lambda != 0.0) {
            upstream += lambda * (h - prior.mu[i]) / (prior.sigma[i] * prior.sigma[i]);
            total += lambda * penalty(h, i, prior);
        }
        dm_forward_backward(dm, summaries[i], upstream / n, grad);
    }
    return total / n;
}

TrainResult train(DecisionMaker dm, const LabeledSummaries& train_set, const LabeledSummaries& validation,
                  const DecisionPrior& prior, const Loss& loss, const TrainConfig& config)
{
    validate(config);
    validate(loss);
    check_aligned(train_set.summaries, train_set.targets, prior);
    if (validation.summaries.size() != validation.targets.size())
        throw InputError("validation summaries and targets differ in length");

    const bool has_validation = validation.size() > 0;
    const auto n = train_set.size();
    const auto count = parameter_count(dm);
    auto params = parameters(dm);
    std::vector<double> m(count, 0.0);
    std::vector<double> v(count, 0.0);
    std::vector<double> grad(count, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result{dm, {}};
    auto& record = result.record;
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;

    auto log_epoch = [&](int epoch) {
        const double train_risk = monitored_risk(dm, train_set, loss);
        const double objective = map_objective(dm, train_set.summaries, train_set.targets, prior, loss, config.lambda);
        const double val_risk = has_validation ? monitored_risk(dm, validation, loss) : train_risk;
        if (!std::isfinite(train_risk) || !std::isfinite(objective) || !std::isfinite(val_risk))
            throw TrainingError("non-finite objective", epoch);
        record.train_risk.push_back(train_risk);
        record.val_risk.push_back(val_risk);
        record.objective.push_back(objective);
        if (val_risk < best && objective <= record.objective.front()) {
            best = val_risk;
            since_best = 0;
            record.best_epoch = static_cast<std::size_t>(epoch);
            result.dm = dm;
        } else {
            ++since_best;
        }
    };

    log_epoch(0);
    std::uint64_t step = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng rng(derive_seed(config.seed, 0x7261696eULL, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);

        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const auto stop = std::min(n, start + config.batch_size);
            const auto batch = static_cast<double>(stop - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t k = start; k < stop; ++k) {
                const auto i = order[k];
                const auto& summary = train_set.summaries[i];
                const double h = dm_forward(dm, summary);
                double upstream = loss_subgradient(loss, h, train_set.targets[i]);
                if (config.lambda != 0.0)
                    upstream += config.lambda * (h - prior.mu[i]) / (prior.sigma[i] * prior.sigma[i]);
                if (upstream != 0.0) dm_forward_backward(dm, summary, upstream / batch, grad);
            }

            ++step;
            const double c1 = 1.0 - std::pow(config.moment_decay_1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(config.moment_decay_2, static_cast<double>(step));
            for (std::size_t p = 0; p < count; ++p) {
                m[p] = config.moment_decay_1 * m[p] + (1.0 - config.moment_decay_1) * grad[p];
                v[p] = config.moment_decay_2 * v[p] + (1.0 - config.moment_decay_2) * grad[p] * grad[p];
                params[p] -= config.learning_rate * (m[p] / c1) / (std::sqrt(v[p] / c2) + config.epsilon);
                if (!std::isfinite(params[p])) throw TrainingError("non-finite parameter update", epoch);
            }
            set_parameters(dm, params);
        }

        log_epoch(epoch);
        if (since_best > 0 && since_best >= config.patience) break;
    }
    return result;
}

LambdaSelection cross_validate_lambda(std::span<const double> lambda_grid, std::size_t folds, const DecisionMaker& dm,
                                      const LabeledSummaries& data, const DecisionPrior& prior, const Loss& loss,
                                      const TrainConfig& config)
{
    if (lambda_grid.empty()) throw InputError("lambda grid is empty");
    if (folds < 2) throw InputError("cross-validation needs at least two folds");
    if (data.size() < folds) throw InputError("fewer points than folds");
    check_aligned(data.summaries, data.targets, prior);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(config.seed, 0x6376ULL));
    std::shuffle(order.begin(), order.end(), rng);

    LambdaSelection out;
    double best = std::numeric_limits<double>::infinity();
    for (double lambda : lambda_grid) {
        auto fold_config = config;
        fold_config.lambda = lambda;
        double sum = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<std::size_t> fit_idx;
            std::vector<std::size_t> held_idx;
            for (std::size_t k = 0; k < order.size(); ++k) (k % folds == f ? held_idx : fit_idx).push_back(order[k]);
            const auto fitted = train(dm, pick(data, fit_idx), LabeledSummaries{}, pick(prior, fit_idx), loss, fold_config);
            sum += monitored_risk(fitted.dm, pick(data, held_idx), loss);
        }
        const double mean = sum / static_cast<double>(folds);
        out.mean_validation_risk.push_back(mean);
        if (mean < best || (mean == best && lambda >= out.best_lambda)) {
            best = mean;
            out.best_lambda = lambda;
        }
    }
    return out;
}

std::string training_record_csv(const TrainingRecord& record)
{
    std::ostringstream out;
    out << "epoch,train_risk,val_risk,objective\n";
    for (std::size_t e = 0; e < record.size(); ++e)
        out << e << ',' << io::format_double(record.train_risk[e]) << ',' << io::format_double(record.val_risk[e]) << ','
            << io::format_double(record.objective[e]) << '\n';
    return out.str();
}

} // namespace decal
