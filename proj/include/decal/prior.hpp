#pragma once

#include "decal/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace decal {

inline constexpr double kSigmaFloor = 1e-6;
inline constexpr std::size_t kDefaultBootstrapReplicates = 5;

/// Independent Gaussian prior N(mu[n], sigma[n]^2) on the decision at each point.
struct DecisionPrior {
    std::vector<std::string> ids;
    std::vector<double> mu;
    std::vector<double> sigma;

    std::size_t size() const noexcept { return mu.size(); }
};

void validate(const DecisionPrior& prior);

/// mu = q-optimal decisions, sigma = 1.
DecisionPrior simple_prior(std::span<const double> q_decisions, std::vector<std::string> ids = {});

/// N draws with replacement; deterministic per seed.
Dataset resample(const Dataset& data, std::uint64_t seed);

/// Refits the approximation on a dataset and returns q-optimal decisions at the eval points.
using FitAndDecide = std::function<std::vector<double>(const Dataset& data, const Eigen::MatrixXd& eval_points)>;

/// A bootstrap replicate failed; index() is the 0-based replicate number.
class ReplicateError : public std::runtime_error {
public:
    ReplicateError(std::size_t index, const std::string& what)
        : std::runtime_error("bootstrap replicate " + std::to_string(index) + ": " + what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Mean and population standard deviation (floored at kSigmaFloor) of the
/// q-optimal decisions over `replicates` resampled refits. Replicate l uses
/// seed master_seed + l; replicates may run concurrently.
DecisionPrior bootstrap_prior(const Dataset& data, const FitAndDecide& fit_and_decide, const Eigen::MatrixXd& eval_points,
                              std::size_t replicates, std::uint64_t master_seed, std::vector<std::string> ids = {});

/// CSV with header point_id,mu,sigma.
void write_prior_csv(const DecisionPrior& prior, const std::filesystem::path& path);
DecisionPrior read_prior_csv(const std::filesystem::path& path);

} // namespace decal
