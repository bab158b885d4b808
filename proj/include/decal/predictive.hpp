#pragma once

#include "decal/loss.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace decal {

inline constexpr std::size_t kDefaultSampleCount = 1000;
inline constexpr std::size_t kDefaultQuantileCount = 20;

/// Draws y_s from the (approximate) predictive distribution at one data point.
struct PredictiveSamples {
    std::string point_id;
    std::vector<double> samples;
};

/// B empirical quantiles at the midpoint levels (b - 0.5) / B, b = 1..B.
struct QuantileSummary {
    std::vector<double> levels;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
};

/// Midpoint quantile levels (b - 0.5) / B.
std::vector<double> midpoint_levels(std::size_t count);

/// Linear-interpolation quantile: position level * (S - 1) into the sorted samples.
double empirical_quantile(std::span<const double> samples, double level);

/// Same as empirical_quantile but skips sorting; `sorted` must be ascending.
double sorted_quantile(std::span<const double> sorted, double level);

QuantileSummary summarize(std::span<const double> samples, std::size_t count);
QuantileSummary summarize(const PredictiveSamples& samples, std::size_t count);

/// Applies the loss's analytic rule to the empirical distribution of the samples.
double q_optimal_decision(std::span<const double> samples, const Loss& loss);
double q_optimal_decision(const PredictiveSamples& samples, const Loss& loss);

} // namespace decal
