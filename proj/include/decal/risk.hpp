#pragma once

#include "decal/loss.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace decal {

/// Mean (not summed) empirical risk with its Gaussian standard error.
struct RiskReport {
    double empirical_risk = 0.0;
    std::size_t n_points = 0;
    std::optional<std::vector<double>> per_point_losses;
    double standard_error = 0.0;
};

RiskReport empirical_risk(std::span<const double> decisions, std::span<const double> targets, const Loss& loss,
                          bool keep_per_point = false);

/// Relative risk reduction against a baseline; positive means better than the baseline.
double improvement(double er_baseline, double er);

/// Brute-force minimizer of the Monte-Carlo risk over the grid lo, lo + step, ..., hi.
/// Ties go to the smaller decision.
double grid_search_decision(std::span<const double> samples, const Loss& loss, double lo, double hi, double step);

} // namespace decal
