#include "decal/predictive.hpp"

#include "decal/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <variant>

namespace decal {

namespace {

void require_samples(std::span<const double> samples)
{
    if (samples.empty()) throw InputError("empty sample list");
    for (double s : samples)
        if (!std::isfinite(s)) throw InputError("non-finite predictive sample");
}

void require_level(double level)
{
    if (!(level > 0.0 && level < 1.0)) throw InputError("quantile level must lie in (0, 1)");
}

std::vector<double> sorted_copy(std::span<const double> samples)
{
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted;
}

} // namespace

std::vector<double> midpoint_levels(std::size_t count)
{
    std::vector<double> levels(count);
    for (std::size_t b = 0; b < count; ++b)
        levels[b] = (static_cast<double>(b) + 0.5) / static_cast<double>(count);
    return levels;
}

double sorted_quantile(std::span<const double> sorted, double level)
{
    if (sorted.empty()) throw InputError("empty sample list");
    require_level(level);
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double empirical_quantile(std::span<const double> samples, double level)
{
    require_samples(samples);
    require_level(level);
    return sorted_quantile(sorted_copy(samples), level);
}

QuantileSummary summarize(std::span<const double> samples, std::size_t count)
{
    if (count == 0) throw InputError("quantile count B must be positive");
    require_samples(samples);
    if (samples.size() < 2) throw InputError("at least two predictive samples are required");

    const auto sorted = sorted_copy(samples);
    QuantileSummary summary;
    summary.levels = midpoint_levels(count);
    summary.values.reserve(count);
    for (double level : summary.levels) summary.values.push_back(sorted_quantile(sorted, level));
    return summary;
}

QuantileSummary summarize(const PredictiveSamples& samples, std::size_t count)
{
    return summarize(std::span<const double>(samples.samples), count);
}

double q_optimal_decision(std::span<const double> samples, const Loss& loss)
{
    require_samples(samples);
    if (samples.size() < 2) throw InputError("at least two predictive samples are required");
    const auto rule = analytic_rule(loss);
    if (const auto* q = std::get_if<rules::Quantile>(&rule)) return empirical_quantile(samples, q->level);
    return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

double q_optimal_decision(const PredictiveSamples& samples, const Loss& loss)
{
    return q_optimal_decision(std::span<const double>(samples.samples), loss);
}

} // namespace decal
