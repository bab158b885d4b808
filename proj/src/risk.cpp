#include "decal/risk.hpp"

#include "decal/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <variant>

namespace decal {

RiskReport empirical_risk(std::span<const double> decisions, std::span<const double> targets, const Loss& loss,
                          bool keep_per_point)
{
    if (decisions.size() != targets.size())
        throw InputError("decisions and targets differ in length");
    if (decisions.empty()) throw InputError("empirical risk needs at least one point");
    validate(loss);

    std::vector<double> per_point(decisions.size());
    for (std::size_t i = 0; i < decisions.size(); ++i) per_point[i] = eval_loss(loss, decisions[i], targets[i]);

    const auto n = static_cast<double>(per_point.size());
    const double mean = std::accumulate(per_point.begin(), per_point.end(), 0.0) / n;
    double ss = 0.0;
    for (double l : per_point) ss += (l - mean) * (l - mean);
    const double sd = per_point.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    RiskReport report;
    report.empirical_risk = mean;
    report.n_points = per_point.size();
    report.standard_error = sd / std::sqrt(n);
    if (keep_per_point) report.per_point_losses = std::move(per_point);
    return report;
}

double improvement(double er_baseline, double er)
{
    if (!(er_baseline > 0.0)) throw InputError("baseline risk must be positive");
    return (er_baseline - er) / er_baseline;
}

namespace {

// Mean loss over samples at decision h, from sorted samples and prefix sums in O(log S).
class SortedRisk {
public:
    SortedRisk(std::span<const double> samples, const Loss& loss) : sorted_(samples.begin(), samples.end()), loss_(loss)
    {
        std::sort(sorted_.begin(), sorted_.end());
        prefix_.resize(sorted_.size() + 1, 0.0);
        prefix_sq_.resize(sorted_.size() + 1, 0.0);
        for (std::size_t i = 0; i < sorted_.size(); ++i) {
            prefix_[i + 1] = prefix_[i] + sorted_[i];
            prefix_sq_[i + 1] = prefix_sq_[i] + sorted_[i] * sorted_[i];
        }
    }

    double operator()(double h) const
    {
        const auto n = static_cast<double>(sorted_.size());
        if (std::holds_alternative<losses::Squared>(loss_))
            return (prefix_sq_.back() - 2.0 * h * prefix_.back() + n * h * h) / n;

        // below: y < h, above: y >= h
        const auto split = static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), h) - sorted_.begin());
        const double count_below = static_cast<double>(split);
        const double sum_below = prefix_[split];
        const double sum_above = prefix_.back() - sum_below;
        const double count_above = n - count_below;
        const double over = count_below * h - sum_below;   // sum of (h - y) for y < h
        const double under = sum_above - count_above * h;  // sum of (y - h) for y >= h
        double a = 1.0;
        double b = 1.0;
        if (const auto* l = std::get_if<losses::ImbalancedAbsolute>(&loss_)) {
            a = l->a;
            b = l->b;
        } else if (const auto* l = std::get_if<losses::Tilted>(&loss_)) {
            a = l->t;
            b = 1.0 - l->t;
        }
        return (a * under + b * over) / n;
    }

private:
    std::vector<double> sorted_;
    std::vector<double> prefix_;
    std::vector<double> prefix_sq_;
    Loss loss_;
};

} // namespace

double grid_search_decision(std::span<const double> samples, const Loss& loss, double lo, double hi, double step)
{
    if (!(lo < hi)) throw InputError("grid requires lo < hi");
    if (!(step > 0.0)) throw InputError("grid step must be positive");
    if (samples.empty()) throw InputError("empty sample list");
    validate(loss);

    const SortedRisk risk(samples, loss);
    const auto cells = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    double best_h = lo;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= cells; ++k) {
        const double h = lo + static_cast<double>(k) * step;
        const double r = risk(h);
        if (r < best) {
            best = r;
            best_h = h;
        }
    }
    return best_h;
}

} // namespace decal
