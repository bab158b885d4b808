#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <variant>

namespace decal {

/// Decision losses l(y, h) with h the decision and y the realized target.
namespace losses {

struct Squared {};
struct Absolute {};

/// a per unit of underestimation (y >= h), b per unit of overestimation (y < h).
struct ImbalancedAbsolute {
    double a = 1.0;
    double b = 1.0;
};

/// Pinball loss: weight t when y >= h and (1 - t) when y < h.
struct Tilted {
    double t = 0.5;
};

} // namespace losses

using Loss = std::variant<losses::Squared, losses::Absolute, losses::ImbalancedAbsolute, losses::Tilted>;

namespace rules {
struct Mean {};
struct Quantile {
    double level = 0.5;
};
} // namespace rules

/// Statistic of the predictive distribution that minimizes expected loss.
using DecisionRule = std::variant<rules::Mean, rules::Quantile>;

/// Throws InputError when the loss parameters are outside their domain.
void validate(const Loss& loss);

double eval_loss(const Loss& loss, double h, double y);

/// Element of the subdifferential of l(y, .) at h. Kinks return 0.
double loss_subgradient(const Loss& loss, double h, double y);

DecisionRule analytic_rule(const Loss& loss);

/// Short lowercase name: squared, absolute, imbalanced_absolute, tilted.
std::string loss_name(const Loss& loss);

/// Human-readable label including parameters, e.g. "tilted(t=0.9)".
std::string describe(const Loss& loss);

/// Config form: {"loss": "tilted", "t": 0.9}. Unknown keys are rejected.
Loss loss_from_json(const nlohmann::json& j);
nlohmann::json loss_to_json(const Loss& loss);

} // namespace decal
