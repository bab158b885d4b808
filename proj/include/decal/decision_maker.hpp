#pragma once

#include "decal/predictive.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace decal {

/// Dense layer with row-major weights of shape (outputs x inputs).
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;
    std::vector<double> bias;
};

/// Feed-forward network mapping a quantile summary to a scalar decision.
///
/// Hidden layers use the rectifier, the output layer is linear. Inputs are
/// standardized with a fixed affine map (center, scale) and the output is mapped
/// back with the same map, so the network operates on unit-scale values while
/// decisions stay in the units of the target. The affine map is not trained.
struct MlpDecisionMaker {
    std::vector<DenseLayer> layers;
    double input_center = 0.0;
    double input_scale = 1.0;

    std::size_t input_width() const noexcept { return layers.empty() ? 0 : layers.front().inputs; }
};

/// Reads the summary at a single learned quantile level, logistic(raw_level).
struct QuantileShiftDM {
    double raw_level = 0.0;

    double level() const noexcept;
};

using DecisionMaker = std::variant<MlpDecisionMaker, QuantileShiftDM>;

enum class DmKind { mlp, quantile_shift };

struct DmSpec {
    DmKind kind = DmKind::mlp;
    std::size_t input_width = kDefaultQuantileCount;
    std::uint64_t seed = 0;
    std::optional<double> init_level;
    std::vector<std::size_t> hidden = {20, 20, 10};
};

DmKind dm_kind_from_string(const std::string& name);
std::string to_string(DmKind kind);

/// Gaussian weights with standard deviation sqrt(2 / fan_in), zero biases.
DecisionMaker dm_init(const DmSpec& spec);

double dm_forward(const DecisionMaker& dm, const QuantileSummary& summary);

/// Gradient of upstream * dm_forward with respect to the flat parameter vector.
std::vector<double> dm_backward(const DecisionMaker& dm, const QuantileSummary& summary, double upstream);

/// Evaluates the decision and accumulates weight * d(decision)/d(params) into `grad`.
double dm_forward_backward(const DecisionMaker& dm, const QuantileSummary& summary, double weight,
                           std::span<double> grad);

std::size_t parameter_count(const DecisionMaker& dm);
std::vector<double> parameters(const DecisionMaker& dm);
void set_parameters(DecisionMaker& dm, std::span<const double> params);

/// Chooses input_center / input_scale from the mean and spread of all summary values.
void fit_input_scaling(MlpDecisionMaker& dm, std::span<const QuantileSummary> summaries);

/// Architecture descriptor plus flat parameter vector.
nlohmann::json dm_to_json(const DecisionMaker& dm);
DecisionMaker dm_from_json(const nlohmann::json& j);

} // namespace decal
