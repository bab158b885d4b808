#include "decal/decision_maker.hpp"

#include "decal/error.hpp"
#include "decal/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace decal {

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

double logistic(double x)
{
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

void check_width(const MlpDecisionMaker& dm, const QuantileSummary& summary)
{
    if (summary.size() != dm.input_width())
        throw InputError("summary width " + std::to_string(summary.size()) + " does not match decision maker input width " +
                         std::to_string(dm.input_width()));
}

void check_summary(const QuantileSummary& summary)
{
    if (summary.values.empty() || summary.levels.size() != summary.values.size())
        throw InputError("malformed quantile summary");
}

// Pre-activations of every layer for one input.
struct Trace {
    std::vector<std::vector<double>> inputs; // input to layer k (post-activation of k-1)
    std::vector<std::vector<double>> pre;    // pre-activation of layer k
};

double mlp_forward(const MlpDecisionMaker& dm, const QuantileSummary& summary, Trace* trace)
{
    check_width(dm, summary);
    std::vector<double> act(summary.values.size());
    for (std::size_t i = 0; i < act.size(); ++i) act[i] = (summary.values[i] - dm.input_center) / dm.input_scale;

    for (std::size_t k = 0; k < dm.layers.size(); ++k) {
        const auto& layer = dm.layers[k];
        std::vector<double> z(layer.bias);
        for (std::size_t r = 0; r < layer.outputs; ++r) {
            const double* w = layer.weights.data() + r * layer.inputs;
            double sum = 0.0;
            for (std::size_t c = 0; c < layer.inputs; ++c) sum += w[c] * act[c];
            z[r] += sum;
        }
        const bool hidden = k + 1 < dm.layers.size();
        if (trace) {
            trace->inputs.push_back(std::move(act));
            trace->pre.push_back(z);
        }
        act = std::move(z);
        if (hidden)
            for (double& a : act) a = std::max(a, 0.0);
    }
    return dm.input_center + dm.input_scale * act.front();
}

double mlp_backward(const MlpDecisionMaker& dm, const QuantileSummary& summary, double weight, std::span<double> grad)
{
    Trace trace;
    const double out = mlp_forward(dm, summary, &trace);
    if (weight == 0.0) return out;

    // Offsets of each layer's block in the flat vector.
    std::vector<std::size_t> offsets(dm.layers.size());
    std::size_t offset = 0;
    for (std::size_t k = 0; k < dm.layers.size(); ++k) {
        offsets[k] = offset;
        offset += dm.layers[k].weights.size() + dm.layers[k].bias.size();
    }

    std::vector<double> delta{weight * dm.input_scale};
    for (std::size_t k = dm.layers.size(); k-- > 0;) {
        const auto& layer = dm.layers[k];
        const auto& in = trace.inputs[k];
        double* gw = grad.data() + offsets[k];
        double* gb = gw + layer.weights.size();
        for (std::size_t r = 0; r < layer.outputs; ++r) {
            const double d = delta[r];
            if (d == 0.0) continue;
            gb[r] += d;
            double* row = gw + r * layer.inputs;
            for (std::size_t c = 0; c < layer.inputs; ++c) row[c] += d * in[c];
        }
        if (k == 0) break;
        std::vector<double> next(layer.inputs, 0.0);
        for (std::size_t r = 0; r < layer.outputs; ++r) {
            const double d = delta[r];
            if (d == 0.0) continue;
            const double* w = layer.weights.data() + r * layer.inputs;
            for (std::size_t c = 0; c < layer.inputs; ++c) next[c] += d * w[c];
        }
        const auto& pre = trace.pre[k - 1];
        for (std::size_t c = 0; c < next.size(); ++c)
            if (!(pre[c] > 0.0)) next[c] = 0.0;
        delta = std::move(next);
    }
    return out;
}

// Bracketing segment of `level` among the summary levels; clamped when outside.
struct Segment {
    std::size_t lo = 0;
    double weight = 0.0; // interpolation weight toward lo + 1
    bool clamped = true;
};

Segment locate(const QuantileSummary& summary, double level)
{
    const auto& levels = summary.levels;
    if (level <= levels.front()) return {0, 0.0, true};
    if (level >= levels.back()) return {levels.size() - 1, 0.0, true};
    const auto it = std::upper_bound(levels.begin(), levels.end(), level);
    const auto lo = static_cast<std::size_t>(it - levels.begin()) - 1;
    return {lo, (level - levels[lo]) / (levels[lo + 1] - levels[lo]), false};
}

double shift_forward(const QuantileShiftDM& dm, const QuantileSummary& summary)
{
    check_summary(summary);
    const auto seg = locate(summary, dm.level());
    if (seg.clamped) return summary.values[seg.lo];
    const double lo = summary.values[seg.lo];
    return lo + seg.weight * (summary.values[seg.lo + 1] - lo);
}

double shift_backward(const QuantileShiftDM& dm, const QuantileSummary& summary, double weight, std::span<double> grad)
{
    check_summary(summary);
    const double level = dm.level();
    const auto seg = locate(summary, level);
    if (seg.clamped) return summary.values[seg.lo];
    const auto& v = summary.values;
    const auto& l = summary.levels;
    const double slope = (v[seg.lo + 1] - v[seg.lo]) / (l[seg.lo + 1] - l[seg.lo]);
    grad[0] += weight * slope * level * (1.0 - level);
    return v[seg.lo] + seg.weight * (v[seg.lo + 1] - v[seg.lo]);
}

DecisionMaker init_mlp(const DmSpec& spec)
{
    Rng rng(spec.seed);
    MlpDecisionMaker dm;
    std::vector<std::size_t> widths{spec.input_width};
    widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
    widths.push_back(1);
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        if (widths[k] == 0 || widths[k + 1] == 0) throw InputError("layer widths must be positive");
        DenseLayer layer;
        layer.inputs = widths[k];
        layer.outputs = widths[k + 1];
        layer.weights.resize(layer.inputs * layer.outputs);
        layer.bias.assign(layer.outputs, 0.0);
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(layer.inputs)));
        for (double& w : layer.weights) w = normal(rng);
        dm.layers.push_back(std::move(layer));
    }
    return dm;
}

} // namespace

double QuantileShiftDM::level() const noexcept { return logistic(raw_level); }

DmKind dm_kind_from_string(const std::string& name)
{
    if (name == "mlp") return DmKind::mlp;
    if (name == "quantile_shift") return DmKind::quantile_shift;
    throw InputError("unknown decision maker kind \"" + name + "\"");
}

std::string to_string(DmKind kind) { return kind == DmKind::mlp ? "mlp" : "quantile_shift"; }

DecisionMaker dm_init(const DmSpec& spec)
{
    if (spec.input_width == 0) throw InputError("decision maker input width must be positive");
    if (spec.kind == DmKind::quantile_shift) {
        const double level = spec.init_level.value_or(0.5);
        if (!(level > 0.0 && level < 1.0)) throw InputError("init_level must lie in (0, 1)");
        return QuantileShiftDM{logit(level)};
    }
    return init_mlp(spec);
}

double dm_forward(const DecisionMaker& dm, const QuantileSummary& summary)
{
    return std::visit(overloaded{
                          [&](const MlpDecisionMaker& m) { return mlp_forward(m, summary, nullptr); },
                          [&](const QuantileShiftDM& q) { return shift_forward(q, summary); },
                      },
                      dm);
}

double dm_forward_backward(const DecisionMaker& dm, const QuantileSummary& summary, double weight,
                           std::span<double> grad)
{
    if (grad.size() != parameter_count(dm)) throw InputError("gradient buffer has the wrong size");
    return std::visit(overloaded{
                          [&](const MlpDecisionMaker& m) { return mlp_backward(m, summary, weight, grad); },
                          [&](const QuantileShiftDM& q) { return shift_backward(q, summary, weight, grad); },
                      },
                      dm);
}

std::vector<double> dm_backward(const DecisionMaker& dm, const QuantileSummary& summary, double upstream)
{
    std::vector<double> grad(parameter_count(dm), 0.0);
    dm_forward_backward(dm, summary, upstream, grad);
    return grad;
}

std::size_t parameter_count(const DecisionMaker& dm)
{
    return std::visit(overloaded{
                          [](const MlpDecisionMaker& m) {
                              std::size_t n = 0;
                              for (const auto& l : m.layers) n += l.weights.size() + l.bias.size();
                              return n;
                          },
                          [](const QuantileShiftDM&) { return std::size_t{1}; },
                      },
                      dm);
}

std::vector<double> parameters(const DecisionMaker& dm)
{
    std::vector<double> out;
    out.reserve(parameter_count(dm));
    std::visit(overloaded{
                   [&](const MlpDecisionMaker& m) {
                       for (const auto& l : m.layers) {
                           out.insert(out.end(), l.weights.begin(), l.weights.end());
                           out.insert(out.end(), l.bias.begin(), l.bias.end());
                       }
                   },
                   [&](const QuantileShiftDM& q) { out.push_back(q.raw_level); },
               },
               dm);
    return out;
}

void set_parameters(DecisionMaker& dm, std::span<const double> params)
{
    if (params.size() != parameter_count(dm)) throw InputError("parameter vector has the wrong size");
    for (double p : params)
        if (!std::isfinite(p)) throw InputError("non-finite decision maker parameter");
    std::visit(overloaded{
                   [&](MlpDecisionMaker& m) {
                       auto it = params.begin();
                       for (auto& l : m.layers) {
                           std::copy_n(it, l.weights.size(), l.weights.begin());
                           it += static_cast<std::ptrdiff_t>(l.weights.size());
                           std::copy_n(it, l.bias.size(), l.bias.begin());
                           it += static_cast<std::ptrdiff_t>(l.bias.size());
                       }
                   },
                   [&](QuantileShiftDM& q) { q.raw_level = params[0]; },
               },
               dm);
}

void fit_input_scaling(MlpDecisionMaker& dm, std::span<const QuantileSummary> summaries)
{
    double sum = 0.0;
    double sq = 0.0;
    std::size_t n = 0;
    for (const auto& s : summaries)
        for (double v : s.values) {
            sum += v;
            sq += v * v;
            ++n;
        }
    if (n == 0) return;
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(sq / static_cast<double>(n) - mean * mean, 0.0);
    dm.input_center = mean;
    dm.input_scale = var > 0.0 ? std::sqrt(var) : 1.0;
}

nlohmann::json dm_to_json(const DecisionMaker& dm)
{
    nlohmann::json j;
    std::visit(overloaded{
                   [&](const MlpDecisionMaker& m) {
                       std::vector<std::size_t> widths{m.input_width()};
                       for (const auto& l : m.layers) widths.push_back(l.outputs);
                       j["kind"] = "mlp";
                       j["widths"] = widths;
                       j["activation"] = "relu";
                       j["input_center"] = m.input_center;
                       j["input_scale"] = m.input_scale;
                   },
                   [&](const QuantileShiftDM&) { j["kind"] = "quantile_shift"; },
               },
               dm);
    j["parameters"] = parameters(dm);
    return j;
}

DecisionMaker dm_from_json(const nlohmann::json& j)
{
    try {
        const auto kind = dm_kind_from_string(j.at("kind").get<std::string>());
        const auto params = j.at("parameters").get<std::vector<double>>();
        DecisionMaker dm;
        if (kind == DmKind::quantile_shift) {
            dm = QuantileShiftDM{};
        } else {
            const auto widths = j.at("widths").get<std::vector<std::size_t>>();
            if (widths.size() < 2 || widths.back() != 1) throw InputError("mlp widths must end in 1");
            DmSpec spec;
            spec.input_width = widths.front();
            spec.hidden.assign(widths.begin() + 1, widths.end() - 1);
            auto mlp = std::get<MlpDecisionMaker>(init_mlp(spec));
            mlp.input_center = j.at("input_center").get<double>();
            mlp.input_scale = j.at("input_scale").get<double>();
            if (!(mlp.input_scale > 0.0)) throw InputError("input_scale must be positive");
            dm = std::move(mlp);
        }
        set_parameters(dm, params);
        return dm;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed decision maker document: ") + e.what());
    }
}

} // namespace decal
