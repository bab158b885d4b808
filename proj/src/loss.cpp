#include "decal/loss.hpp"

#include "decal/error.hpp"

#include <cmath>
#include <sstream>

namespace decal {

namespace {

template <class... Ts> struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double h, double y)
{
    if (!std::isfinite(h) || !std::isfinite(y)) throw InputError("loss evaluated at non-finite argument");
}

// Weights applied below / above the decision; squared loss is handled separately.
struct Slopes {
    double under; // y >= h
    double over;  // y < h
};

Slopes slopes(const Loss& loss)
{
    validate(loss);
    return std::visit(overloaded{
                          [](const losses::Squared&) { return Slopes{0.0, 0.0}; },
                          [](const losses::Absolute&) { return Slopes{1.0, 1.0}; },
                          [](const losses::ImbalancedAbsolute& l) { return Slopes{l.a, l.b}; },
                          [](const losses::Tilted& l) { return Slopes{l.t, 1.0 - l.t}; },
                      },
                      loss);
}

} // namespace

void validate(const Loss& loss)
{
    std::visit(overloaded{
                   [](const losses::Squared&) {},
                   [](const losses::Absolute&) {},
                   [](const losses::ImbalancedAbsolute& l) {
                       if (!(l.a > 0.0) || !(l.b > 0.0) || !std::isfinite(l.a) || !std::isfinite(l.b))
                           throw InputError("imbalanced_absolute requires a > 0 and b > 0");
                   },
                   [](const losses::Tilted& l) {
                       if (!(l.t > 0.0 && l.t < 1.0)) throw InputError("tilted requires 0 < t < 1");
                   },
               },
               loss);
}

double eval_loss(const Loss& loss, double h, double y)
{
    require_finite(h, y);
    if (std::holds_alternative<losses::Squared>(loss)) return (h - y) * (h - y);
    const auto s = slopes(loss);
    return y >= h ? s.under * (y - h) : s.over * (h - y);
}

double loss_subgradient(const Loss& loss, double h, double y)
{
    require_finite(h, y);
    if (std::holds_alternative<losses::Squared>(loss)) return 2.0 * (h - y);
    if (y == h) return 0.0;
    const auto s = slopes(loss);
    return y > h ? -s.under : s.over;
}

DecisionRule analytic_rule(const Loss& loss)
{
    validate(loss);
    return std::visit(overloaded{
                          [](const losses::Squared&) -> DecisionRule { return rules::Mean{}; },
                          [](const losses::Absolute&) -> DecisionRule { return rules::Quantile{0.5}; },
                          [](const losses::ImbalancedAbsolute& l) -> DecisionRule {
                              return rules::Quantile{l.a / (l.a + l.b)};
                          },
                          [](const losses::Tilted& l) -> DecisionRule { return rules::Quantile{l.t}; },
                      },
                      loss);
}

std::string loss_name(const Loss& loss)
{
    return std::visit(overloaded{
                          [](const losses::Squared&) { return std::string("squared"); },
                          [](const losses::Absolute&) { return std::string("absolute"); },
                          [](const losses::ImbalancedAbsolute&) { return std::string("imbalanced_absolute"); },
                          [](const losses::Tilted&) { return std::string("tilted"); },
                      },
                      loss);
}

std::string describe(const Loss& loss)
{
    std::ostringstream out;
    out << loss_name(loss);
    if (const auto* l = std::get_if<losses::ImbalancedAbsolute>(&loss)) out << "(a=" << l->a << ";b=" << l->b << ")";
    if (const auto* l = std::get_if<losses::Tilted>(&loss)) out << "(t=" << l->t << ")";
    return out.str();
}

Loss loss_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("loss") || !j.at("loss").is_string())
        throw InputError("loss config must be an object with a string field \"loss\"");
    const auto name = j.at("loss").get<std::string>();

    auto number = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number())
            throw InputError("loss \"" + name + "\" requires numeric field \"" + key + "\"");
        return j.at(key).get<double>();
    };
    auto only = [&](std::initializer_list<const char*> allowed) {
        for (const auto& item : j.items()) {
            bool ok = false;
            for (const char* a : allowed) ok = ok || item.key() == a;
            if (!ok) throw InputError("unknown field \"" + item.key() + "\" for loss \"" + name + "\"");
        }
    };

    Loss loss;
    if (name == "squared") {
        only({"loss"});
        loss = losses::Squared{};
    } else if (name == "absolute") {
        only({"loss"});
        loss = losses::Absolute{};
    } else if (name == "imbalanced_absolute") {
        only({"loss", "a", "b"});
        loss = losses::ImbalancedAbsolute{number("a"), number("b")};
    } else if (name == "tilted") {
        only({"loss", "t"});
        loss = losses::Tilted{number("t")};
    } else {
        throw InputError("unknown loss \"" + name + "\"");
    }
    validate(loss);
    return loss;
}

nlohmann::json loss_to_json(const Loss& loss)
{
    nlohmann::json j{{"loss", loss_name(loss)}};
    if (const auto* l = std::get_if<losses::ImbalancedAbsolute>(&loss)) {
        j["a"] = l->a;
        j["b"] = l->b;
    }
    if (const auto* l = std::get_if<losses::Tilted>(&loss)) j["t"] = l->t;
    return j;
}

} // namespace decal
