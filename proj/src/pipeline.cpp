#include "decal/pipeline.hpp"

#include "decal/error.hpp"
#include "decal/io.hpp"
#include "decal/parallel.hpp"
#include "decal/random.hpp"
#include "decal/risk.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace decal {

namespace {

// Seed streams; every random quantity of a run derives from the master seed.
enum Stream : std::uint64_t {
    kFitData = 1,
    kSplitData = 2,
    kSplitTargets = 3,
    kPredictive = 4,
    kBootstrap = 5,
    kBootstrapPredictive = 6,
    kDmInit = 7,
    kTrain = 8,
};

// ---------------------------------------------------------------------------
// Strict config reader
// ---------------------------------------------------------------------------

class Section {
public:
    Section(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        for (const auto& item : j_.items()) {
            bool ok = false;
            for (const char* k : keys) ok = ok || item.key() == k;
            if (!ok) throw ConfigError(join(item.key()), "unknown key");
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    Section sub(const char* key) const { return Section(j_.at(key), join(key)); }

    const nlohmann::json& raw(const char* key) const { return j_.at(key); }

    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const char* key, double fallback) const
    {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_number()) throw ConfigError(join(key), "expected a number");
        return j_.at(key).get<double>();
    }

    double positive(const char* key, double fallback) const
    {
        const double v = number(key, fallback);
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(join(key), "must be a positive number");
        return v;
    }

    std::uint64_t count(const char* key, std::uint64_t fallback, std::uint64_t min = 0) const
    {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
            throw ConfigError(join(key), "expected a non-negative integer");
        const auto n = v.get<std::uint64_t>();
        if (n < min) throw ConfigError(join(key), "must be at least " + std::to_string(min));
        return n;
    }

    std::string string(const char* key, const std::string& fallback) const
    {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_string()) throw ConfigError(join(key), "expected a string");
        return j_.at(key).get<std::string>();
    }

    template <class E, class F> E choice(const char* key, E fallback, F&& convert) const
    {
        if (!has(key)) return fallback;
        const auto s = string(key, "");
        try {
            return convert(s);
        } catch (const InputError& e) {
            throw ConfigError(join(key), e.what());
        }
    }

private:
    const nlohmann::json& j_;
    std::string path_;
};

DataSource data_source_from_string(const std::string& s)
{
    if (s == "generator") return DataSource::generator;
    if (s == "ingest") return DataSource::ingest;
    throw InputError("expected \"generator\" or \"ingest\"");
}

TargetMode target_mode_from_string(const std::string& s)
{
    if (s == "generator") return TargetMode::generator;
    if (s == "posterior_predictive") return TargetMode::posterior_predictive;
    throw InputError("expected \"generator\" or \"posterior_predictive\"");
}

PriorKind prior_kind_from_string(const std::string& s)
{
    if (s == "none") return PriorKind::none;
    if (s == "simple") return PriorKind::simple;
    if (s == "bootstrap") return PriorKind::bootstrap;
    throw InputError("expected \"none\", \"simple\" or \"bootstrap\"");
}

std::vector<double> number_list(const Section& s, const char* key)
{
    const auto& v = s.raw(key);
    std::vector<double> out;
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(s.join(key), "expected a number or an array of numbers");
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(s.join(key), "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

void parse_data(const Section& s, ExperimentConfig& c)
{
    s.allow({"source", "generator", "n_fit", "n_train", "n_val", "n_test", "beta", "noise_std", "targets",
             "samples_path", "targets_path"});
    auto& d = c.data;
    d.source = s.choice("source", d.source, data_source_from_string);
    d.generator = s.choice("generator", d.generator, synthetic_kind_from_string);
    d.n_fit = s.count("n_fit", d.n_fit);
    d.n_train = s.count("n_train", d.n_train, 1);
    d.n_val = s.count("n_val", d.n_val);
    d.n_test = s.count("n_test", d.n_test);
    if (s.has("beta")) d.beta = number_list(s, "beta");
    d.noise_std = s.positive("noise_std", d.noise_std);
    d.targets = s.choice("targets", d.targets, target_mode_from_string);
    d.samples_path = s.string("samples_path", "");
    d.targets_path = s.string("targets_path", "");

    if (d.source == DataSource::ingest) {
        if (d.samples_path.empty()) throw ConfigError(s.join("samples_path"), "required when source is ingest");
        if (d.targets_path.empty()) throw ConfigError(s.join("targets_path"), "required when source is ingest");
    }
    if (d.source == DataSource::generator && d.targets == TargetMode::posterior_predictive && d.n_fit == 0)
        throw ConfigError(s.join("targets"), "posterior_predictive targets need a separate fit set (n_fit > 0)");
}

void parse_model(const Section& s, ExperimentConfig& c)
{
    s.allow({"prior_std", "noise_std", "dim"});
    c.model.prior_std = s.positive("prior_std", c.model.prior_std);
    c.model.noise_std = s.positive("noise_std", c.model.noise_std);
    c.model.dim = s.count("dim", c.model.dim, 1);
}

void parse_approx(const Section& s, ExperimentConfig& c)
{
    s.allow({"variance_scale", "mean_shift", "blend"});
    c.approx.variance_scale = s.positive("variance_scale", c.approx.variance_scale);
    if (s.has("mean_shift")) c.approx.mean_shift = number_list(s, "mean_shift");
    c.approx.blend = s.number("blend", c.approx.blend);
    if (!(c.approx.blend >= 0.0 && c.approx.blend <= 1.0)) throw ConfigError(s.join("blend"), "must lie in [0, 1]");
}

void parse_representation(const Section& s, ExperimentConfig& c)
{
    s.allow({"samples", "quantiles"});
    c.samples = s.count("samples", c.samples, 2);
    c.quantiles = s.count("quantiles", c.quantiles, 1);
}

void parse_dm(const Section& s, ExperimentConfig& c)
{
    s.allow({"kind", "hidden", "init_level", "seed"});
    c.dm.kind = s.choice("kind", c.dm.kind, dm_kind_from_string);
    if (s.has("hidden")) {
        const auto& h = s.raw("hidden");
        if (!h.is_array()) throw ConfigError(s.join("hidden"), "expected an array of positive integers");
        c.dm.hidden.clear();
        for (const auto& w : h) {
            if (!w.is_number_integer() || w.get<long long>() <= 0)
                throw ConfigError(s.join("hidden"), "expected an array of positive integers");
            c.dm.hidden.push_back(w.get<std::size_t>());
        }
    }
    if (s.has("init_level")) {
        const double level = s.number("init_level", 0.5);
        if (!(level > 0.0 && level < 1.0)) throw ConfigError(s.join("init_level"), "must lie in (0, 1)");
        c.dm.init_level = level;
    }
    if (s.has("seed")) c.dm.seed = s.count("seed", 0);
}

void parse_prior(const Section& s, ExperimentConfig& c)
{
    s.allow({"kind", "replicates", "lambda", "path"});
    c.prior.kind = s.choice("kind", c.prior.kind, prior_kind_from_string);
    c.prior.replicates = s.count("replicates", c.prior.replicates, 1);
    c.prior.lambda = s.number("lambda", c.prior.lambda);
    if (!(c.prior.lambda >= 0.0) || !std::isfinite(c.prior.lambda))
        throw ConfigError(s.join("lambda"), "must be a finite non-negative number");
    if (s.has("path")) c.prior.path = s.string("path", "");
}

void parse_train(const Section& s, ExperimentConfig& c)
{
    s.allow({"learning_rate", "moment_decay_1", "moment_decay_2", "epsilon", "epochs", "batch_size", "seed", "patience"});
    auto& t = c.train;
    t.learning_rate = s.positive("learning_rate", t.learning_rate);
    t.moment_decay_1 = s.number("moment_decay_1", t.moment_decay_1);
    t.moment_decay_2 = s.number("moment_decay_2", t.moment_decay_2);
    t.epsilon = s.positive("epsilon", t.epsilon);
    t.epochs = static_cast<int>(s.count("epochs", static_cast<std::uint64_t>(t.epochs), 1));
    t.batch_size = s.count("batch_size", t.batch_size, 1);
    t.patience = static_cast<int>(s.count("patience", static_cast<std::uint64_t>(t.patience)));
    if (s.has("seed")) c.train_seed = s.count("seed", 0);
    for (const char* key : {"moment_decay_1", "moment_decay_2"}) {
        const double v = s.number(key, 0.0);
        if (!(v >= 0.0 && v < 1.0)) throw ConfigError(s.join(key), "must lie in [0, 1)");
    }
}

void parse_eval(const Section& s, ExperimentConfig& c)
{
    s.allow({"splits", "out_dir"});
    if (s.has("splits")) {
        const auto& v = s.raw("splits");
        if (!v.is_array() || v.empty()) throw ConfigError(s.join("splits"), "expected a non-empty array of split names");
        c.eval.splits.clear();
        for (const auto& e : v) {
            if (!e.is_string()) throw ConfigError(s.join("splits"), "expected split names");
            try {
                c.eval.splits.push_back(split_from_string(e.get<std::string>()));
            } catch (const InputError& err) {
                throw ConfigError(s.join("splits"), err.what());
            }
        }
    }
    c.eval.out_dir = s.string("out_dir", c.eval.out_dir.string());
}

// ---------------------------------------------------------------------------
// Pipeline helpers
// ---------------------------------------------------------------------------

template <class F> auto stage(const std::string& name, F&& body) -> decltype(body())
{
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

struct SplitData {
    Split split;
    std::vector<std::string> ids;
    Eigen::MatrixXd x;
    std::vector<std::optional<double>> y;
    std::vector<std::vector<double>> samples;
};

std::size_t split_index(Split s) { return static_cast<std::size_t>(s); }

std::size_t split_size(const DataConfig& d, Split s)
{
    switch (s) {
    case Split::train: return d.n_train;
    case Split::val: return d.n_val;
    case Split::test: return d.n_test;
    }
    return 0;
}

SyntheticParams synthetic_params(const DataConfig& d) { return {d.beta, d.noise_std}; }

struct Model {
    Dataset fit;
    GaussianPosterior exact;
    GaussianPosterior approx;
};

std::vector<double> q_decisions_at(const ExperimentConfig& c, const GaussianPosterior& approx,
                                   const Eigen::MatrixXd& points, std::uint64_t stream)
{
    std::vector<double> out(static_cast<std::size_t>(points.rows()));
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const auto s = predictive_samples(approx, c.model, points.row(i).transpose(), c.samples,
                                          derive_seed(c.seed, stream, static_cast<std::uint64_t>(i)));
        out[static_cast<std::size_t>(i)] = q_optimal_decision(s, c.loss);
    }
    return out;
}

FitAndDecide make_fitter(const ExperimentConfig& c)
{
    return [c](const Dataset& data, const Eigen::MatrixXd& points) {
        const auto approx = corrupt(exact_posterior(c.model, data.x, data.y), c.approx, c.model);
        return q_decisions_at(c, approx, points, kBootstrapPredictive);
    };
}

Dataset generate_split(const ExperimentConfig& c, Split s)
{
    auto prefix = to_string(s).substr(0, 2);
    return gen_synthetic(c.data.generator, split_size(c.data, s), c.model.dim,
                         derive_seed(c.seed, kSplitData, split_index(s)), synthetic_params(c.data), prefix);
}

void check_generator_dims(const ExperimentConfig& c)
{
    if (c.data.generator == SyntheticKind::nonlinear_heteroscedastic && c.model.dim != 1)
        throw ConfigError("model.dim", "nonlinear_heteroscedastic data has scalar covariates; set dim to 1");
    if (c.data.generator == SyntheticKind::linear && !c.data.beta.empty() && c.data.beta.size() != c.model.dim)
        throw ConfigError("data.beta", "length must equal model.dim");
}

Model fit_model(const ExperimentConfig& c, const Dataset& train_split)
{
    Model m;
    m.fit = c.data.n_fit > 0 ? gen_synthetic(c.data.generator, c.data.n_fit, c.model.dim, derive_seed(c.seed, kFitData),
                                             synthetic_params(c.data), "fit")
                             : train_split;
    m.exact = exact_posterior(c.model, m.fit.x, m.fit.y);
    m.approx = corrupt(m.exact, c.approx, c.model);
    return m;
}

std::vector<SplitData> generated_splits(const ExperimentConfig& c, std::optional<Model>& model)
{
    check_generator_dims(c);
    std::vector<SplitData> out;
    std::vector<Dataset> raw;
    stage("generate", [&] {
        for (Split s : {Split::train, Split::val, Split::test}) {
            if (split_size(c.data, s) == 0) {
                raw.emplace_back();
                continue;
            }
            raw.push_back(generate_split(c, s));
        }
        return 0;
    });
    model = stage("fit", [&] { return fit_model(c, raw[0]); });

    stage("generate", [&] {
        for (Split s : {Split::train, Split::val, Split::test}) {
            const auto& d = raw[split_index(s)];
            SplitData sd{s, d.ids, d.x, {}, {}};
            if (d.size() == 0) {
                out.push_back(std::move(sd));
                continue;
            }
            if (c.data.targets == TargetMode::generator) {
                for (double y : d.y) sd.y.emplace_back(y);
            } else {
                Rng rng(derive_seed(c.seed, kSplitTargets, split_index(s)));
                std::normal_distribution<double> normal(0.0, 1.0);
                for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
                    const auto mo = predictive_moments(model->exact, c.model, d.x.row(i).transpose());
                    sd.y.emplace_back(mo.mean + mo.sd * normal(rng));
                }
            }
            out.push_back(std::move(sd));
        }
        return 0;
    });

    stage("sample", [&] {
        for (auto& sd : out) {
            sd.samples.resize(sd.ids.size());
            parallel_for(sd.ids.size(), [&](std::size_t i) {
                sd.samples[i] = predictive_samples(model->approx, c.model,
                                                   sd.x.row(static_cast<Eigen::Index>(i)).transpose(), c.samples,
                                                   derive_seed(c.seed, kPredictive + 16 * split_index(sd.split), i))
                                    .samples;
            });
        }
        return 0;
    });
    return out;
}

std::vector<SplitData> ingested_splits(const ExperimentConfig& c)
{
    return stage("ingest", [&] {
        auto table = load_samples(c.data.samples_path);
        join_targets(table, load_targets(c.data.targets_path));
        std::vector<SplitData> out;
        for (Split s : {Split::train, Split::val, Split::test}) out.push_back(SplitData{s, {}, {}, {}, {}});
        for (auto& row : table.rows) {
            auto& sd = out[split_index(row.split)];
            sd.ids.push_back(row.point_id);
            sd.y.push_back(row.target);
            sd.samples.push_back(std::move(row.samples));
        }
        if (out[0].ids.empty()) throw ValidationError("ingested samples contain no train points");
        return out;
    });
}

DecisionPrior prior_for_training(const ExperimentConfig& c, const SplitResult& train_split, const std::optional<Model>& model)
{
    if (c.prior.path) {
        auto loaded = read_prior_csv(*c.prior.path);
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < loaded.size(); ++i) index.emplace(loaded.ids[i], i);
        DecisionPrior aligned;
        for (const auto& id : train_split.ids) {
            const auto it = index.find(id);
            if (it == index.end()) throw ValidationError("prior file has no entry for train point " + id);
            aligned.ids.push_back(id);
            aligned.mu.push_back(loaded.mu[it->second]);
            aligned.sigma.push_back(loaded.sigma[it->second]);
        }
        return aligned;
    }
    switch (c.prior.kind) {
    case PriorKind::none:
    case PriorKind::simple: return simple_prior(train_split.h_q, train_split.ids);
    case PriorKind::bootstrap:
        if (!model) throw ConfigError("prior.kind", "bootstrap prior refits the model and needs generator data");
        return bootstrap_prior(model->fit, make_fitter(c), train_split.x, c.prior.replicates,
                               derive_seed(c.seed, kBootstrap), train_split.ids);
    }
    return simple_prior(train_split.h_q, train_split.ids);
}

LabeledSummaries labeled(const SplitResult& s)
{
    LabeledSummaries out;
    for (std::size_t i = 0; i < s.ids.size(); ++i) {
        if (!s.y[i]) continue;
        out.summaries.push_back(s.summaries[i]);
        out.targets.push_back(*s.y[i]);
    }
    return out;
}

std::string csv_optional(const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); }

} // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const nlohmann::json& j)
{
    ExperimentConfig c;
    const Section root(j, "");
    root.allow({"seed", "data", "model", "approx", "representation", "loss", "decision_maker", "prior", "train", "eval"});
    c.seed = root.count("seed", c.seed);
    if (root.has("data")) parse_data(root.sub("data"), c);
    if (root.has("model")) parse_model(root.sub("model"), c);
    if (root.has("approx")) parse_approx(root.sub("approx"), c);
    if (root.has("representation")) parse_representation(root.sub("representation"), c);
    if (root.has("loss")) {
        try {
            c.loss = loss_from_json(j.at("loss"));
        } catch (const InputError& e) {
            throw ConfigError("loss", e.what());
        }
    }
    if (root.has("decision_maker")) parse_dm(root.sub("decision_maker"), c);
    if (root.has("prior")) parse_prior(root.sub("prior"), c);
    if (root.has("train")) parse_train(root.sub("train"), c);
    if (root.has("eval")) parse_eval(root.sub("eval"), c);
    if (!c.approx.mean_shift.empty() && c.approx.mean_shift.size() != 1 && c.approx.mean_shift.size() != c.model.dim)
        throw ConfigError("approx.mean_shift", "must be a scalar or have model.dim entries");
    if (c.data.source == DataSource::generator) check_generator_dims(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

bool SplitResult::has_targets() const
{
    return !y.empty() && std::all_of(y.begin(), y.end(), [](const auto& v) { return v.has_value(); });
}

std::vector<double> SplitResult::targets() const
{
    std::vector<double> out;
    for (const auto& v : y) out.push_back(v.value());
    return out;
}

const SplitResult* RunResult::find(Split split) const
{
    for (const auto& s : splits)
        if (s.split == split) return &s;
    return nullptr;
}

const RiskRow* RunResult::find_risk(Split split, const std::string& method) const
{
    for (const auto& r : risk)
        if (r.split == split && r.method == method) return &r;
    return nullptr;
}

const OracleRow* RunResult::find_oracle(Split split, const std::string& method) const
{
    for (const auto& r : oracle)
        if (r.split == split && r.method == method) return &r;
    return nullptr;
}

RunResult run_experiment(const ExperimentConfig& c)
{
    RunResult result;
    std::optional<Model> model;
    auto data = c.data.source == DataSource::generator ? generated_splits(c, model) : ingested_splits(c);
    if (model) result.posterior_true = model->exact;

    stage("summarize", [&] {
        for (auto& sd : data) {
            SplitResult s;
            s.split = sd.split;
            s.ids = std::move(sd.ids);
            s.x = std::move(sd.x);
            s.y = std::move(sd.y);
            s.summaries.resize(s.ids.size());
            s.h_q.resize(s.ids.size());
            parallel_for(s.ids.size(), [&](std::size_t i) {
                s.summaries[i] = summarize(sd.samples[i], c.quantiles);
                s.h_q[i] = q_optimal_decision(sd.samples[i], c.loss);
            });
            if (model && !s.ids.empty()) s.h_p = p_optimal_decisions(c.model, model->exact, s.x, c.loss);
            result.splits.push_back(std::move(s));
        }
        return 0;
    });

    const auto& train_split = result.splits[0];
    if (!train_split.has_targets()) throw StageError("train", "every train point needs a target");
    result.prior = stage("prior", [&] { return prior_for_training(c, train_split, model); });

    stage("train", [&] {
        DmSpec spec;
        spec.kind = c.dm.kind;
        spec.input_width = c.quantiles;
        spec.seed = c.dm.seed.value_or(derive_seed(c.seed, kDmInit));
        spec.hidden = c.dm.hidden;
        spec.init_level = c.dm.init_level;
        if (!spec.init_level) {
            const auto rule = analytic_rule(c.loss);
            const auto* q = std::get_if<rules::Quantile>(&rule);
            spec.init_level = q ? q->level : 0.5;
        }
        auto dm = dm_init(spec);
        if (auto* mlp = std::get_if<MlpDecisionMaker>(&dm)) fit_input_scaling(*mlp, train_split.summaries);

        auto config = c.train;
        config.lambda = c.prior.kind == PriorKind::none && !c.prior.path ? 0.0 : c.prior.lambda;
        config.seed = c.train_seed.value_or(derive_seed(c.seed, kTrain));
        const auto* val = result.find(Split::val);
        const auto validation = val && val->has_targets() ? labeled(*val) : LabeledSummaries{};
        auto trained = train(std::move(dm), labeled(train_split), validation, result.prior, c.loss, config);
        result.dm = std::move(trained.dm);
        result.record = std::move(trained.record);
        return 0;
    });

    stage("evaluate", [&] {
        for (auto& s : result.splits) {
            s.h_dm = decide(result.dm, s.summaries);
            if (s.ids.empty() || !s.has_targets()) continue;
            const auto y = s.targets();
            const auto q = empirical_risk(s.h_q, y, c.loss);
            const auto d = empirical_risk(s.h_dm, y, c.loss);
            auto imp = [&](double er) -> std::optional<double> {
                if (q.empirical_risk > 0.0) return improvement(q.empirical_risk, er);
                return std::nullopt;
            };
            result.risk.push_back({s.split, "q_optimal", q.empirical_risk, q.standard_error, imp(q.empirical_risk)});
            result.risk.push_back({s.split, "dm", d.empirical_risk, d.standard_error, imp(d.empirical_risk)});
            if (!s.h_p.empty()) {
                const auto p = empirical_risk(s.h_p, y, c.loss);
                result.risk.push_back({s.split, "p_optimal", p.empirical_risk, p.standard_error, imp(p.empirical_risk)});
            }
        }
        if (model) {
            for (const auto& s : result.splits) {
                if (s.ids.empty()) continue;
                result.oracle.push_back({s.split, "q_optimal", p_risk(c.model, model->exact, s.h_q, s.x, c.loss).risk});
                result.oracle.push_back({s.split, "dm", p_risk(c.model, model->exact, s.h_dm, s.x, c.loss).risk});
                result.oracle.push_back({s.split, "p_optimal", p_risk(c.model, model->exact, s.h_p, s.x, c.loss).risk});
            }
        }
        return 0;
    });

    std::vector<SplitResult> kept;
    for (auto& s : result.splits)
        if (std::find(c.eval.splits.begin(), c.eval.splits.end(), s.split) != c.eval.splits.end()) kept.push_back(std::move(s));
    result.splits = std::move(kept);
    std::erase_if(result.risk, [&](const RiskRow& r) {
        return std::find(c.eval.splits.begin(), c.eval.splits.end(), r.split) == c.eval.splits.end();
    });
    std::erase_if(result.oracle, [&](const OracleRow& r) {
        return std::find(c.eval.splits.begin(), c.eval.splits.end(), r.split) == c.eval.splits.end();
    });
    return result;
}

void write_run_outputs(const RunResult& result, const ExperimentConfig& config, const std::filesystem::path& out_dir)
{
    stage("write", [&] {
        std::filesystem::create_directories(out_dir);
        const auto loss = describe(config.loss);

        std::ostringstream decisions;
        decisions << "point_id,split,h_q,h_dm,y\n";
        for (const auto& s : result.splits)
            for (std::size_t i = 0; i < s.ids.size(); ++i)
                decisions << s.ids[i] << ',' << to_string(s.split) << ',' << io::format_double(s.h_q[i]) << ','
                          << io::format_double(s.h_dm[i]) << ',' << csv_optional(s.y[i]) << '\n';
        io::write_atomic(out_dir / "decisions.csv", decisions.str());

        std::ostringstream risk;
        risk << "split,method,loss,risk,std_error,improvement\n";
        for (const auto& r : result.risk)
            risk << to_string(r.split) << ',' << r.method << ',' << loss << ',' << io::format_double(r.risk) << ','
                 << io::format_double(r.std_error) << ',' << csv_optional(r.improvement) << '\n';
        io::write_atomic(out_dir / "risk.csv", risk.str());

        if (!result.oracle.empty()) {
            std::ostringstream oracle;
            oracle << "split,method,loss,p_risk\n";
            for (const auto& r : result.oracle)
                oracle << to_string(r.split) << ',' << r.method << ',' << loss << ',' << io::format_double(r.p_risk) << '\n';
            io::write_atomic(out_dir / "oracle.csv", oracle.str());
        }

        io::write_atomic(out_dir / "training.csv", training_record_csv(result.record));
        io::write_atomic(out_dir / "dm.json", dm_to_json(result.dm).dump(2) + "\n");
        write_prior_csv(result.prior, out_dir / "prior.csv");
        return 0;
    });
}

DecisionPrior build_bootstrap_prior(const ExperimentConfig& c)
{
    if (c.data.source != DataSource::generator)
        throw ConfigError("data.source",
                          "bootstrap refits the model on resampled raw data; ingested predictive samples cannot be refit");
    check_generator_dims(c);
    const auto train_split = stage("generate", [&] { return generate_split(c, Split::train); });
    const auto model = stage("fit", [&] { return fit_model(c, train_split); });
    return stage("prior", [&] {
        return bootstrap_prior(model.fit, make_fitter(c), train_split.x, c.prior.replicates,
                               derive_seed(c.seed, kBootstrap), train_split.ids);
    });
}

SweepParam sweep_param_from_string(const std::string& name)
{
    if (name == "lambda") return SweepParam::lambda;
    if (name == "B") return SweepParam::quantiles;
    if (name == "S") return SweepParam::samples;
    if (name == "alpha") return SweepParam::blend;
    if (name == "gamma") return SweepParam::variance_scale;
    throw InputError("unknown sweep parameter \"" + name + "\" (expected lambda, B, S, alpha or gamma)");
}

std::string to_string(SweepParam param)
{
    switch (param) {
    case SweepParam::lambda: return "lambda";
    case SweepParam::quantiles: return "B";
    case SweepParam::samples: return "S";
    case SweepParam::blend: return "alpha";
    case SweepParam::variance_scale: return "gamma";
    }
    return "lambda";
}

ExperimentConfig with_param(ExperimentConfig c, SweepParam param, double value)
{
    auto as_count = [&](std::size_t min) {
        if (!(value >= static_cast<double>(min)) || value != std::floor(value))
            throw ConfigError(to_string(param), "must be an integer >= " + std::to_string(min));
        return static_cast<std::size_t>(value);
    };
    switch (param) {
    case SweepParam::lambda:
        if (!(value >= 0.0)) throw ConfigError("lambda", "must be non-negative");
        c.prior.lambda = value;
        break;
    case SweepParam::quantiles: c.quantiles = as_count(1); break;
    case SweepParam::samples: c.samples = as_count(2); break;
    case SweepParam::blend:
        if (!(value >= 0.0 && value <= 1.0)) throw ConfigError("alpha", "must lie in [0, 1]");
        c.approx.blend = value;
        break;
    case SweepParam::variance_scale:
        if (!(value > 0.0)) throw ConfigError("gamma", "must be positive");
        c.approx.variance_scale = value;
        break;
    }
    return c;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, SweepParam param, const std::vector<double>& values,
                                const std::filesystem::path& out_dir)
{
    std::vector<std::vector<SweepRow>> per_value(values.size());
    parallel_for(values.size(), [&](std::size_t k) {
        const double value = values[k];
        try {
            const auto c = with_param(config, param, value);
            const auto result = run_experiment(c);
            write_run_outputs(result, c, out_dir / ("run_" + std::to_string(k)));
            for (const auto& r : result.risk)
                per_value[k].push_back({value, to_string(r.split), r.method, r.risk, r.improvement, {}});
        } catch (const std::exception& e) {
            per_value[k] = {{value, "", "failed", std::nan(""), std::nullopt, e.what()}};
        }
    });
    std::vector<SweepRow> rows;
    for (auto& v : per_value) rows.insert(rows.end(), v.begin(), v.end());
    return rows;
}

std::string sweep_csv(SweepParam param, const std::vector<SweepRow>& rows)
{
    std::ostringstream out;
    out << "param_value,split,method,risk,improvement\n";
    for (const auto& r : rows) {
        const bool integral = param == SweepParam::quantiles || param == SweepParam::samples;
        out << (integral ? std::to_string(static_cast<long long>(r.param_value)) : io::format_double(r.param_value)) << ','
            << r.split << ',' << r.method << ',' << (std::isnan(r.risk) ? std::string() : io::format_double(r.risk))
            << ',' << csv_optional(r.improvement) << '\n';
    }
    return out.str();
}

} // namespace decal
