#include "decal/toy_models.hpp"

#include "decal/error.hpp"
#include "decal/gaussian.hpp"
#include "decal/random.hpp"

#include <cmath>
#include <variant>

namespace decal {

void validate(const ConjugateLinRegModel& model)
{
    if (!(model.prior_std > 0.0) || !(model.noise_std > 0.0)) throw InputError("prior_std and noise_std must be positive");
    if (model.dim == 0) throw InputError("model dimension must be positive");
}

void validate(const GaussianPosterior& posterior)
{
    const auto d = posterior.mean.size();
    if (posterior.cov.rows() != d || posterior.cov.cols() != d) throw InputError("posterior covariance shape mismatch");
    if ((posterior.cov - posterior.cov.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw InputError("posterior covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(posterior.cov, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) throw InputError("posterior covariance is not positive definite");
}

void validate(const ApproxSpec& spec)
{
    if (!(spec.variance_scale > 0.0)) throw InputError("variance_scale must be positive");
    if (!(spec.blend >= 0.0 && spec.blend <= 1.0)) throw InputError("blend must lie in [0, 1]");
}

GaussianPosterior exact_posterior(const ConjugateLinRegModel& model, const Eigen::MatrixXd& x, std::span<const double> y)
{
    validate(model);
    const auto d = static_cast<Eigen::Index>(model.dim);
    if (x.rows() != static_cast<Eigen::Index>(y.size())) throw InputError("covariate rows and targets differ in length");
    if (x.rows() > 0 && x.cols() != d) throw InputError("covariate width does not match model dimension");

    const double noise_var = model.noise_std * model.noise_std;
    Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(d, d) / (model.prior_std * model.prior_std);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    if (x.rows() > 0) {
        const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
        precision.noalias() += x.transpose() * x / noise_var;
        rhs = x.transpose() * yv / noise_var;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(precision);
    GaussianPosterior post;
    post.cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
    post.cov = 0.5 * (post.cov + post.cov.transpose());
    post.mean = post.cov * rhs;
    return post;
}

GaussianPosterior corrupt(const GaussianPosterior& posterior, const ApproxSpec& spec, const ConjugateLinRegModel& model)
{
    validate(spec);
    const auto d = posterior.mean.size();
    const double prior_var = model.prior_std * model.prior_std;

    GaussianPosterior out;
    out.mean = spec.blend * posterior.mean;
    out.cov = spec.blend * posterior.cov + (1.0 - spec.blend) * prior_var * Eigen::MatrixXd::Identity(d, d);
    if (spec.mean_shift.size() == 1) {
        out.mean.array() += spec.mean_shift.front();
    } else if (!spec.mean_shift.empty()) {
        if (static_cast<Eigen::Index>(spec.mean_shift.size()) != d) throw InputError("mean_shift length mismatch");
        out.mean += Eigen::Map<const Eigen::VectorXd>(spec.mean_shift.data(), d);
    }
    out.cov *= spec.variance_scale * spec.variance_scale;
    return out;
}

PredictiveMoments predictive_moments(const GaussianPosterior& posterior, const ConjugateLinRegModel& model,
                                     const Eigen::VectorXd& x)
{
    if (x.size() != posterior.mean.size()) throw InputError("covariate width does not match posterior dimension");
    const double var = x.dot(posterior.cov * x) + model.noise_std * model.noise_std;
    return {x.dot(posterior.mean), std::sqrt(std::max(var, 0.0))};
}

PredictiveSamples predictive_samples(const GaussianPosterior& posterior, const ConjugateLinRegModel& model,
                                     const Eigen::VectorXd& x, std::size_t count, std::uint64_t seed)
{
    if (count < 2) throw InputError("at least two predictive samples are required");
    const auto moments = predictive_moments(posterior, model, x);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    PredictiveSamples out;
    out.samples.resize(count);
    for (double& s : out.samples) s = moments.mean + moments.sd * normal(rng);
    return out;
}

double gaussian_expected_loss(const Loss& loss, double h, double mean, double sd)
{
    if (std::holds_alternative<losses::Squared>(loss)) return (h - mean) * (h - mean) + sd * sd;
    if (sd <= 0.0) return eval_loss(loss, h, mean);

    double under = 1.0; // weight on (y - h)+
    double over = 1.0;  // weight on (h - y)+
    if (const auto* l = std::get_if<losses::ImbalancedAbsolute>(&loss)) {
        under = l->a;
        over = l->b;
    } else if (const auto* l = std::get_if<losses::Tilted>(&loss)) {
        under = l->t;
        over = 1.0 - l->t;
    }
    const double u = (h - mean) / sd;
    const double pdf = normal_pdf(u);
    const double cdf = normal_cdf(u);
    const double above = sd * (pdf - u * (1.0 - cdf)); // E[(y - h)+]
    const double below = sd * (pdf + u * cdf);         // E[(h - y)+]
    return under * above + over * below;
}

double gaussian_optimal_decision(const Loss& loss, double mean, double sd)
{
    const auto rule = analytic_rule(loss);
    if (const auto* q = std::get_if<rules::Quantile>(&rule)) return mean + sd * normal_quantile(q->level);
    return mean;
}

PRiskReport p_risk(const ConjugateLinRegModel& model, const GaussianPosterior& posterior_true,
                   std::span<const double> decisions, const Eigen::MatrixXd& eval_points, const Loss& loss)
{
    validate(loss);
    if (static_cast<Eigen::Index>(decisions.size()) != eval_points.rows())
        throw InputError("decisions and eval points differ in length");
    if (decisions.empty()) throw InputError("p_risk needs at least one point");

    PRiskReport report;
    report.per_point.reserve(decisions.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const auto m = predictive_moments(posterior_true, model, eval_points.row(static_cast<Eigen::Index>(i)).transpose());
        const double r = gaussian_expected_loss(loss, decisions[i], m.mean, m.sd);
        report.per_point.push_back(r);
        sum += r;
    }
    report.risk = sum / static_cast<double>(decisions.size());
    return report;
}

std::vector<double> p_optimal_decisions(const ConjugateLinRegModel& model, const GaussianPosterior& posterior_true,
                                        const Eigen::MatrixXd& eval_points, const Loss& loss)
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(eval_points.rows()));
    for (Eigen::Index i = 0; i < eval_points.rows(); ++i) {
        const auto m = predictive_moments(posterior_true, model, eval_points.row(i).transpose());
        out.push_back(gaussian_optimal_decision(loss, m.mean, m.sd));
    }
    return out;
}

SyntheticKind synthetic_kind_from_string(const std::string& name)
{
    if (name == "linear") return SyntheticKind::linear;
    if (name == "nonlinear_heteroscedastic") return SyntheticKind::nonlinear_heteroscedastic;
    throw InputError("unknown generator \"" + name + "\"");
}

Dataset gen_synthetic(SyntheticKind kind, std::size_t count, std::size_t dim, std::uint64_t seed,
                      const SyntheticParams& params, const std::string& id_prefix)
{
    if (count == 0) throw InputError("synthetic dataset needs N >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset data;
    data.ids.reserve(count);
    data.y.reserve(count);
    for (std::size_t i = 0; i < count; ++i) data.ids.push_back(id_prefix + std::to_string(i));

    if (kind == SyntheticKind::linear) {
        if (dim == 0) throw InputError("linear generator needs d >= 1");
        std::vector<double> beta = params.beta.empty() ? std::vector<double>(dim, 1.0) : params.beta;
        if (beta.size() != dim) throw InputError("beta length does not match d");
        data.x.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < count; ++i) {
            double mean = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double v = normal(rng);
                data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
                mean += v * beta[c];
            }
            data.y.push_back(mean + params.noise_std * normal(rng));
        }
        return data;
    }

    std::uniform_real_distribution<double> uniform(-3.0, 3.0);
    data.x.resize(static_cast<Eigen::Index>(count), 1);
    for (std::size_t i = 0; i < count; ++i) {
        const double x = uniform(rng);
        const double noise = (0.1 + 0.2 * std::abs(x)) * normal(rng);
        data.x(static_cast<Eigen::Index>(i), 0) = x;
        data.y.push_back(std::sin(2.0 * x) * (1.0 + x * x) / 2.0 + noise);
    }
    return data;
}

} // namespace decal
