#pragma once

#include "decal/dataset.hpp"
#include "decal/loss.hpp"
#include "decal/predictive.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace decal {

/// Bayesian linear regression y = x'beta + e, beta ~ N(0, prior_std^2 I), e ~ N(0, noise_std^2).
struct ConjugateLinRegModel {
    double prior_std = 1.0;
    double noise_std = 1.0;
    std::size_t dim = 1;
};

struct GaussianPosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Controlled approximation error applied to an exact posterior.
///
/// The posterior is first blended toward the prior (blend = 1 keeps it, 0 returns
/// the prior), then shifted by mean_shift and its covariance scaled by
/// variance_scale^2. mean_shift may be empty (zero), a single broadcast value, or
/// one value per dimension.
struct ApproxSpec {
    double variance_scale = 1.0;
    std::vector<double> mean_shift;
    double blend = 1.0;
};

/// Mean and standard deviation of the Gaussian predictive at one covariate vector.
struct PredictiveMoments {
    double mean = 0.0;
    double sd = 0.0;
};

void validate(const ConjugateLinRegModel& model);
void validate(const GaussianPosterior& posterior);
void validate(const ApproxSpec& spec);

GaussianPosterior exact_posterior(const ConjugateLinRegModel& model, const Eigen::MatrixXd& x, std::span<const double> y);

GaussianPosterior corrupt(const GaussianPosterior& posterior, const ApproxSpec& spec, const ConjugateLinRegModel& model);

PredictiveMoments predictive_moments(const GaussianPosterior& posterior, const ConjugateLinRegModel& model,
                                     const Eigen::VectorXd& x);

/// S draws from N(x'm, x'Vx + noise^2); deterministic per seed.
PredictiveSamples predictive_samples(const GaussianPosterior& posterior, const ConjugateLinRegModel& model,
                                     const Eigen::VectorXd& x, std::size_t count, std::uint64_t seed);

/// Closed-form E[l(y, h)] for y ~ N(mean, sd^2). sd = 0 gives the point-mass loss.
double gaussian_expected_loss(const Loss& loss, double h, double mean, double sd);

/// Minimizer of gaussian_expected_loss: the analytic rule applied to N(mean, sd^2).
double gaussian_optimal_decision(const Loss& loss, double mean, double sd);

struct PRiskReport {
    double risk = 0.0;
    double standard_error = 0.0; // zero for the closed forms used here
    std::vector<double> per_point;
};

/// Mean over points of the expected loss under the exact predictive at each point.
PRiskReport p_risk(const ConjugateLinRegModel& model, const GaussianPosterior& posterior_true,
                   std::span<const double> decisions, const Eigen::MatrixXd& eval_points, const Loss& loss);

/// Decisions optimal under the exact predictive at each eval point.
std::vector<double> p_optimal_decisions(const ConjugateLinRegModel& model, const GaussianPosterior& posterior_true,
                                        const Eigen::MatrixXd& eval_points, const Loss& loss);

enum class SyntheticKind { linear, nonlinear_heteroscedastic };

struct SyntheticParams {
    /// Coefficients for the linear generator; empty means all ones.
    std::vector<double> beta;
    double noise_std = 1.0;
};

SyntheticKind synthetic_kind_from_string(const std::string& name);

/// linear: x ~ N(0, I_d), y = x'beta + N(0, noise^2).
/// nonlinear_heteroscedastic: scalar x ~ U(-3, 3), y = sin(2x)(1 + x^2)/2 + N(0, (0.1 + 0.2|x|)^2).
Dataset gen_synthetic(SyntheticKind kind, std::size_t count, std::size_t dim, std::uint64_t seed,
                      const SyntheticParams& params = {}, const std::string& id_prefix = "p");

} // namespace decal
