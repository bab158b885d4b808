#include "decal/prior.hpp"

#include "decal/error.hpp"
#include "decal/io.hpp"
#include "decal/parallel.hpp"
#include "decal/random.hpp"

#include <cmath>
#include <sstream>

namespace decal {

namespace {

std::vector<std::string> default_ids(std::vector<std::string> ids, std::size_t n)
{
    if (ids.empty()) {
        ids.reserve(n);
        for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    }
    if (ids.size() != n) throw InputError("prior ids differ in length from decisions");
    return ids;
}

} // namespace

void validate(const DecisionPrior& prior)
{
    if (prior.mu.size() != prior.sigma.size() || prior.ids.size() != prior.mu.size())
        throw InputError("prior ids, mu and sigma differ in length");
    for (std::size_t i = 0; i < prior.size(); ++i) {
        if (!std::isfinite(prior.mu[i])) throw InputError("non-finite prior mean");
        if (!(prior.sigma[i] >= kSigmaFloor) || !std::isfinite(prior.sigma[i]))
            throw InputError("prior sigma below floor at point " + prior.ids[i]);
    }
}

DecisionPrior simple_prior(std::span<const double> q_decisions, std::vector<std::string> ids)
{
    if (q_decisions.empty()) throw InputError("simple prior needs at least one decision");
    DecisionPrior prior;
    prior.ids = default_ids(std::move(ids), q_decisions.size());
    prior.mu.assign(q_decisions.begin(), q_decisions.end());
    prior.sigma.assign(q_decisions.size(), 1.0);
    validate(prior);
    return prior;
}

Dataset resample(const Dataset& data, std::uint64_t seed)
{
    validate(data);
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::vector<std::size_t> idx(data.size());
    for (auto& i : idx) i = pick(rng);
    return subset(data, idx);
}

DecisionPrior bootstrap_prior(const Dataset& data, const FitAndDecide& fit_and_decide, const Eigen::MatrixXd& eval_points,
                              std::size_t replicates, std::uint64_t master_seed, std::vector<std::string> ids)
{
    if (replicates == 0) throw InputError("bootstrap needs L >= 1");
    validate(data);
    const auto n = static_cast<std::size_t>(eval_points.rows());

    std::vector<std::vector<double>> decisions(replicates);
    parallel_for(replicates, [&](std::size_t l) {
        try {
            auto h = fit_and_decide(resample(data, master_seed + l), eval_points);
            if (h.size() != n)
                throw InputError("fitter returned " + std::to_string(h.size()) + " decisions for " + std::to_string(n) +
                                 " eval points");
            decisions[l] = std::move(h);
        } catch (const std::exception& e) {
            throw ReplicateError(l, e.what());
        }
    });

    DecisionPrior prior;
    prior.ids = default_ids(std::move(ids), n);
    prior.mu.assign(n, 0.0);
    prior.sigma.assign(n, 0.0);
    const auto L = static_cast<double>(replicates);
    for (std::size_t i = 0; i < n; ++i) {
        double mean = 0.0;
        for (const auto& h : decisions) mean += h[i];
        mean /= L;
        double ss = 0.0;
        for (const auto& h : decisions) ss += (h[i] - mean) * (h[i] - mean);
        prior.mu[i] = mean;
        prior.sigma[i] = std::max(std::sqrt(ss / L), kSigmaFloor);
    }
    validate(prior);
    return prior;
}

void write_prior_csv(const DecisionPrior& prior, const std::filesystem::path& path)
{
    validate(prior);
    std::ostringstream out;
    out << "point_id,mu,sigma\n";
    for (std::size_t i = 0; i < prior.size(); ++i)
        out << prior.ids[i] << ',' << io::format_double(prior.mu[i]) << ',' << io::format_double(prior.sigma[i]) << '\n';
    io::write_atomic(path, out.str());
}

DecisionPrior read_prior_csv(const std::filesystem::path& path)
{
    const auto rows = io::lines(io::read_text(path));
    if (rows.empty() || rows.front() != "point_id,mu,sigma") throw FormatError("prior header must be point_id,mu,sigma");
    DecisionPrior prior;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto f = io::split_csv(rows[r]);
        if (f.size() != 3) throw FormatError("prior row " + std::to_string(r + 1) + " must have 3 fields");
        prior.ids.push_back(f[0]);
        prior.mu.push_back(io::parse_double(f[1], r + 1));
        prior.sigma.push_back(io::parse_double(f[2], r + 1));
    }
    validate(prior);
    return prior;
}

} // namespace decal
