#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "decal/error.hpp"
#include "decal/predictive.hpp"
#include "oracles.hpp"

#include <vector>

using namespace decal;

TEST_CASE("empirical_quantile examples")
{
    CHECK(empirical_quantile(std::vector<double>{1, 2, 3}, 0.5) == 2.0);
    CHECK(empirical_quantile(std::vector<double>{4, 1, 3, 2}, 0.5) == 2.5);
    CHECK(empirical_quantile(std::vector<double>{7}, 0.3) == 7.0);
    CHECK(empirical_quantile(std::vector<double>{0, 10}, 0.25) == 2.5);
}

TEST_CASE("empirical_quantile of normal draws matches the bisection inverse CDF")
{
    const auto draws = oracle::normal_draws(1'000'000, 11);
    const double expected = oracle::std_normal_inv(0.9);
    CHECK(expected == doctest::Approx(1.2816).epsilon(1e-4));
    CHECK(std::abs(empirical_quantile(draws, 0.9) - expected) < 0.01);
}

TEST_CASE("empirical_quantile errors")
{
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), InputError);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{1, 2}, 0.0), InputError);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{1, 2}, 1.0), InputError);
    CHECK_THROWS_AS(empirical_quantile(std::vector<double>{1, std::nan("")}, 0.5), InputError);
}

TEST_CASE("summarize examples")
{
    auto s = summarize(std::vector<double>{0, 1}, 1);
    REQUIRE(s.size() == 1);
    CHECK(s.levels[0] == 0.5);
    CHECK(s.values[0] == 0.5);

    s = summarize(std::vector<double>{1, 2, 3, 4}, 2);
    CHECK(s.levels == std::vector<double>{0.25, 0.75});
    CHECK(s.values[0] == doctest::Approx(1.75));
    CHECK(s.values[1] == doctest::Approx(3.25));

    const auto levels = midpoint_levels(20);
    CHECK(levels.front() == doctest::Approx(0.025));
    CHECK(levels.back() == doctest::Approx(0.975));
}

TEST_CASE("summarize of standard normal draws approaches the normal quantiles")
{
    const auto draws = oracle::normal_draws(100'000, 5);
    const auto s = summarize(draws, 20);
    double worst = 0.0;
    for (std::size_t b = 0; b < 20; ++b)
        worst = std::max(worst, std::abs(s.values[b] - oracle::std_normal_inv((b + 0.5) / 20.0)));
    CHECK(worst < 0.05);
}

TEST_CASE("summarize errors")
{
    CHECK_THROWS_AS(summarize(std::vector<double>{1, 2}, 0), InputError);
    CHECK_THROWS_AS(summarize(std::vector<double>{1}, 3), InputError);
    PredictiveSamples p{"a", {1.0, 2.0, 3.0}};
    CHECK(summarize(p, 1).values[0] == 2.0);
}

TEST_CASE("q_optimal_decision examples")
{
    CHECK(q_optimal_decision(std::vector<double>{1, 2, 3, 4}, losses::Squared{}) == 2.5);
    CHECK(q_optimal_decision(std::vector<double>{3, 1, 2}, losses::Absolute{}) == 2.0);
    CHECK(q_optimal_decision(std::vector<double>{0, 1, 2, 3, 4}, losses::ImbalancedAbsolute{1, 3}) == 1.0);
    CHECK_THROWS_AS(q_optimal_decision(std::vector<double>{1}, losses::Squared{}), InputError);
}

TEST_CASE("q_optimal_decision for tilted loss matches a grid search over Monte-Carlo risk")
{
    const auto draws = oracle::normal_draws(1'000'000, 21);
    const double h = q_optimal_decision(draws, losses::Tilted{0.9});
    CHECK(std::abs(h - 1.2816) < 0.01);

    // coarse-to-fine grid oracle with the naive O(S) risk; subsample keeps it fast
    std::vector<double> sub(draws.begin(), draws.begin() + 20'000);
    const double coarse = oracle::naive_grid_argmin(losses::Tilted{0.9}, sub, -4.0, 4.0, 0.01);
    const double fine = oracle::naive_grid_argmin(losses::Tilted{0.9}, sub, coarse - 0.01, coarse + 0.01, 1e-3);
    CHECK(std::abs(q_optimal_decision(sub, losses::Tilted{0.9}) - fine) < 1e-3 + 1e-9);
    CHECK(std::abs(fine - 1.2816) < 0.03);
}
