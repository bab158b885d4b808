#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "decal/error.hpp"
#include "decal/risk.hpp"
#include "oracles.hpp"

#include <cmath>
#include <vector>

using namespace decal;

TEST_CASE("empirical_risk examples")
{
    const std::vector<double> t{1.0, -2.0, 3.5};
    for (Loss l : {Loss{losses::Squared{}}, Loss{losses::Tilted{0.2}}}) CHECK(empirical_risk(t, t, l).empirical_risk == 0.0);

    const auto r = empirical_risk(std::vector<double>{0, 0}, std::vector<double>{1, -1}, losses::Squared{});
    CHECK(r.empirical_risk == 1.0);
    CHECK(r.n_points == 2);
    CHECK(r.standard_error == 0.0);

    CHECK(empirical_risk(std::vector<double>{0}, std::vector<double>{1}, losses::Tilted{0.9}).empirical_risk ==
          doctest::Approx(0.9));
}

TEST_CASE("empirical_risk reports per-point losses and the standard error")
{
    const std::vector<double> h{0, 0, 0, 0};
    const std::vector<double> y{1, 2, 3, 4};
    const auto r = empirical_risk(h, y, losses::Absolute{}, true);
    REQUIRE(r.per_point_losses.has_value());
    CHECK(*r.per_point_losses == y);
    CHECK(r.empirical_risk == 2.5);
    // sample sd of {1,2,3,4} is sqrt(5/3)
    CHECK(r.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK_FALSE(empirical_risk(h, y, losses::Absolute{}).per_point_losses.has_value());
}

TEST_CASE("empirical_risk errors")
{
    CHECK_THROWS_AS(empirical_risk(std::vector<double>{1}, std::vector<double>{1, 2}, losses::Squared{}), InputError);
    CHECK_THROWS_AS(empirical_risk(std::vector<double>{}, std::vector<double>{}, losses::Squared{}), InputError);
}

TEST_CASE("improvement examples")
{
    CHECK(improvement(1.0, 1.0) == 0.0);
    CHECK(improvement(1.0, 0.76) == doctest::Approx(0.24));
    CHECK(improvement(0.5, 0.6) == doctest::Approx(-0.2));
    CHECK_THROWS_AS(improvement(0.0, 1.0), InputError);
    CHECK_THROWS_AS(improvement(-1.0, 1.0), InputError);
}

TEST_CASE("grid_search_decision examples")
{
    CHECK(grid_search_decision(std::vector<double>{5, 5, 5}, losses::Squared{}, 0, 10, 0.01) == doctest::Approx(5.0));

    const auto draws = oracle::normal_draws(1'000'000, 8);
    CHECK(std::abs(grid_search_decision(draws, losses::Absolute{}, -4, 4, 1e-3)) < 0.005);
    CHECK(std::abs(grid_search_decision(draws, losses::Tilted{0.9}, -4, 4, 1e-3) - 1.2816) < 0.01);
}

TEST_CASE("grid_search_decision agrees with a naive grid evaluation")
{
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        const auto loss = oracle::random_loss(rng);
        const auto draws = oracle::normal_draws(300, rng(), 0.5, 2.0);
        const double fast = grid_search_decision(draws, loss, -6, 6, 0.01);
        const double naive = oracle::naive_grid_argmin(loss, draws, -6, 6, 0.01);
        CHECK(oracle::mc_risk(loss, fast, draws) == doctest::Approx(oracle::mc_risk(loss, naive, draws)).epsilon(1e-9));
    }
}

TEST_CASE("grid_search_decision breaks ties toward the smaller decision")
{
    // absolute risk is flat on [1, 2] for samples {1, 2}
    CHECK(grid_search_decision(std::vector<double>{1, 2}, losses::Absolute{}, 0, 3, 0.25) == doctest::Approx(1.0));
}

TEST_CASE("grid_search_decision errors")
{
    CHECK_THROWS_AS(grid_search_decision(std::vector<double>{1}, losses::Squared{}, 1, 1, 0.1), InputError);
    CHECK_THROWS_AS(grid_search_decision(std::vector<double>{1}, losses::Squared{}, 0, 1, 0.0), InputError);
}
