#include <doctest.h>

#include "campus/config.hpp"
#include "campus/error.hpp"
#include "campus/kernels.hpp"
#include "campus/popsynth.hpp"
#include "campus/rng.hpp"

#include <array>
#include <cmath>
#include <numeric>

using namespace campus;

namespace {

PopulationSpec spec_with(double kappa)
{
    PopulationSpec spec = default_settings().model.population;
    spec.concentration = kappa;
    return spec;
}

} // namespace

TEST_CASE("context marginals from target sigma")
{
    const std::array<double, 4> sigma{0.1429, 0.4492, 0.2043, 0.2037};
    const auto p = derive_context_marginals(sigma, 0.33, 1);
    REQUIRE(p.size() == 5);
    const double expected[] = {0.0334, 0.33, 0.0683, 0.0679, 0.5004};
    for (std::size_t i = 0; i < 5; ++i) CHECK(p[i] == doctest::Approx(expected[i]).epsilon(0.003));
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));

    // the listed sigmas sum to 1.0001, so the round trip matches to that precision
    const auto back = contact_probabilities(p);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(back[i] - sigma[i]) < 1e-4);
}

TEST_CASE("equal sigma with anchor 0.25 fills the named contexts")
{
    const std::array<double, 4> sigma{0.25, 0.25, 0.25, 0.25};
    const auto p = derive_context_marginals(sigma, 0.25, 2);
    for (int i = 0; i < 4; ++i) CHECK(p[static_cast<std::size_t>(i)] == doctest::Approx(0.25));
    CHECK(p[4] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("anchor that leaves no room for Others is rejected")
{
    const std::array<double, 4> sigma{0.1429, 0.4492, 0.2043, 0.2037};
    CHECK_THROWS_AS(derive_context_marginals(sigma, 1.0, 1), InvalidInput);
    CHECK_THROWS_AS(derive_context_marginals(sigma, 0.9, 0), InvalidInput);
    CHECK_THROWS_AS(derive_context_marginals(sigma, 0.3, 7), InvalidInput);
}

TEST_CASE("visit matrix rows live on the simplex")
{
    for (double kappa : {0.05, 0.2, 10.0}) {
        RngStream rng(21);
        const auto m = synthesize_visit_matrix(spec_with(kappa), rng);
        REQUIRE(m.size() == 538);
        for (const auto& row : m) {
            REQUIRE(row.size() == 5);
            for (double x : row) CHECK(x >= 0.0);
            CHECK(std::accumulate(row.begin(), row.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("large concentration collapses rows onto the mean")
{
    RngStream rng(8);
    const PopulationSpec spec = spec_with(1e6);
    const auto m = synthesize_visit_matrix(spec, rng);
    double worst = 0.0;
    for (const auto& row : m) {
        for (std::size_t c = 0; c < row.size(); ++c) worst = std::max(worst, std::abs(row[c] - spec.mean_visit_probs[c]));
    }
    CHECK(worst < 1e-2);
}

TEST_CASE("column means track the mean visit probabilities")
{
    RngStream rng(13);
    const PopulationSpec spec = spec_with(10.0);
    const auto means = column_means(synthesize_visit_matrix(spec, rng));
    for (std::size_t c = 0; c < means.size(); ++c) CHECK(std::abs(means[c] - spec.mean_visit_probs[c]) < 0.03);
}

TEST_CASE("shared matrix is reproducible from its seed")
{
    const PopulationSpec spec = default_settings().model.population;
    CHECK(resolve_visit_matrix(spec) == resolve_visit_matrix(spec));
    PopulationSpec other = spec;
    other.matrix_seed = spec.matrix_seed + 1;
    CHECK(resolve_visit_matrix(spec) != resolve_visit_matrix(other));
    PopulationSpec given = spec;
    given.visit_matrix = VisitMatrix(538, std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.2});
    CHECK(resolve_visit_matrix(given) == *given.visit_matrix);
}

TEST_CASE("population initialisation")
{
    PopulationSpec spec = default_settings().model.population;
    const VisitMatrix matrix = resolve_visit_matrix(spec);

    SUBCASE("no initial drinkers")
    {
        spec.initial_drinker_fraction = 0.0;
        RngStream rng(1);
        for (const auto& a : initialize_population(spec, matrix, rng)) CHECK(a.state == DrinkingState::ND);
    }
    SUBCASE("drinker count and class-year histogram over 1000 draws")
    {
        RngStream rng(2);
        double drinkers = 0.0;
        std::array<double, kClassYears> years{};
        constexpr int kInits = 1000;
        for (int i = 0; i < kInits; ++i) {
            const auto agents = initialize_population(spec, matrix, rng);
            for (const auto& a : agents) {
                drinkers += a.state == DrinkingState::D;
                years[static_cast<std::size_t>(a.class_year)] += 1.0;
                if (a.state == DrinkingState::D) REQUIRE(a.drinking_period == kUnassignedPeriod);
            }
        }
        CHECK(std::abs(drinkers / kInits - 26.9) < 1.0);
        for (int y = 0; y < kClassYears; ++y) {
            const auto i = static_cast<std::size_t>(y);
            CHECK(std::abs(years[i] / (kInits * 538.0) - spec.class_year_fractions[i]) < 0.01);
        }
    }
    SUBCASE("agents take their row of the visit matrix")
    {
        RngStream rng(3);
        const auto agents = initialize_population(spec, matrix, rng);
        REQUIRE(agents.size() == 538);
        for (std::size_t i = 0; i < agents.size(); ++i) {
            CHECK(agents[i].id == static_cast<int>(i));
            CHECK(agents[i].visit_probs == matrix[i]);
        }
    }
}
