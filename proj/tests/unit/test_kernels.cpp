#include <doctest.h>

#include "campus/error.hpp"
#include "campus/kernels.hpp"
#include "campus/rng.hpp"
#include "campus/types.hpp"

#include <cmath>
#include <vector>

using namespace campus;

TEST_CASE("contact probabilities reproduce the baseline sigma column")
{
    const std::vector<double> p{0.0334, 0.33, 0.0683, 0.0679, 0.50};
    const auto sigma = contact_probabilities(p);
    REQUIRE(sigma.size() == 5);
    const double expected[] = {0.1429, 0.4492, 0.2043, 0.2037, 0.0};
    for (std::size_t i = 0; i < 5; ++i) CHECK(sigma[i] == doctest::Approx(expected[i]).epsilon(0.002));
    CHECK(sigma[4] == 0.0);
}

TEST_CASE("single active context gets all contact mass")
{
    const auto sigma = contact_probabilities(std::vector<double>{0.25, 0, 0, 0, 0.75});
    CHECK(sigma == std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("equal marginals give equal contact probabilities")
{
    for (double q : {0.01, 0.1, 0.2, 0.25}) {
        const auto sigma = contact_probabilities(std::vector<double>{q, q, q, q, 1 - 4 * q});
        for (int i = 0; i < 4; ++i) CHECK(sigma[i] == doctest::Approx(0.25));
        CHECK(sigma[4] == 0.0);
    }
}

TEST_CASE("contact probabilities are scale invariant")
{
    const std::vector<double> p{0.05, 0.2, 0.1, 0.15, 0.5};
    const auto a = contact_probabilities(p);
    std::vector<double> scaled;
    for (double x : p) scaled.push_back(3.7 * x);
    const auto b = contact_probabilities(scaled);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("all-zero marginals are rejected")
{
    CHECK_THROWS_AS(contact_probabilities(std::vector<double>{0, 0, 0, 0, 1}), InvalidInput);
    CHECK_THROWS_AS(contact_probabilities(std::vector<double>{0, 0, 0, 0, 0}), InvalidInput);
}

TEST_CASE("per-contact success")
{
    CHECK(per_contact_success(0.4492, 0.0033, 0.0) == doctest::Approx(0.00148236).epsilon(1e-9));
    CHECK(per_contact_success(0.7, 0.9, 1.0) == 0.0);
    CHECK(per_contact_success(0.1429, 0.0105, 0.5) == doctest::Approx(0.000750225).epsilon(1e-9));
    static_assert(per_contact_success(1.0, 1.0, 0.0) == 1.0);
}

TEST_CASE("aggregate conversion probability")
{
    CHECK(aggregate_conversion_prob(0.5, 0.5, 0.0, 0) == 0.0);
    const double closed = 1.0 - std::pow(1.0 - 0.00148236, 100);
    CHECK(aggregate_conversion_prob(0.4492, 0.0033, 0.0, 100) == doctest::Approx(closed).epsilon(1e-6));
    CHECK(closed == doctest::Approx(0.1377).epsilon(1e-3));
    CHECK(aggregate_conversion_prob(1.0, 1.0, 0.0, 1) == 1.0);

    // Monte Carlo cross-check over 10^6 Bernoulli trials.
    RngStream rng(7);
    const double s = per_contact_success(0.4492, 0.0033, 0.0);
    long hits = 0;
    constexpr int kTrials = 10000;
    for (int t = 0; t < kTrials; ++t) {
        bool converted = false;
        for (int i = 0; i < 100; ++i) converted |= rng.uniform() < s;
        hits += converted;
    }
    const double freq = static_cast<double>(hits) / kTrials;
    CHECK(std::abs(freq - closed) < 4.0 * std::sqrt(closed * (1 - closed) / kTrials));
}

TEST_CASE("drinking state machine")
{
    using S = DrinkingState;
    CHECK(is_legal_transition(S::ND, S::D));
    CHECK(is_legal_transition(S::D, S::FD));
    CHECK(is_legal_transition(S::FD, S::D));
    CHECK(is_legal_transition(S::FD, S::FD));
    CHECK_FALSE(is_legal_transition(S::ND, S::FD));
    CHECK_FALSE(is_legal_transition(S::D, S::ND));
    CHECK_FALSE(is_legal_transition(S::FD, S::ND));
    CHECK(std::string(to_string(S::FD)) == "FD");
}

TEST_CASE("rng stream basics")
{
    RngStream a(3), b(3);
    for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
    RngStream rng(11);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        REQUIRE(rng.index(7) < 7u);
    }
    std::vector<int> v{1, 2, 3, 4, 5, 6};
    rng.shuffle(std::span<int>(v));
    std::sort(v.begin(), v.end());
    CHECK(v == std::vector<int>{1, 2, 3, 4, 5, 6});
}
