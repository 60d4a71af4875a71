#include "campus/kernels.hpp"

#include "campus/error.hpp"
#include "campus/types.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace campus {

const char* to_string(DrinkingState s)
{
    switch (s) {
    case DrinkingState::ND: return "ND";
    case DrinkingState::D: return "D";
    case DrinkingState::FD: return "FD";
    }
    return "?";
}

std::vector<double> contact_probabilities(std::span<const double> mean_visit_probs)
{
    if (mean_visit_probs.size() < 2) {
        throw InvalidInput("contact_probabilities: need at least one context plus Others");
    }
    const std::size_t active = mean_visit_probs.size() - 1;
    double norm = 0.0;
    for (double p : mean_visit_probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw InvalidInput("contact_probabilities: visit probabilities must be finite and >= 0");
        }
    }
    for (std::size_t i = 0; i < active; ++i) norm += std::sqrt(mean_visit_probs[i]);
    if (norm <= 0.0) {
        throw InvalidInput("contact_probabilities: all context marginals are zero");
    }
    std::vector<double> sigma(mean_visit_probs.size(), 0.0);
    for (std::size_t i = 0; i < active; ++i) sigma[i] = std::sqrt(mean_visit_probs[i]) / norm;
    return sigma;
}

double aggregate_conversion_prob(double sigma, double beta, double phi, int drinkers)
{
    if (drinkers <= 0) return 0.0;
    const double s = per_contact_success(sigma, beta, phi);
    if (s >= 1.0) return 1.0;
    return -std::expm1(static_cast<double>(drinkers) * std::log1p(-s));
}

namespace {

bool is_probability(double x) { return x >= 0.0 && x <= 1.0; }

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

} // namespace

void ModelConfig::validate() const
{
    const auto& pop = population;
    const int n = context_count();
    if (pop.size <= 0) config_fail("population.size must be positive");
    if (n < 2) config_fail("need at least two contexts (the last is Others)");
    if (static_cast<int>(pop.mean_visit_probs.size()) != n) {
        config_fail("population.mean_visit_probs must have one entry per context");
    }
    double total = 0.0;
    for (double p : pop.mean_visit_probs) {
        if (!is_probability(p)) config_fail("population.mean_visit_probs entries must lie in [0,1]");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) config_fail("population.mean_visit_probs must sum to 1");
    if (!(pop.concentration > 0.0)) config_fail("population.concentration must be > 0");
    const double cy = std::accumulate(pop.class_year_fractions.begin(), pop.class_year_fractions.end(), 0.0);
    for (double f : pop.class_year_fractions) {
        if (!is_probability(f)) config_fail("population.class_year_fractions entries must lie in [0,1]");
    }
    if (std::abs(cy - 1.0) > 1e-9) config_fail("population.class_year_fractions must sum to 1");
    if (!is_probability(pop.initial_drinker_fraction)) {
        config_fail("population.initial_drinker_fraction must lie in [0,1]");
    }
    if (pop.visit_matrix) {
        if (static_cast<int>(pop.visit_matrix->size()) != pop.size) {
            config_fail("visit matrix row count must equal population.size");
        }
        for (const auto& row : *pop.visit_matrix) {
            if (static_cast<int>(row.size()) != n) config_fail("visit matrix rows must have one entry per context");
        }
    }
    if (!is_probability(rho)) config_fail("model.rho must lie in [0,1]");
    if (!is_probability(gamma) || gamma <= 0.0) config_fail("model.gamma must lie in (0,1]");
    if (static_cast<int>(sigmas.size()) != n || static_cast<int>(betas.size()) != n) {
        config_fail("model.sigma and model.beta need one entry per context");
    }
    for (int c = 0; c < n; ++c) {
        const double s = sigmas[static_cast<std::size_t>(c)];
        const double b = betas[static_cast<std::size_t>(c)];
        if (!is_probability(s)) config_fail("model.sigma entries must lie in [0,1]");
        if (!is_probability(b)) config_fail("model.beta entries must lie in [0,1]");
    }
    if (sigmas.back() != 0.0) config_fail("the last context (Others) must have sigma = 0");
    if (horizon_ticks < 0) config_fail("model.horizon_ticks must be >= 0");
    if (qs_window.lo < 0 || qs_window.hi < qs_window.lo || qs_window.hi > horizon_ticks) {
        std::ostringstream os;
        os << "model.qs_window [" << qs_window.lo << "," << qs_window.hi << "] must lie within [0,"
           << horizon_ticks << "]";
        config_fail(os.str());
    }
    if (ticks_per_year <= 0 || ticks_per_day <= 0) config_fail("tick calendar must be positive");
}

} // namespace campus
