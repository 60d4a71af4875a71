#pragma once

#include <span>
#include <vector>

namespace campus {

/// Contact probability per context from mean visit probabilities.
///
/// sigma_i = sqrt(p_i) / sum_{j<n-1} sqrt(p_j) for the first n-1 contexts; the
/// last context ("Others") gets zero. Population size cancels because the mean
/// head-count per context is N * p_i.
/// Throws InvalidInput on negative entries or when every non-Others entry is 0.
std::vector<double> contact_probabilities(std::span<const double> mean_visit_probs);

/// Success probability of one drinker-target contact: sigma * beta * (1 - phi).
constexpr double per_contact_success(double sigma, double beta, double phi)
{
    return sigma * beta * (1.0 - phi);
}

/// Probability that a susceptible sharing a context with `drinkers` drinkers
/// converts this tick under a common resistancy phi: 1 - (1 - s)^I.
double aggregate_conversion_prob(double sigma, double beta, double phi, int drinkers);

} // namespace campus
