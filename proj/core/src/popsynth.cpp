#include "campus/popsynth.hpp"

#include "campus/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace campus {

std::vector<double> derive_context_marginals(std::span<const double> target_sigmas, double anchor_p,
                                             std::size_t anchor_index)
{
    if (target_sigmas.empty() || anchor_index >= target_sigmas.size()) {
        throw InvalidInput("derive_context_marginals: anchor index out of range");
    }
    if (!(anchor_p > 0.0 && anchor_p < 1.0)) {
        throw InvalidInput("derive_context_marginals: anchor probability must lie in (0,1)");
    }
    for (double s : target_sigmas) {
        if (!(s > 0.0)) throw InvalidInput("derive_context_marginals: target sigmas must be positive");
    }
    const double anchor_sigma = target_sigmas[anchor_index];
    std::vector<double> p;
    p.reserve(target_sigmas.size() + 1);
    double named = 0.0;
    for (double s : target_sigmas) {
        const double ratio = s / anchor_sigma;
        p.push_back(ratio * ratio * anchor_p);
        named += p.back();
    }
    const double others = 1.0 - named;
    if (others < -1e-12) {
        throw InvalidInput("derive_context_marginals: anchor implies a negative Others share (" +
                           std::to_string(others) + ")");
    }
    p.push_back(std::max(0.0, others));
    return p;
}

VisitMatrix synthesize_visit_matrix(const PopulationSpec& spec, RngStream& rng)
{
    const std::size_t n = spec.mean_visit_probs.size();
    VisitMatrix matrix(static_cast<std::size_t>(spec.size), std::vector<double>(n, 0.0));
    for (auto& row : matrix) {
        double total = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double alpha = spec.concentration * spec.mean_visit_probs[c];
            row[c] = alpha > 0.0 ? rng.gamma(alpha) : 0.0;
            total += row[c];
        }
        if (total > 0.0) {
            for (double& x : row) x /= total;
        } else {
            // every gamma draw underflowed (tiny kappa); fall back to a draw from the mean
            double u = rng.uniform(), cumulative = 0.0;
            std::size_t pick = n - 1;
            for (std::size_t c = 0; c < n; ++c) {
                cumulative += spec.mean_visit_probs[c];
                if (u < cumulative) {
                    pick = c;
                    break;
                }
            }
            row[pick] = 1.0;
        }
    }
    return matrix;
}

std::vector<Agent> initialize_population(const PopulationSpec& spec, const VisitMatrix& matrix, RngStream& rng)
{
    if (static_cast<int>(matrix.size()) != spec.size) {
        throw InvalidInput("initialize_population: matrix has " + std::to_string(matrix.size()) +
                           " rows, expected " + std::to_string(spec.size));
    }
    std::vector<Agent> agents(matrix.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        auto& a = agents[i];
        a.id = static_cast<int>(i);
        a.visit_probs = matrix[i];

        const double u = rng.uniform();
        double cumulative = 0.0;
        a.class_year = kClassYears - 1;
        for (int y = 0; y < kClassYears; ++y) {
            cumulative += spec.class_year_fractions[static_cast<std::size_t>(y)];
            if (u < cumulative) {
                a.class_year = y;
                break;
            }
        }

        if (rng.uniform() < spec.initial_drinker_fraction) {
            a.state = DrinkingState::D;
            a.drinking_period = kUnassignedPeriod;
        } else {
            a.state = DrinkingState::ND;
            a.drinking_period = 0.0;
        }
    }
    return agents;
}

std::vector<double> column_means(const VisitMatrix& matrix)
{
    if (matrix.empty()) return {};
    std::vector<double> means(matrix.front().size(), 0.0);
    for (const auto& row : matrix) {
        for (std::size_t c = 0; c < means.size(); ++c) means[c] += row[c];
    }
    for (double& m : means) m /= static_cast<double>(matrix.size());
    return means;
}

VisitMatrix resolve_visit_matrix(const PopulationSpec& spec)
{
    if (spec.visit_matrix) return *spec.visit_matrix;
    RngStream rng(spec.matrix_seed);
    return synthesize_visit_matrix(spec, rng);
}

} // namespace campus
