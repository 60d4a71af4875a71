#pragma once

#include "campus/rng.hpp"
#include "campus/types.hpp"

#include <span>
#include <vector>

namespace campus {

using VisitMatrix = std::vector<std::vector<double>>;

/// Invert the contact-probability map for the named (non-Others) contexts.
///
/// p_i = (sigma_i / sigma_anchor)^2 * anchor_p, p_Others = 1 - sum p_i.
/// `anchor_index` selects which of `target_sigmas` carries anchor_p.
/// Throws InvalidInput when a sigma is non-positive, anchor_p is outside (0,1)
/// or the derived Others share is negative.
std::vector<double> derive_context_marginals(std::span<const double> target_sigmas,
                                             double anchor_p, std::size_t anchor_index);

/// One Dirichlet(kappa * mean_visit_probs) row per agent.
VisitMatrix synthesize_visit_matrix(const PopulationSpec& spec, RngStream& rng);

/// Assign matrix rows, class-years and initial drinking states.
std::vector<Agent> initialize_population(const PopulationSpec& spec, const VisitMatrix& matrix,
                                         RngStream& rng);

/// Column means of a visit matrix.
std::vector<double> column_means(const VisitMatrix& matrix);

/// The matrix a run uses: the explicit one if present, otherwise the shared
/// synthesized one (drawn from spec.matrix_seed).
VisitMatrix resolve_visit_matrix(const PopulationSpec& spec);

} // namespace campus
