#pragma once

#include "campus/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace campus {

struct CalibrationSpec {
    double target_prevalence = 0.20;
    double beta_tilde_lo = 0.0;
    double beta_tilde_hi = 0.003;
    int replicates_per_eval = 200;
    double tolerance = 0.005; // on the prevalence moment
    int max_iterations = 40;
    std::uint64_t seed = 1;   // common random numbers: same seed set every evaluation
    int threads = 1;

    void validate() const;
};

struct CalibrationResult {
    double beta_tilde = 0.0;
    std::vector<double> betas; // per context; Others stays 0
    double achieved_prevalence = 0.0;
    double objective = 0.0;
    int iterations = 0;
    int evaluations = 0;
    /// Optimum pinned to a bracket end and the target was not met.
    bool at_boundary = false;
};

/// Thrown when the search finishes inside the bracket but misses the target.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, CalibrationResult best)
        : std::runtime_error(what), best_(std::move(best)) {}

    const CalibrationResult& best() const { return best_; }

private:
    CalibrationResult best_;
};

/// Copy of `config` whose non-Others contexts all have sigma*beta = beta_tilde.
ModelConfig with_common_beta_tilde(const ModelConfig& config, double beta_tilde);

/// Ensemble quasi-stationary drinker fraction at a common beta_tilde.
double simulated_prevalence(double beta_tilde, const ModelConfig& config,
                            const CalibrationSpec& spec);

/// Squared distance between the simulated moment and the target.
double msm_objective(double beta_tilde, const ModelConfig& config, const CalibrationSpec& spec);

/// Golden-section search of msm_objective over [beta_tilde_lo, beta_tilde_hi].
CalibrationResult calibrate_beta(const ModelConfig& config, const CalibrationSpec& spec);

} // namespace campus
