#include "campus/calibrate.hpp"

#include "campus/engine.hpp"
#include "campus/error.hpp"

#include <cmath>
#include <sstream>

namespace campus {

void CalibrationSpec::validate() const
{
    if (!(target_prevalence >= 0.0 && target_prevalence <= 1.0)) {
        throw ConfigError("calibration.target_prevalence must lie in [0,1]");
    }
    if (!(beta_tilde_lo >= 0.0 && beta_tilde_lo < beta_tilde_hi)) {
        throw ConfigError("calibration bounds must satisfy 0 <= lo < hi");
    }
    if (replicates_per_eval < 1) throw ConfigError("calibration.replicates must be >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("calibration.tolerance must be > 0");
    if (max_iterations < 1) throw ConfigError("calibration.max_iterations must be >= 1");
}

ModelConfig with_common_beta_tilde(const ModelConfig& config, double beta_tilde)
{
    ModelConfig out = config;
    const std::size_t named = out.sigmas.size() - 1;
    for (std::size_t c = 0; c < named; ++c) {
        out.betas[c] = out.sigmas[c] > 0.0 ? beta_tilde / out.sigmas[c] : 0.0;
    }
    return out;
}

double simulated_prevalence(double beta_tilde, const ModelConfig& config, const CalibrationSpec& spec)
{
    const ModelConfig trial = with_common_beta_tilde(config, beta_tilde);
    return run_ensemble(trial, spec.replicates_per_eval, spec.seed, spec.threads).qs_mean;
}

double msm_objective(double beta_tilde, const ModelConfig& config, const CalibrationSpec& spec)
{
    const double gap = simulated_prevalence(beta_tilde, config, spec) - spec.target_prevalence;
    return gap * gap;
}

CalibrationResult calibrate_beta(const ModelConfig& config, const CalibrationSpec& spec)
{
    spec.validate();
    config.validate();

    struct Eval {
        double x;
        double prevalence;
        double objective;
    };
    CalibrationResult result;
    Eval best{0.0, 0.0, INFINITY};
    auto evaluate = [&](double x) {
        const double prevalence = simulated_prevalence(x, config, spec);
        const double gap = prevalence - spec.target_prevalence;
        ++result.evaluations;
        const Eval e{x, prevalence, gap * gap};
        if (e.objective < best.objective) best = e;
        return e.objective;
    };

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = spec.beta_tilde_lo;
    double hi = spec.beta_tilde_hi;
    const double x_tol = 1e-3 * (hi - lo);

    evaluate(lo);
    evaluate(hi);
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = evaluate(c);
    double fd = evaluate(d);
    while (result.iterations < spec.max_iterations && (hi - lo) > x_tol) {
        ++result.iterations;
        if (fc <= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = evaluate(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = evaluate(d);
        }
    }

    result.beta_tilde = best.x;
    result.achieved_prevalence = best.prevalence;
    result.objective = best.objective;
    result.betas = with_common_beta_tilde(config, best.x).betas;

    if (std::abs(best.prevalence - spec.target_prevalence) > spec.tolerance) {
        const bool pinned = std::abs(best.x - spec.beta_tilde_lo) <= x_tol ||
                            std::abs(best.x - spec.beta_tilde_hi) <= x_tol;
        if (pinned) {
            result.at_boundary = true;
            return result;
        }
        std::ostringstream os;
        os << "calibration did not reach prevalence " << spec.target_prevalence << " within "
           << spec.tolerance << " after " << result.iterations << " iterations (best " << best.prevalence
           << " at beta_tilde " << best.x << ")";
        throw ConvergenceError(os.str(), result);
    }
    return result;
}

} // namespace campus
