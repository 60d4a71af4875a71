#pragma once

#include "campus/rng.hpp"
#include "campus/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace campus {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    double width() const { return hi - lo; }
};

/// Parameters of interest: per-context transmission probabilities beta_tilde.
struct ParameterSpace {
    std::vector<std::string> names;
    std::vector<int> context_index; // which context each dimension drives
    std::vector<Interval> bounds;
    std::vector<double> baseline;

    std::size_t dimension() const { return names.size(); }
    int find(const std::string& context_name) const; // -1 if absent
    void validate() const;

    /// Dorm, Library, MU, SDFC over [0, 2 * baseline beta_tilde].
    static ParameterSpace from_config(const ModelConfig& config);
};

struct IndexEstimate {
    std::string parameter;
    std::string method; // "PCC", "SRC", "S1", "ST"
    double estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct SensitivityResult {
    std::string method;
    Matrix design;
    Vector qoi;
    std::vector<IndexEstimate> indices;
    int replicates_per_point = 1;
    std::uint64_t seed = 0;
};

struct Interval95 {
    double lo = 0.0;
    double hi = 0.0;
};

struct OatPoint {
    double x = 0.0;
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Config with each dimension's context beta set to point[j] / sigma.
ModelConfig apply_point(const ModelConfig& config, const ParameterSpace& space,
                        std::span<const double> point);

/// Mean quasi-stationary drinker fraction; replicate r uses seed + r.
double evaluate_qoi(std::span<const double> point, const ParameterSpace& space,
                    const ModelConfig& config, int replicates, std::uint64_t seed);

/// Evaluate every design row; row i uses seed + i * replicates as its base seed.
Vector evaluate_design(const Matrix& design, const ParameterSpace& space, const ModelConfig& config,
                       int replicates, std::uint64_t seed, int threads = 1);

/// Vary one dimension over a uniform grid, others at baseline. A single grid
/// point is placed at the baseline value.
std::vector<OatPoint> oat_sweep(const ParameterSpace& space, std::size_t dimension, int grid_points,
                                const ModelConfig& config, int replicates, std::uint64_t seed,
                                int threads = 1);

Matrix lhs_sample(const ParameterSpace& space, int n, RngStream& rng);

std::vector<double> pcc(const Matrix& design, const Vector& qoi);
std::vector<double> src(const Matrix& design, const Vector& qoi);

struct SobolDesign {
    Matrix a;
    Matrix b;
    std::vector<Matrix> ab; // ab[j] = A with column j from B

    /// Stacked rows: A, B, AB_0, ..., AB_{k-1}.
    Matrix stacked() const;
};

SobolDesign sobol_design(const ParameterSpace& space, int n, RngStream& rng);

struct SobolIndices {
    std::vector<double> first_order;
    std::vector<double> total_order;
};

/// Jansen estimators. Estimates are not clipped to [0, 1].
SobolIndices sobol_indices(const Vector& f_a, const Vector& f_b, std::span<const Vector> f_ab);

/// Same, restricted to the rows listed in `rows` (used for bootstrapping).
SobolIndices sobol_indices(const Vector& f_a, const Vector& f_b, std::span<const Vector> f_ab,
                           std::span<const std::size_t> rows);

/// Percentile bootstrap over n row indices.
Interval95 bootstrap_ci(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                        int resamples, double confidence, RngStream& rng);

/// Percentile bootstrap of a statistic over plain samples.
Interval95 bootstrap_ci(std::span<const double> samples,
                        const std::function<double(std::span<const double>)>& statistic,
                        int resamples, double confidence, RngStream& rng);

struct RegressionOptions {
    int bootstrap = 1000;
    double confidence = 0.95;
};

/// PCC and SRC with bootstrap CIs for an evaluated design.
std::vector<IndexEstimate> regression_indices(const ParameterSpace& space, const Matrix& design,
                                              const Vector& qoi, const RegressionOptions& options,
                                              RngStream& rng);

struct SobolOptions {
    int bootstrap = 100;
    double confidence = 0.95;
};

std::vector<IndexEstimate> sobol_with_ci(const ParameterSpace& space, const Vector& f_a,
                                         const Vector& f_b, std::span<const Vector> f_ab,
                                         const SobolOptions& options, RngStream& rng);

/// Full LHS + PCC/SRC experiment. With repetitions > 1 the design is redrawn
/// and the indices averaged; the returned design/qoi are from the last one.
SensitivityResult run_lhs_experiment(const ParameterSpace& space, const ModelConfig& config, int n,
                                     int replicates, int repetitions, const RegressionOptions& options,
                                     std::uint64_t seed, int threads = 1);

/// Full Sobol experiment (n * (k + 2) model evaluations).
SensitivityResult run_sobol_experiment(const ParameterSpace& space, const ModelConfig& config, int n,
                                       int replicates, const SobolOptions& options,
                                       std::uint64_t seed, int threads = 1);

} // namespace campus
