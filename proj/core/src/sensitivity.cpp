#include "campus/sensitivity.hpp"

#include "campus/engine.hpp"
#include "campus/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace campus {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent sub-seed for a named stage of an experiment.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix64(seed ^ splitmix64(stream)); }

double quantile_sorted(const std::vector<double>& sorted, double q)
{
    if (sorted.size() == 1) return sorted.front();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= sorted.size()) return sorted.back();
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

double pearson(const Vector& a, const Vector& b)
{
    const Vector da = a.array() - a.mean();
    const Vector db = b.array() - b.mean();
    const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
    if (!(denom > 0.0)) throw DegenerateDesign("correlation undefined: zero variance");
    return da.dot(db) / denom;
}

double sample_sd(const Vector& v)
{
    if (v.size() < 2) return 0.0;
    return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

// Constant up to round-off of the mean.
bool is_flat(const Vector& v)
{
    const double scale = v.cwiseAbs().maxCoeff();
    return !(sample_sd(v) > 1e-12 * scale);
}

void check_regression_input(const Matrix& design, const Vector& qoi)
{
    if (design.rows() != qoi.size()) throw InvalidInput("design rows and qoi length differ");
    if (design.rows() <= design.cols() + 2) {
        throw DegenerateDesign("regression indices need more than k + 2 samples");
    }
}

// Least-squares residual of y on [1, X]; throws on rank deficiency.
Vector ols_residual(const Matrix& x, const Vector& y)
{
    Matrix augmented(x.rows(), x.cols() + 1);
    augmented.col(0).setOnes();
    augmented.rightCols(x.cols()) = x;
    Eigen::ColPivHouseholderQR<Matrix> qr(augmented);
    qr.setThreshold(1e-10);
    if (qr.rank() < augmented.cols()) throw DegenerateDesign("collinear design columns");
    return y - augmented * qr.solve(y);
}

Matrix drop_column(const Matrix& m, Eigen::Index j)
{
    Matrix out(m.rows(), m.cols() - 1);
    for (Eigen::Index c = 0, o = 0; c < m.cols(); ++c) {
        if (c != j) out.col(o++) = m.col(c);
    }
    return out;
}

Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows)
{
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Vector take_rows(const Vector& v, std::span<const std::size_t> rows)
{
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(rows[i]));
    return out;
}

IndexEstimate make_estimate(std::string parameter, std::string method, double estimate, Interval95 ci)
{
    // Percentile intervals of biased statistics can miss the point estimate.
    return IndexEstimate{std::move(parameter), std::move(method), estimate, std::min(ci.lo, estimate),
                         std::max(ci.hi, estimate)};
}

} // namespace

int ParameterSpace::find(const std::string& context_name) const
{
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j] == context_name) return static_cast<int>(j);
    }
    return -1;
}

void ParameterSpace::validate() const
{
    if (names.empty()) throw ConfigError("parameter space is empty");
    if (context_index.size() != names.size() || bounds.size() != names.size() || baseline.size() != names.size()) {
        throw ConfigError("parameter space fields differ in length");
    }
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (!(bounds[j].lo < bounds[j].hi)) throw ConfigError("parameter '" + names[j] + "' needs lower < upper bound");
    }
}

ParameterSpace ParameterSpace::from_config(const ModelConfig& config)
{
    ParameterSpace space;
    const auto& names = config.population.context_names;
    std::vector<int> order(names.size() - 1);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return names[static_cast<std::size_t>(a)] < names[static_cast<std::size_t>(b)];
    });
    for (int c : order) {
        const auto i = static_cast<std::size_t>(c);
        const double base = config.sigmas[i] * config.betas[i];
        space.names.push_back(names[i]);
        space.context_index.push_back(c);
        space.baseline.push_back(base);
        space.bounds.push_back({0.0, 2.0 * base});
    }
    return space;
}

ModelConfig apply_point(const ModelConfig& config, const ParameterSpace& space, std::span<const double> point)
{
    if (point.size() != space.dimension()) throw InvalidInput("point dimension does not match parameter space");
    ModelConfig out = config;
    for (std::size_t j = 0; j < point.size(); ++j) {
        const auto c = static_cast<std::size_t>(space.context_index[j]);
        const double sigma = out.sigmas[c];
        if (!(sigma > 0.0)) throw InvalidInput("cannot set beta_tilde on a context with sigma = 0");
        out.betas[c] = point[j] / sigma;
    }
    return out;
}

double evaluate_qoi(std::span<const double> point, const ParameterSpace& space, const ModelConfig& config,
                    int replicates, std::uint64_t seed)
{
    if (replicates < 1) throw InvalidInput("evaluate_qoi: replicates must be >= 1");
    const ModelConfig trial = apply_point(config, space, point);
    double sum = 0.0;
    for (int r = 0; r < replicates; ++r) {
        sum += run_replicate(trial, seed + static_cast<std::uint64_t>(r)).window_mean_drinker_fraction(trial.qs_window);
    }
    return sum / replicates;
}

Vector evaluate_design(const Matrix& design, const ParameterSpace& space, const ModelConfig& config, int replicates,
                       std::uint64_t seed, int threads)
{
    Vector qoi(design.rows());
    parallel_for(static_cast<int>(design.rows()), threads, [&](int i) {
        const Eigen::VectorXd row = design.row(i).transpose();
        qoi(i) = evaluate_qoi(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), space, config,
                              replicates, seed + static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(replicates));
    });
    return qoi;
}

std::vector<OatPoint> oat_sweep(const ParameterSpace& space, std::size_t dimension, int grid_points,
                                const ModelConfig& config, int replicates, std::uint64_t seed, int threads)
{
    space.validate();
    if (dimension >= space.dimension()) throw InvalidInput("oat_sweep: dimension out of range");
    if (grid_points < 1 || replicates < 1) throw InvalidInput("oat_sweep: need grid_points >= 1 and replicates >= 1");

    const auto& b = space.bounds[dimension];
    std::vector<OatPoint> sweep(static_cast<std::size_t>(grid_points));
    for (int g = 0; g < grid_points; ++g) {
        sweep[static_cast<std::size_t>(g)].x =
            grid_points == 1 ? space.baseline[dimension] : b.lo + b.width() * g / (grid_points - 1);
    }

    // Same replicate seeds at every grid point (common random numbers).
    std::vector<std::vector<double>> values(sweep.size(), std::vector<double>(static_cast<std::size_t>(replicates)));
    const int jobs = grid_points * replicates;
    parallel_for(jobs, threads, [&](int job) {
        const auto g = static_cast<std::size_t>(job / replicates);
        const auto r = static_cast<std::size_t>(job % replicates);
        std::vector<double> point = space.baseline;
        point[dimension] = sweep[g].x;
        const ModelConfig trial = apply_point(config, space, point);
        values[g][r] = run_replicate(trial, seed + r).window_mean_drinker_fraction(trial.qs_window);
    });

    for (std::size_t g = 0; g < sweep.size(); ++g) {
        const auto& v = values[g];
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        const double half = 1.96 * sd / std::sqrt(static_cast<double>(v.size()));
        sweep[g].mean = mean;
        sweep[g].ci_lo = mean - half;
        sweep[g].ci_hi = mean + half;
    }
    return sweep;
}

Matrix lhs_sample(const ParameterSpace& space, int n, RngStream& rng)
{
    if (n < 2) throw InvalidInput("lhs_sample: n must be >= 2");
    space.validate();
    const auto k = static_cast<Eigen::Index>(space.dimension());
    Matrix design(n, k);
    std::vector<int> strata(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < k; ++j) {
        std::iota(strata.begin(), strata.end(), 0);
        rng.shuffle(std::span<int>(strata));
        const auto& b = space.bounds[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i) {
            const double unit = (strata[static_cast<std::size_t>(i)] + rng.uniform()) / n;
            // keep the draw inside its own stratum after scaling
            design(i, j) = std::min(b.lo + unit * b.width(), std::nextafter(b.hi, b.lo));
        }
    }
    return design;
}

std::vector<double> pcc(const Matrix& design, const Vector& qoi)
{
    check_regression_input(design, qoi);
    const double ss_y = (qoi.array() - qoi.mean()).square().sum();
    if (is_flat(qoi)) throw DegenerateDesign("constant response: PCC undefined");
    std::vector<double> out;
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
        const Matrix others = drop_column(design, j);
        const Vector ex = ols_residual(others, design.col(j));
        const Vector ey = ols_residual(others, qoi);
        // response fully explained by the other columns: nothing left to correlate
        if (ey.squaredNorm() <= 1e-24 * ss_y) {
            out.push_back(0.0);
            continue;
        }
        out.push_back(pearson(ex, ey));
    }
    return out;
}

std::vector<double> src(const Matrix& design, const Vector& qoi)
{
    check_regression_input(design, qoi);
    const double sd_y = sample_sd(qoi);
    if (is_flat(qoi)) throw DegenerateDesign("constant response: SRC undefined");
    Matrix augmented(design.rows(), design.cols() + 1);
    augmented.col(0).setOnes();
    augmented.rightCols(design.cols()) = design;
    Eigen::ColPivHouseholderQR<Matrix> qr(augmented);
    qr.setThreshold(1e-10);
    if (qr.rank() < augmented.cols()) throw DegenerateDesign("collinear design columns");
    const Vector coef = qr.solve(qoi);
    std::vector<double> out;
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
        out.push_back(coef(j + 1) * sample_sd(design.col(j)) / sd_y);
    }
    return out;
}

Matrix SobolDesign::stacked() const
{
    const Eigen::Index n = a.rows();
    Matrix out(n * static_cast<Eigen::Index>(ab.size() + 2), a.cols());
    out.topRows(n) = a;
    out.middleRows(n, n) = b;
    for (std::size_t j = 0; j < ab.size(); ++j) out.middleRows(n * static_cast<Eigen::Index>(j + 2), n) = ab[j];
    return out;
}

SobolDesign sobol_design(const ParameterSpace& space, int n, RngStream& rng)
{
    if (n < 2) throw InvalidInput("sobol_design: n must be >= 2");
    space.validate();
    const auto k = static_cast<Eigen::Index>(space.dimension());
    SobolDesign d;
    d.a.resize(n, k);
    d.b.resize(n, k);
    for (Matrix* m : {&d.a, &d.b}) {
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
                const auto& b = space.bounds[static_cast<std::size_t>(j)];
                (*m)(i, j) = b.lo + rng.uniform() * b.width();
            }
        }
    }
    for (Eigen::Index j = 0; j < k; ++j) {
        Matrix ab = d.a;
        ab.col(j) = d.b.col(j);
        d.ab.push_back(std::move(ab));
    }
    return d;
}

SobolIndices sobol_indices(const Vector& f_a, const Vector& f_b, std::span<const Vector> f_ab,
                           std::span<const std::size_t> rows)
{
    const auto n = static_cast<double>(rows.size());
    if (rows.empty()) throw InvalidInput("sobol_indices: no samples");
    double mean = 0.0;
    for (std::size_t r : rows) mean += f_a(static_cast<Eigen::Index>(r)) + f_b(static_cast<Eigen::Index>(r));
    mean /= 2.0 * n;
    double var = 0.0;
    for (std::size_t r : rows) {
        const double da = f_a(static_cast<Eigen::Index>(r)) - mean;
        const double db = f_b(static_cast<Eigen::Index>(r)) - mean;
        var += da * da + db * db;
    }
    var /= 2.0 * n;
    if (!(var > 1e-24 * mean * mean) || var == 0.0) throw DegenerateDesign("sobol_indices: zero output variance");

    SobolIndices out;
    for (const Vector& fj : f_ab) {
        double first = 0.0, total = 0.0;
        for (std::size_t r : rows) {
            const auto i = static_cast<Eigen::Index>(r);
            const double db = f_b(i) - fj(i);
            const double da = f_a(i) - fj(i);
            first += db * db;
            total += da * da;
        }
        out.first_order.push_back((var - first / (2.0 * n)) / var);
        out.total_order.push_back(total / (2.0 * n) / var);
    }
    return out;
}

SobolIndices sobol_indices(const Vector& f_a, const Vector& f_b, std::span<const Vector> f_ab)
{
    if (f_a.size() != f_b.size()) throw InvalidInput("sobol_indices: f(A) and f(B) differ in length");
    for (const auto& v : f_ab) {
        if (v.size() != f_a.size()) throw InvalidInput("sobol_indices: f(A_B) length mismatch");
    }
    std::vector<std::size_t> rows(static_cast<std::size_t>(f_a.size()));
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return sobol_indices(f_a, f_b, f_ab, rows);
}

Interval95 bootstrap_ci(std::size_t n, const std::function<double(std::span<const std::size_t>)>& statistic,
                        int resamples, double confidence, RngStream& rng)
{
    if (n == 0) throw InvalidInput("bootstrap_ci: no samples");
    if (resamples < 2) throw InvalidInput("bootstrap_ci: need at least two resamples");
    if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidInput("bootstrap_ci: confidence must lie in (0,1)");
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(resamples));
    std::vector<std::size_t> idx(n);
    for (int b = 0; b < resamples; ++b) {
        for (auto& i : idx) i = rng.index(n);
        stats.push_back(statistic(idx));
    }
    std::sort(stats.begin(), stats.end());
    const double tail = (1.0 - confidence) / 2.0;
    return {quantile_sorted(stats, tail), quantile_sorted(stats, 1.0 - tail)};
}

Interval95 bootstrap_ci(std::span<const double> samples, const std::function<double(std::span<const double>)>& statistic,
                        int resamples, double confidence, RngStream& rng)
{
    std::vector<double> buffer(samples.size());
    return bootstrap_ci(
        samples.size(),
        [&](std::span<const std::size_t> idx) {
            for (std::size_t i = 0; i < idx.size(); ++i) buffer[i] = samples[idx[i]];
            return statistic(buffer);
        },
        resamples, confidence, rng);
}

std::vector<IndexEstimate> regression_indices(const ParameterSpace& space, const Matrix& design, const Vector& qoi,
                                              const RegressionOptions& options, RngStream& rng)
{
    const auto p = pcc(design, qoi);
    const auto s = src(design, qoi);
    std::vector<IndexEstimate> out;
    const auto n = static_cast<std::size_t>(design.rows());
    for (std::size_t j = 0; j < space.dimension(); ++j) {
        const auto ci = bootstrap_ci(
            n, [&](std::span<const std::size_t> rows) { return pcc(take_rows(design, rows), take_rows(qoi, rows))[j]; },
            options.bootstrap, options.confidence, rng);
        out.push_back(make_estimate(space.names[j], "PCC", p[j], ci));
    }
    for (std::size_t j = 0; j < space.dimension(); ++j) {
        const auto ci = bootstrap_ci(
            n, [&](std::span<const std::size_t> rows) { return src(take_rows(design, rows), take_rows(qoi, rows))[j]; },
            options.bootstrap, options.confidence, rng);
        out.push_back(make_estimate(space.names[j], "SRC", s[j], ci));
    }
    return out;
}

std::vector<IndexEstimate> sobol_with_ci(const ParameterSpace& space, const Vector& f_a, const Vector& f_b,
                                         std::span<const Vector> f_ab, const SobolOptions& options, RngStream& rng)
{
    const auto point = sobol_indices(f_a, f_b, f_ab);
    const auto n = static_cast<std::size_t>(f_a.size());
    std::vector<IndexEstimate> first, total;
    for (std::size_t j = 0; j < space.dimension(); ++j) {
        const auto ci_s = bootstrap_ci(
            n, [&](std::span<const std::size_t> rows) { return sobol_indices(f_a, f_b, f_ab, rows).first_order[j]; },
            options.bootstrap, options.confidence, rng);
        const auto ci_t = bootstrap_ci(
            n, [&](std::span<const std::size_t> rows) { return sobol_indices(f_a, f_b, f_ab, rows).total_order[j]; },
            options.bootstrap, options.confidence, rng);
        first.push_back(make_estimate(space.names[j], "S1", point.first_order[j], ci_s));
        total.push_back(make_estimate(space.names[j], "ST", point.total_order[j], ci_t));
    }
    first.insert(first.end(), total.begin(), total.end());
    return first;
}

SensitivityResult run_lhs_experiment(const ParameterSpace& space, const ModelConfig& config, int n, int replicates,
                                     int repetitions, const RegressionOptions& options, std::uint64_t seed, int threads)
{
    if (repetitions < 1) throw InvalidInput("run_lhs_experiment: repetitions must be >= 1");
    SensitivityResult result;
    result.method = "LHS";
    result.replicates_per_point = replicates;
    result.seed = seed;
    for (int rep = 0; rep < repetitions; ++rep) {
        const auto r = static_cast<std::uint64_t>(rep);
        RngStream design_rng(sub_seed(seed, 3 * r));
        result.design = lhs_sample(space, n, design_rng);
        result.qoi = evaluate_design(result.design, space, config, replicates, sub_seed(seed, 3 * r + 1), threads);
        RngStream boot_rng(sub_seed(seed, 3 * r + 2));
        auto indices = regression_indices(space, result.design, result.qoi, options, boot_rng);
        if (rep == 0) {
            result.indices = std::move(indices);
        } else {
            for (std::size_t i = 0; i < indices.size(); ++i) {
                result.indices[i].estimate += indices[i].estimate;
                result.indices[i].ci_lo += indices[i].ci_lo;
                result.indices[i].ci_hi += indices[i].ci_hi;
            }
        }
    }
    for (auto& e : result.indices) {
        e.estimate /= repetitions;
        e.ci_lo /= repetitions;
        e.ci_hi /= repetitions;
    }
    return result;
}

SensitivityResult run_sobol_experiment(const ParameterSpace& space, const ModelConfig& config, int n, int replicates,
                                       const SobolOptions& options, std::uint64_t seed, int threads)
{
    RngStream design_rng(sub_seed(seed, 0));
    const SobolDesign design = sobol_design(space, n, design_rng);
    SensitivityResult result;
    result.method = "Sobol";
    result.replicates_per_point = replicates;
    result.seed = seed;
    result.design = design.stacked();
    result.qoi = evaluate_design(result.design, space, config, replicates, sub_seed(seed, 1), threads);

    const Vector f_a = result.qoi.head(n);
    const Vector f_b = result.qoi.segment(n, n);
    std::vector<Vector> f_ab;
    for (std::size_t j = 0; j < space.dimension(); ++j) {
        f_ab.push_back(result.qoi.segment(n * static_cast<Eigen::Index>(j + 2), n));
    }
    RngStream boot_rng(sub_seed(seed, 2));
    result.indices = sobol_with_ci(space, f_a, f_b, f_ab, options, boot_rng);
    return result;
}

} // namespace campus
