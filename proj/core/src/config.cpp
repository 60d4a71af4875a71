#include "campus/config.hpp"

#include "campus/error.hpp"
#include "campus/io.hpp"
#include "campus/kernels.hpp"
#include "campus/popsynth.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace campus {

namespace {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& text)
{
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) throw std::invalid_argument("not a number: '" + text + "'");
    return v;
}

long long to_integer(const std::string& text)
{
    long long v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw std::invalid_argument("not an integer: '" + text + "'");
    return v;
}

bool to_bool(const std::string& text)
{
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw std::invalid_argument("not a boolean: '" + text + "'");
}

std::vector<double> to_doubles(const std::string& text)
{
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(to_double(item));
    return out;
}

void require(bool ok, const std::string& what)
{
    if (!ok) throw std::out_of_range(what);
}

double probability(const std::string& text)
{
    const double v = to_double(text);
    require(v >= 0.0 && v <= 1.0, "must lie in [0,1]");
    return v;
}

int positive_int(const std::string& text)
{
    const long long v = to_integer(text);
    require(v >= 1 && v <= 1'000'000'000, "must be a positive integer");
    return static_cast<int>(v);
}

std::string fmt_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

template <typename Range>
std::string fmt_list(const Range& values)
{
    std::string out;
    for (const auto& v : values) {
        if (!out.empty()) out += ", ";
        if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::string>) {
            out += v;
        } else {
            out += fmt_double(v);
        }
    }
    return out;
}

// Values whose defaults depend on other keys are resolved after parsing.
struct Pending {
    std::optional<std::vector<double>> mean_visit_probs;
    std::optional<std::vector<double>> target_sigma;
    std::optional<std::vector<double>> sigma;
    std::optional<std::vector<double>> beta;
    std::optional<std::string> matrix_file;
    std::optional<std::uint64_t> calibration_seed;
    std::string anchor_context = "MU";
    double anchor_p = baseline::kMuVisitProbability;
};

using Handler = std::function<void(RunSettings&, Pending&, const std::string&)>;

const std::map<std::string, Handler>& handlers()
{
    static const std::map<std::string, Handler> table = {
        {"seed", [](RunSettings& s, Pending&, const std::string& v) {
             const long long x = to_integer(v);
             require(x >= 0, "must be >= 0");
             s.seed = static_cast<std::uint64_t>(x);
         }},
        {"replicates", [](RunSettings& s, Pending&, const std::string& v) { s.replicates = positive_int(v); }},

        {"model.rho", [](RunSettings& s, Pending&, const std::string& v) { s.model.rho = probability(v); }},
        {"model.gamma", [](RunSettings& s, Pending&, const std::string& v) {
             s.model.gamma = probability(v);
             require(s.model.gamma > 0.0, "must be > 0");
         }},
        {"model.horizon_ticks", [](RunSettings& s, Pending&, const std::string& v) {
             const long long x = to_integer(v);
             require(x >= 0 && x <= 100'000'000, "must be a non-negative tick count");
             s.model.horizon_ticks = static_cast<int>(x);
         }},
        {"model.qs_window", [](RunSettings& s, Pending&, const std::string& v) {
             const auto items = split_list(v);
             require(items.size() == 2, "needs two ticks: lo, hi");
             s.model.qs_window = {static_cast<int>(to_integer(items[0])), static_cast<int>(to_integer(items[1]))};
             require(s.model.qs_window.lo >= 0 && s.model.qs_window.lo <= s.model.qs_window.hi, "needs 0 <= lo <= hi");
         }},
        {"model.ticks_per_year", [](RunSettings& s, Pending&, const std::string& v) {
             s.model.ticks_per_year = positive_int(v);
         }},
        {"model.sigma", [](RunSettings&, Pending& p, const std::string& v) {
             p.sigma = to_doubles(v);
             for (double x : *p.sigma) require(x >= 0.0 && x <= 1.0, "entries must lie in [0,1]");
         }},
        {"model.beta", [](RunSettings&, Pending& p, const std::string& v) {
             p.beta = to_doubles(v);
             for (double x : *p.beta) require(x >= 0.0 && x <= 1.0, "entries must lie in [0,1]");
         }},

        {"population.size", [](RunSettings& s, Pending&, const std::string& v) { s.model.population.size = positive_int(v); }},
        {"population.contexts", [](RunSettings& s, Pending&, const std::string& v) {
             auto names = split_list(v);
             require(names.size() >= 2, "needs at least two contexts");
             std::set<std::string> unique(names.begin(), names.end());
             require(unique.size() == names.size() && !unique.contains(""), "names must be distinct and non-empty");
             s.model.population.context_names = std::move(names);
         }},
        {"population.mean_visit_probs", [](RunSettings&, Pending& p, const std::string& v) {
             p.mean_visit_probs = to_doubles(v);
             for (double x : *p.mean_visit_probs) require(x >= 0.0 && x <= 1.0, "entries must lie in [0,1]");
         }},
        {"population.target_sigma", [](RunSettings&, Pending& p, const std::string& v) {
             p.target_sigma = to_doubles(v);
             for (double x : *p.target_sigma) require(x > 0.0 && x <= 1.0, "entries must lie in (0,1]");
         }},
        {"population.anchor_context", [](RunSettings&, Pending& p, const std::string& v) { p.anchor_context = v; }},
        {"population.anchor_p", [](RunSettings&, Pending& p, const std::string& v) {
             p.anchor_p = probability(v);
             require(p.anchor_p > 0.0 && p.anchor_p < 1.0, "must lie in (0,1)");
         }},
        {"population.concentration", [](RunSettings& s, Pending&, const std::string& v) {
             s.model.population.concentration = to_double(v);
             require(s.model.population.concentration > 0.0, "must be > 0");
         }},
        {"population.class_year_fractions", [](RunSettings& s, Pending&, const std::string& v) {
             const auto f = to_doubles(v);
             require(f.size() == kClassYears, "needs five fractions");
             double total = 0.0;
             for (std::size_t i = 0; i < f.size(); ++i) {
                 require(f[i] >= 0.0 && f[i] <= 1.0, "entries must lie in [0,1]");
                 s.model.population.class_year_fractions[i] = f[i];
                 total += f[i];
             }
             require(std::abs(total - 1.0) <= 1e-9, "must sum to 1");
         }},
        {"population.initial_drinker_fraction", [](RunSettings& s, Pending&, const std::string& v) {
             s.model.population.initial_drinker_fraction = probability(v);
         }},
        {"population.matrix_seed", [](RunSettings& s, Pending&, const std::string& v) {
             const long long x = to_integer(v);
             require(x >= 0, "must be >= 0");
             s.model.population.matrix_seed = static_cast<std::uint64_t>(x);
         }},
        {"population.resample_matrix", [](RunSettings& s, Pending&, const std::string& v) {
             s.model.population.resample_matrix = to_bool(v);
         }},
        {"population.matrix_file", [](RunSettings&, Pending& p, const std::string& v) { p.matrix_file = v; }},

        {"calibration.target_prevalence", [](RunSettings& s, Pending&, const std::string& v) {
             s.calibration.target_prevalence = probability(v);
         }},
        {"calibration.beta_tilde_lo", [](RunSettings& s, Pending&, const std::string& v) {
             s.calibration.beta_tilde_lo = probability(v);
         }},
        {"calibration.beta_tilde_hi", [](RunSettings& s, Pending&, const std::string& v) {
             s.calibration.beta_tilde_hi = probability(v);
         }},
        {"calibration.replicates", [](RunSettings& s, Pending&, const std::string& v) {
             s.calibration.replicates_per_eval = positive_int(v);
         }},
        {"calibration.tolerance", [](RunSettings& s, Pending&, const std::string& v) {
             s.calibration.tolerance = to_double(v);
             require(s.calibration.tolerance > 0.0, "must be > 0");
         }},
        {"calibration.max_iterations", [](RunSettings& s, Pending&, const std::string& v) {
             s.calibration.max_iterations = positive_int(v);
         }},
        {"calibration.seed", [](RunSettings&, Pending& p, const std::string& v) {
             const long long x = to_integer(v);
             require(x >= 0, "must be >= 0");
             p.calibration_seed = static_cast<std::uint64_t>(x);
         }},

        {"sa.lhs_samples", [](RunSettings& s, Pending&, const std::string& v) {
             s.sa.lhs_samples = positive_int(v);
             require(s.sa.lhs_samples >= 2, "must be >= 2");
         }},
        {"sa.lhs_repetitions", [](RunSettings& s, Pending&, const std::string& v) { s.sa.lhs_repetitions = positive_int(v); }},
        {"sa.sobol_samples", [](RunSettings& s, Pending&, const std::string& v) {
             s.sa.sobol_samples = positive_int(v);
             require(s.sa.sobol_samples >= 2, "must be >= 2");
         }},
        {"sa.replicates", [](RunSettings& s, Pending&, const std::string& v) { s.sa.replicates = positive_int(v); }},
        {"sa.oat_replicates", [](RunSettings& s, Pending&, const std::string& v) { s.sa.oat_replicates = positive_int(v); }},
        {"sa.oat_grid_points", [](RunSettings& s, Pending&, const std::string& v) { s.sa.oat_grid_points = positive_int(v); }},
        {"sa.sobol_bootstrap", [](RunSettings& s, Pending&, const std::string& v) {
             s.sa.sobol_bootstrap = positive_int(v);
             require(s.sa.sobol_bootstrap >= 2, "must be >= 2");
         }},
        {"sa.regression_bootstrap", [](RunSettings& s, Pending&, const std::string& v) {
             s.sa.regression_bootstrap = positive_int(v);
             require(s.sa.regression_bootstrap >= 2, "must be >= 2");
         }},
        {"sa.bounds_scale", [](RunSettings& s, Pending&, const std::string& v) {
             s.sa.bounds_scale = to_double(v);
             require(s.sa.bounds_scale > 0.0, "must be > 0");
         }},
    };
    return table;
}

[[noreturn]] void line_error(int line, const std::string& key, const std::string& what)
{
    std::ostringstream os;
    os << "config line " << line;
    if (!key.empty()) os << ", key '" << key << "'";
    os << ": " << what;
    throw ConfigError(os.str());
}

void resolve(RunSettings& s, const Pending& p, const std::filesystem::path& base_dir)
{
    auto& pop = s.model.population;
    const std::size_t n = pop.context_names.size();
    const bool default_layout = pop.context_names == PopulationSpec{}.context_names;

    if (p.matrix_file) {
        std::filesystem::path file = *p.matrix_file;
        if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
        pop.visit_matrix = read_visit_matrix(file, pop.size, static_cast<int>(n));
        pop.matrix_file = file.string();
    }

    if (p.mean_visit_probs) {
        pop.mean_visit_probs = *p.mean_visit_probs;
    } else if (pop.visit_matrix) {
        pop.mean_visit_probs = column_means(*pop.visit_matrix);
    } else {
        std::vector<double> sigma;
        if (p.target_sigma) {
            sigma = *p.target_sigma;
        } else if (default_layout) {
            sigma.assign(std::begin(baseline::kSigma), std::end(baseline::kSigma));
        } else {
            throw ConfigError("population.mean_visit_probs or population.target_sigma is required for custom contexts");
        }
        if (sigma.size() != n - 1) throw ConfigError("population.target_sigma needs one entry per non-Others context");
        std::size_t anchor = n;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (pop.context_names[i] == p.anchor_context) anchor = i;
        }
        if (anchor == n) throw ConfigError("population.anchor_context '" + p.anchor_context + "' is not a named context");
        try {
            pop.mean_visit_probs = derive_context_marginals(sigma, p.anchor_p, anchor);
        } catch (const InvalidInput& e) {
            throw ConfigError(std::string("population.anchor_p: ") + e.what());
        }
    }
    if (pop.mean_visit_probs.size() != n) throw ConfigError("population.mean_visit_probs needs one entry per context");

    if (p.sigma) {
        s.model.sigmas = *p.sigma;
    } else {
        try {
            s.model.sigmas = contact_probabilities(pop.mean_visit_probs);
        } catch (const InvalidInput& e) {
            throw ConfigError(std::string("population.mean_visit_probs: ") + e.what());
        }
    }

    if (p.beta) {
        s.model.betas = *p.beta;
    } else if (default_layout) {
        s.model.betas.assign(std::begin(baseline::kBeta), std::end(baseline::kBeta));
        s.model.betas.push_back(0.0);
    } else {
        throw ConfigError("model.beta is required for custom contexts");
    }

    s.calibration.seed = p.calibration_seed.value_or(s.seed);
    s.model.seed = s.seed;

    s.model.validate();
    s.calibration.validate();

    s.space = ParameterSpace::from_config(s.model);
    for (std::size_t j = 0; j < s.space.dimension(); ++j) s.space.bounds[j].hi = s.sa.bounds_scale * s.space.baseline[j];
    s.space.validate();
}

} // namespace

RunSettings default_settings() { return parse_config_text(""); }

RunSettings parse_config_text(std::string_view text, const std::filesystem::path& base_dir)
{
    RunSettings settings;
    settings.model.population.concentration = baseline::kConcentration;
    Pending pending;
    std::set<std::string> seen;

    std::istringstream is{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) line_error(line_no, "", "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) line_error(line_no, "", "missing key");
        if (value.empty()) line_error(line_no, key, "missing value");
        if (!seen.insert(key).second) line_error(line_no, key, "duplicate key");
        if (key.starts_with("manifest.")) continue;
        const auto it = handlers().find(key);
        if (it == handlers().end()) line_error(line_no, key, "unknown key");
        try {
            it->second(settings, pending, value);
        } catch (const std::out_of_range& e) {
            line_error(line_no, key, std::string("value out of range: ") + e.what());
        } catch (const std::invalid_argument& e) {
            line_error(line_no, key, e.what());
        }
    }
    resolve(settings, pending, base_dir);
    return settings;
}

RunSettings parse_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path.parent_path());
}

std::string format_config(const RunSettings& s)
{
    const auto& m = s.model;
    const auto& pop = m.population;
    std::ostringstream os;
    os << "seed = " << s.seed << "\n";
    os << "replicates = " << s.replicates << "\n";
    os << "model.rho = " << fmt_double(m.rho) << "\n";
    os << "model.gamma = " << fmt_double(m.gamma) << "\n";
    os << "model.horizon_ticks = " << m.horizon_ticks << "\n";
    os << "model.qs_window = " << m.qs_window.lo << ", " << m.qs_window.hi << "\n";
    os << "model.ticks_per_year = " << m.ticks_per_year << "\n";
    os << "model.sigma = " << fmt_list(m.sigmas) << "\n";
    os << "model.beta = " << fmt_list(m.betas) << "\n";
    os << "population.size = " << pop.size << "\n";
    os << "population.contexts = " << fmt_list(pop.context_names) << "\n";
    os << "population.mean_visit_probs = " << fmt_list(pop.mean_visit_probs) << "\n";
    os << "population.concentration = " << fmt_double(pop.concentration) << "\n";
    os << "population.class_year_fractions = " << fmt_list(pop.class_year_fractions) << "\n";
    os << "population.initial_drinker_fraction = " << fmt_double(pop.initial_drinker_fraction) << "\n";
    os << "population.matrix_seed = " << pop.matrix_seed << "\n";
    os << "population.resample_matrix = " << (pop.resample_matrix ? "true" : "false") << "\n";
    if (!pop.matrix_file.empty()) os << "population.matrix_file = " << pop.matrix_file << "\n";
    os << "calibration.target_prevalence = " << fmt_double(s.calibration.target_prevalence) << "\n";
    os << "calibration.beta_tilde_lo = " << fmt_double(s.calibration.beta_tilde_lo) << "\n";
    os << "calibration.beta_tilde_hi = " << fmt_double(s.calibration.beta_tilde_hi) << "\n";
    os << "calibration.replicates = " << s.calibration.replicates_per_eval << "\n";
    os << "calibration.tolerance = " << fmt_double(s.calibration.tolerance) << "\n";
    os << "calibration.max_iterations = " << s.calibration.max_iterations << "\n";
    os << "calibration.seed = " << s.calibration.seed << "\n";
    os << "sa.lhs_samples = " << s.sa.lhs_samples << "\n";
    os << "sa.lhs_repetitions = " << s.sa.lhs_repetitions << "\n";
    os << "sa.sobol_samples = " << s.sa.sobol_samples << "\n";
    os << "sa.replicates = " << s.sa.replicates << "\n";
    os << "sa.oat_replicates = " << s.sa.oat_replicates << "\n";
    os << "sa.oat_grid_points = " << s.sa.oat_grid_points << "\n";
    os << "sa.sobol_bootstrap = " << s.sa.sobol_bootstrap << "\n";
    os << "sa.regression_bootstrap = " << s.sa.regression_bootstrap << "\n";
    os << "sa.bounds_scale = " << fmt_double(s.sa.bounds_scale) << "\n";
    return os.str();
}

} // namespace campus
