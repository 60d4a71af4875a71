// campus_abm: command-line front end for the campus drinking-diffusion model.
//
//   campus_abm simulate   --config run.cfg --replicates 200 --out results/
//   campus_abm calibrate  --config run.cfg
//   campus_abm sa-local   --context MU
//   campus_abm sa-lhs | sa-sobol | synth-pop
//
// Exit codes: 0 success, 2 configuration error, 3 runtime or convergence error.

#include "campus/calibrate.hpp"
#include "campus/config.hpp"
#include "campus/engine.hpp"
#include "campus/error.hpp"
#include "campus/io.hpp"
#include "campus/popsynth.hpp"
#include "campus/sensitivity.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace campus;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicates;
    std::string out = ".";
    int threads = 1;
};

std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

RunSettings load_settings(const GlobalOptions& opts)
{
    RunSettings s = opts.config.empty() ? default_settings() : parse_config(opts.config);
    if (opts.seed) {
        s.seed = *opts.seed;
        s.model.seed = *opts.seed;
        s.calibration.seed = *opts.seed;
    }
    return s;
}

class Run {
public:
    Run(std::string command, const GlobalOptions& opts, RunSettings settings)
        : command_(std::move(command)), opts_(opts), settings_(std::move(settings)), started_(utc_now()),
          clock_(std::chrono::steady_clock::now())
    {
        fs::create_directories(opts_.out);
    }

    RunSettings& settings() { return settings_; }
    fs::path path(const std::string& name) const { return fs::path(opts_.out) / name; }

    void output(const std::string& name) { outputs_ += (outputs_.empty() ? "" : ", ") + name; }

    void write_manifest(const std::string& extra_key = {}, const std::string& extra_value = {})
    {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
        KeyValues meta{{"command", command_},
                       {"tool_version", CAMPUS_VERSION},
                       {"started_utc", started_},
                       {"wall_seconds", std::to_string(secs)},
                       {"threads", std::to_string(opts_.threads)},
                       {"outputs", outputs_}};
        if (!extra_key.empty()) meta[extra_key] = extra_value;
        campus::write_manifest(meta, format_config(settings_), path(command_ + "_manifest.txt"));
    }

private:
    std::string command_;
    GlobalOptions opts_;
    RunSettings settings_;
    std::string started_;
    std::chrono::steady_clock::time_point clock_;
    std::string outputs_;
};

int cmd_simulate(const GlobalOptions& opts)
{
    Run run("simulate", opts, load_settings(opts));
    auto& s = run.settings();
    if (opts.replicates) s.replicates = *opts.replicates;
    const auto runs = run_replicates(s.model, s.replicates, s.seed, opts.threads);
    const auto summary = summarize(runs, s.model.qs_window, s.seed);
    write_timeseries(runs, run.path("timeseries.csv"));
    run.output("timeseries.csv");
    write_summary(summary, run.path("summary.csv"));
    run.output("summary.csv");
    run.write_manifest();
    std::cout << std::fixed << std::setprecision(4) << "replicates " << summary.replicates << "  qs_mean "
              << summary.qs_mean << "  95% CI (" << summary.qs_ci_lo << ", " << summary.qs_ci_hi << ")  sd "
              << summary.qs_sd << '\n';
    return 0;
}

int cmd_calibrate(const GlobalOptions& opts)
{
    Run run("calibrate", opts, load_settings(opts));
    auto& s = run.settings();
    if (opts.replicates) s.calibration.replicates_per_eval = *opts.replicates;
    s.calibration.threads = opts.threads;
    try {
        const auto result = calibrate_beta(s.model, s.calibration);
        write_calibration_report(result, s.model, run.path("calibration.txt"));
        run.output("calibration.txt");
        run.write_manifest();
        std::cout << std::setprecision(6) << "beta_tilde " << result.beta_tilde << "  prevalence "
                  << result.achieved_prevalence << "  iterations " << result.iterations << '\n';
        if (result.at_boundary) {
            std::cerr << "warning: optimum at the search boundary; target not reachable within bounds\n";
        }
    } catch (const ConvergenceError& e) {
        write_calibration_report(e.best(), s.model, run.path("calibration.txt"));
        run.output("calibration.txt");
        run.write_manifest("status", "not_converged");
        throw;
    }
    return 0;
}

int cmd_sa_local(const GlobalOptions& opts, const std::string& context)
{
    Run run("sa-local", opts, load_settings(opts));
    auto& s = run.settings();
    if (opts.replicates) s.sa.oat_replicates = *opts.replicates;
    std::vector<std::size_t> dims;
    if (context == "all") {
        for (std::size_t j = 0; j < s.space.dimension(); ++j) dims.push_back(j);
    } else {
        const int j = s.space.find(context);
        if (j < 0) throw ConfigError("unknown context '" + context + "' for --context");
        dims.push_back(static_cast<std::size_t>(j));
    }
    for (std::size_t j : dims) {
        const auto sweep = oat_sweep(s.space, j, s.sa.oat_grid_points, s.model, s.sa.oat_replicates, s.seed, opts.threads);
        const std::string name = "oat_" + s.space.names[j] + ".csv";
        write_oat_csv(s.space.names[j], sweep, run.path(name));
        run.output(name);
        std::cout << s.space.names[j] << ":";
        for (const auto& p : sweep) std::cout << ' ' << std::fixed << std::setprecision(3) << p.mean;
        std::cout << '\n';
    }
    run.write_manifest("context", context);
    return 0;
}

void print_indices(const std::vector<IndexEstimate>& indices)
{
    for (const auto& e : indices) {
        std::cout << std::left << std::setw(10) << e.parameter << std::setw(4) << e.method << std::right << std::fixed
                  << std::setprecision(3) << std::setw(8) << e.estimate << "  [" << e.ci_lo << ", " << e.ci_hi << "]\n";
    }
}

int cmd_sa_lhs(const GlobalOptions& opts)
{
    Run run("sa-lhs", opts, load_settings(opts));
    auto& s = run.settings();
    if (opts.replicates) s.sa.replicates = *opts.replicates;
    const auto result = run_lhs_experiment(s.space, s.model, s.sa.lhs_samples, s.sa.replicates, s.sa.lhs_repetitions,
                                           {s.sa.regression_bootstrap, 0.95}, s.seed, opts.threads);
    write_design_csv(s.space, result.design, result.qoi, run.path("lhs_design.csv"));
    run.output("lhs_design.csv");
    write_indices_csv(result.indices, run.path("lhs_indices.csv"));
    run.output("lhs_indices.csv");
    run.write_manifest();
    print_indices(result.indices);
    return 0;
}

int cmd_sa_sobol(const GlobalOptions& opts)
{
    Run run("sa-sobol", opts, load_settings(opts));
    auto& s = run.settings();
    if (opts.replicates) s.sa.replicates = *opts.replicates;
    const auto result = run_sobol_experiment(s.space, s.model, s.sa.sobol_samples, s.sa.replicates,
                                             {s.sa.sobol_bootstrap, 0.95}, s.seed, opts.threads);
    write_design_csv(s.space, result.design, result.qoi, run.path("sobol_design.csv"));
    run.output("sobol_design.csv");
    write_indices_csv(result.indices, run.path("sobol_indices.csv"));
    run.output("sobol_indices.csv");
    run.write_manifest();
    print_indices(result.indices);
    return 0;
}

int cmd_synth_pop(const GlobalOptions& opts)
{
    Run run("synth-pop", opts, load_settings(opts));
    const auto matrix = resolve_visit_matrix(run.settings().model.population);
    write_visit_matrix(matrix, run.path("visit_matrix.txt"));
    run.output("visit_matrix.txt");
    run.write_manifest();
    const auto means = column_means(matrix);
    std::cout << "rows " << matrix.size() << "  column means";
    for (double m : means) std::cout << ' ' << std::fixed << std::setprecision(4) << m;
    std::cout << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Agent-based model of context-driven drinking diffusion on a campus"};
    app.set_version_flag("--version", CAMPUS_VERSION);
    app.require_subcommand(1);

    GlobalOptions opts;
    std::uint64_t seed = 0;
    int replicates = 0;
    app.add_option("--config", opts.config, "key = value configuration file")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "base seed (overrides config)");
    auto* rep_opt = app.add_option("--replicates", replicates, "replicates per evaluation (overrides config)")
                        ->check(CLI::PositiveNumber);
    app.add_option("--out", opts.out, "output directory")->capture_default_str();
    app.add_option("--threads", opts.threads, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "run an ensemble and write time series");
    auto* calibrate = app.add_subcommand("calibrate", "fit the common transmission probability");
    auto* sa_local = app.add_subcommand("sa-local", "one-at-a-time sweep of a context transmission probability");
    std::string context = "MU";
    sa_local->add_option("--context", context, "context name or 'all'")->capture_default_str();
    auto* sa_lhs = app.add_subcommand("sa-lhs", "Latin hypercube design with PCC/SRC indices");
    auto* sa_sobol = app.add_subcommand("sa-sobol", "Sobol first- and total-order indices");
    auto* synth_pop = app.add_subcommand("synth-pop", "write the synthesized visit-probability matrix");
    for (auto* sub : {simulate, calibrate, sa_local, sa_lhs, sa_sobol, synth_pop}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    if (*seed_opt) opts.seed = seed;
    if (*rep_opt) opts.replicates = replicates;

    try {
        if (*simulate) return cmd_simulate(opts);
        if (*calibrate) return cmd_calibrate(opts);
        if (*sa_local) return cmd_sa_local(opts, context);
        if (*sa_lhs) return cmd_sa_lhs(opts);
        if (*sa_sobol) return cmd_sa_sobol(opts);
        if (*synth_pop) return cmd_synth_pop(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
