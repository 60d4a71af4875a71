#include "properties.hpp"

#include "stats.hpp"

#include "campus/config.hpp"
#include "campus/engine.hpp"
#include "campus/io.hpp"
#include "campus/kernels.hpp"
#include "campus/popsynth.hpp"
#include "campus/rng.hpp"
#include "campus/sensitivity.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

namespace campus::testing {

namespace {

PropertyResult make(std::string name, bool ok, const std::string& detail)
{
    return PropertyResult{std::move(name), ok, detail};
}

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Every agent shares one visit distribution; contexts come from `config`.
SimState uniform_state(const ModelConfig& config, int agents, std::span<const double> probs)
{
    SimState s;
    s.contexts = make_contexts(config);
    s.agents.resize(static_cast<std::size_t>(agents));
    for (int i = 0; i < agents; ++i) {
        auto& a = s.agents[static_cast<std::size_t>(i)];
        a.id = i;
        a.visit_probs.assign(probs.begin(), probs.end());
    }
    s.clear_newly_converted();
    return s;
}

} // namespace

ModelConfig short_year_config()
{
    ModelConfig config = default_settings().model;
    config.ticks_per_year = 40;
    config.horizon_ticks = 200;
    config.qs_window = {50, 100};
    return config;
}

PropertyResult check_conservation(const ModelConfig& config, std::uint64_t seed)
{
    RngStream rng(seed);
    SimState state = initialize_state(config, rng);
    const int n = config.population_size();
    for (int t = 0; t <= config.horizon_ticks; ++t) {
        const auto counts = state.state_counts();
        const int total = counts[0] + counts[1] + counts[2];
        int located = 0;
        for (const auto& c : state.contexts) located += c.drinker_count;
        if (total != n || located != counts[1]) {
            std::ostringstream os;
            os << "tick " << state.tick << ": total " << total << " (expected " << n << "), drinkers by context "
               << located << " vs " << counts[1];
            return make("population conservation", false, os.str());
        }
        if (t < config.horizon_ticks) step(state, config, rng);
    }
    std::ostringstream os;
    os << n << " agents over " << config.horizon_ticks << " ticks";
    return make("population conservation", true, os.str());
}

PropertyResult check_state_legality(const ModelConfig& config, std::uint64_t seed)
{
    RngStream rng(seed);
    SimState state = initialize_state(config, rng);
    long transitions = 0;
    long replacements = 0;
    for (int t = 0; t < config.horizon_ticks; ++t) {
        std::vector<DrinkingState> before;
        before.reserve(state.agents.size());
        for (const auto& a : state.agents) before.push_back(a.state);
        step(state, config, rng);
        const bool year_boundary = state.tick % config.ticks_per_year == 0;
        for (std::size_t i = 0; i < state.agents.size(); ++i) {
            const auto& a = state.agents[i];
            const DrinkingState from = before[i];
            const DrinkingState to = a.state;
            if (from != to) ++transitions;
            bool ok = is_legal_transition(from, to);
            if (!ok && to == DrinkingState::ND && year_boundary && a.class_year == 0) {
                ok = true;
                ++replacements;
            }
            const bool period_ok = a.state == DrinkingState::D
                                       ? (a.drinking_period == kUnassignedPeriod || a.drinking_period >= 0.0)
                                       : a.drinking_period == 0.0;
            if (!ok || !period_ok) {
                std::ostringstream os;
                os << "tick " << state.tick << " agent " << a.id << ": " << to_string(from) << " -> "
                   << to_string(to) << " period " << a.drinking_period;
                return make("state-machine legality", false, os.str());
            }
        }
    }
    std::ostringstream os;
    os << transitions << " transitions, " << replacements << " class-year replacements";
    return make("state-machine legality", true, os.str());
}

PropertyResult check_determinism(const ModelConfig& config, std::uint64_t seed)
{
    const auto dir = std::filesystem::temp_directory_path() / ("campus_det_" + std::to_string(seed));
    std::filesystem::create_directories(dir);
    const auto a = run_replicate(config, seed);
    const auto b = run_replicate(config, seed);
    write_timeseries(a, dir / "a.csv");
    write_timeseries(b, dir / "b.csv");
    const bool bytes_equal = slurp(dir / "a.csv") == slurp(dir / "b.csv");

    const auto serial = run_replicates(config, 6, seed, 1);
    const auto threaded = run_replicates(config, 6, seed, 3);
    write_timeseries(std::span<const TimeSeries>(serial), dir / "serial.csv");
    write_timeseries(std::span<const TimeSeries>(threaded), dir / "threaded.csv");
    const bool schedule_free = slurp(dir / "serial.csv") == slurp(dir / "threaded.csv");
    const bool differs = run_replicate(config, seed + 1) != a;
    std::filesystem::remove_all(dir);

    std::ostringstream os;
    os << "rerun bytes " << (bytes_equal ? "identical" : "DIFFER") << ", threaded ensemble "
       << (schedule_free ? "identical" : "DIFFERS") << ", next seed " << (differs ? "differs" : "IDENTICAL");
    return make("seed determinism", a == b && bytes_equal && schedule_free && differs, os.str());
}

PropertyResult check_movement_marginals(std::uint64_t seed, int draws)
{
    const std::array<double, 5> probs{0.14, 0.06, 0.41, 0.24, 0.15};
    const ModelConfig config = default_settings().model;
    constexpr int kAgents = 1000;
    SimState state = uniform_state(config, kAgents, probs);
    RngStream rng(seed);
    std::vector<double> counts(probs.size(), 0.0);
    const int rounds = std::max(1, draws / kAgents);
    for (int r = 0; r < rounds; ++r) {
        movement_phase(state, rng);
        for (const auto& a : state.agents) counts[static_cast<std::size_t>(a.current_context)] += 1.0;
    }
    const double total = static_cast<double>(rounds) * kAgents;
    std::vector<double> expected;
    for (double p : probs) expected.push_back(p * total);
    const double p = chi_square_p(counts, expected);
    std::ostringstream os;
    os << "chi-square p = " << p << " over " << static_cast<long>(total) << " moves";
    return make("movement marginals", p > 0.01, os.str());
}

PropertyResult check_recovery_durations(double gamma, std::uint64_t seed, int agents)
{
    const ModelConfig config = default_settings().model;
    const std::array<double, 5> probs{0.2, 0.2, 0.2, 0.2, 0.2};
    SimState state = uniform_state(config, agents, probs);
    for (auto& a : state.agents) {
        a.state = DrinkingState::D;
        a.drinking_period = kUnassignedPeriod;
    }
    RngStream rng(seed);
    recovery_phase(state, gamma, rng);

    // max(1, Exp(gamma)): an atom at 1 and, by memorylessness, an exact
    // Exp(gamma) excess above it.
    std::vector<double> excess;
    long at_one = 0;
    for (const auto& a : state.agents) {
        if (a.drinking_period < 1.0) {
            return make("recovery durations", false, "assigned period below one tick");
        }
        if (a.drinking_period == 1.0) {
            ++at_one;
        } else {
            excess.push_back(a.drinking_period - 1.0);
        }
    }
    const double ks = ks_p(excess, [gamma](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-gamma * x); });
    const double p_atom = -std::expm1(-gamma);
    const double n = agents;
    const double z = (at_one - n * p_atom) / std::sqrt(n * p_atom * (1.0 - p_atom));
    const double atom_p = std::erfc(std::abs(z) / std::sqrt(2.0));
    std::ostringstream os;
    os << "KS p = " << ks << ", atom-at-1 p = " << atom_p << " (" << at_one << "/" << agents << ")";
    return make("recovery durations", ks > 0.01 && atom_p > 0.01, os.str());
}

PropertyResult check_contact_round_trip(std::uint64_t seed, int trials)
{
    RngStream rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const std::size_t k = 2 + rng.index(6);
        std::vector<double> sigma(k);
        double sum = 0.0;
        for (auto& s : sigma) {
            s = rng.gamma(1.0) + 1e-3;
            sum += s;
        }
        double sq = 0.0;
        for (auto& s : sigma) {
            s /= sum;
            sq += s * s;
        }
        const std::size_t anchor = rng.index(k);
        const double bound = sigma[anchor] * sigma[anchor] / sq;
        const double anchor_p = bound * (0.05 + 0.95 * rng.uniform());
        const auto p = derive_context_marginals(sigma, anchor_p, anchor);
        const auto back = contact_probabilities(p);
        for (std::size_t i = 0; i < k; ++i) worst = std::max(worst, std::abs(back[i] - sigma[i]));
        worst = std::max(worst, std::abs(back[k]));
    }
    std::ostringstream os;
    os << "max |sigma' - sigma| = " << worst << " over " << trials << " random vectors";
    return make("contact-probability round trip", worst <= 1e-6, os.str());
}

PropertyResult check_lhs_stratification(std::uint64_t seed, int n, int k)
{
    ParameterSpace space;
    for (int j = 0; j < k; ++j) {
        space.names.push_back("x" + std::to_string(j));
        space.context_index.push_back(j);
        space.bounds.push_back({-1.0 + j, 2.0 + 3.0 * j});
        space.baseline.push_back(0.5 + j);
    }
    RngStream rng(seed);
    const Matrix design = lhs_sample(space, n, rng);
    for (int j = 0; j < k; ++j) {
        std::vector<int> hits(static_cast<std::size_t>(n), 0);
        const auto& b = space.bounds[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i) {
            const double x = design(i, j);
            if (x < b.lo || x >= b.hi) return make("LHS stratification", false, "value outside bounds");
            const auto bin = static_cast<std::size_t>(std::floor((x - b.lo) / b.width() * n));
            ++hits[std::min(bin, hits.size() - 1)];
        }
        for (int h : hits) {
            if (h != 1) {
                return make("LHS stratification", false, "column " + std::to_string(j) + " has a bin hit " +
                                                             std::to_string(h) + " times");
            }
        }
    }
    std::ostringstream os;
    os << n << " x " << k << " design, every stratum hit exactly once";
    return make("LHS stratification", true, os.str());
}

PropertyResult check_pairwise_transmission(double beta_tilde, int drinkers, std::uint64_t seed, int trials,
                                           int targets)
{
    ModelConfig config = default_settings().model;
    config.population.context_names = {"Room", "Others"};
    config.sigmas = {beta_tilde, 0.0};
    config.betas = {1.0, 0.0};
    const std::array<double, 2> probs{1.0, 0.0};
    SimState state = uniform_state(config, drinkers + targets, probs);
    RngStream rng(seed);
    long converted = 0;
    for (int t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < state.agents.size(); ++i) {
            state.agents[i].current_context = 0;
            state.agents[i].state = static_cast<int>(i) < drinkers ? DrinkingState::D : DrinkingState::ND;
        }
        state.clear_newly_converted();
        transmission_phase(state, rng);
        for (std::size_t i = static_cast<std::size_t>(drinkers); i < state.agents.size(); ++i) {
            if (state.agents[i].state == DrinkingState::D) ++converted;
        }
    }
    const double observed = static_cast<double>(converted) / (static_cast<double>(trials) * targets);
    const double linear = drinkers * beta_tilde / 2.0;
    const double rel = std::abs(observed - linear) / linear;
    std::ostringstream os;
    os << "k = " << drinkers << ", s = " << beta_tilde << ": observed " << observed << " vs k*s/2 = " << linear
       << " (rel. error " << rel << ")";
    return make("pairwise transmission marginal", rel < 0.02, os.str());
}

std::vector<PropertyResult> run_all_properties(std::uint64_t seed)
{
    const ModelConfig config = short_year_config();
    const ModelConfig baseline = default_settings().model;
    return {
        check_conservation(config, seed),
        check_state_legality(config, seed + 1),
        check_determinism(baseline, seed + 2),
        check_movement_marginals(seed + 3),
        check_recovery_durations(baseline.gamma, seed + 4),
        check_contact_round_trip(seed + 5),
        check_lhs_stratification(seed + 6),
        check_pairwise_transmission(0.005, 1, seed + 7),
        check_pairwise_transmission(0.005, 4, seed + 8),
    };
}

} // namespace campus::testing
