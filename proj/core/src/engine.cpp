#include "campus/engine.hpp"

#include "campus/error.hpp"
#include "campus/popsynth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace campus {

namespace {

std::vector<int> shuffled_ids(std::size_t n, RngStream& rng)
{
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<int>(order));
    return order;
}

TickRecord snapshot(const SimState& state)
{
    TickRecord rec;
    rec.tick = state.tick;
    const auto counts = state.state_counts();
    rec.n_nd = counts[0];
    rec.n_d = counts[1];
    rec.n_fd = counts[2];
    rec.context_drinkers.reserve(state.contexts.size());
    for (const auto& c : state.contexts) rec.context_drinkers.push_back(c.drinker_count);
    return rec;
}

double mean_of(std::span<const double> xs)
{
    return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sd_of(std::span<const double> xs, double mean)
{
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

} // namespace

std::vector<int> SimState::state_counts() const
{
    std::vector<int> counts(3, 0);
    for (const auto& a : agents) ++counts[static_cast<std::size_t>(a.state)];
    return counts;
}

void SimState::clear_newly_converted()
{
    newly_converted.assign(agents.size(), 0);
}

void SimState::recount_drinkers()
{
    for (auto& c : contexts) c.drinker_count = 0;
    for (const auto& a : agents) {
        if (a.state == DrinkingState::D) ++contexts[static_cast<std::size_t>(a.current_context)].drinker_count;
    }
}

int TimeSeries::population() const
{
    if (records.empty()) return 0;
    const auto& r = records.front();
    return r.n_nd + r.n_d + r.n_fd;
}

double TimeSeries::window_mean_drinker_fraction(TickWindow window) const
{
    double sum = 0.0;
    int count = 0;
    for (const auto& r : records) {
        if (r.tick < window.lo || r.tick > window.hi) continue;
        const int n = r.n_nd + r.n_d + r.n_fd;
        sum += static_cast<double>(r.n_d) / static_cast<double>(n);
        ++count;
    }
    return count == 0 ? 0.0 : sum / count;
}

int sample_context(std::span<const double> visit_probs, double u)
{
    double cumulative = 0.0;
    const int n = static_cast<int>(visit_probs.size());
    for (int m = 0; m < n; ++m) {
        cumulative += visit_probs[static_cast<std::size_t>(m)];
        if (u <= cumulative && visit_probs[static_cast<std::size_t>(m)] > 0.0) return m;
    }
    // round-off: fall back to the last context with positive mass
    for (int m = n - 1; m >= 0; --m) {
        if (visit_probs[static_cast<std::size_t>(m)] > 0.0) return m;
    }
    return n - 1;
}

std::vector<Context> make_contexts(const ModelConfig& config)
{
    std::vector<Context> contexts;
    const int n = config.context_count();
    contexts.reserve(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        const auto i = static_cast<std::size_t>(c);
        contexts.push_back(Context{c, config.population.context_names[i], config.sigmas[i], config.betas[i], 0});
    }
    return contexts;
}

void movement_phase(SimState& state, RngStream& rng)
{
    for (int id : shuffled_ids(state.agents.size(), rng)) {
        auto& agent = state.agents[static_cast<std::size_t>(id)];
        agent.current_context = sample_context(agent.visit_probs, rng.uniform());
    }
    state.recount_drinkers();
}

void transmission_phase(SimState& state, RngStream& rng)
{
    const auto order = shuffled_ids(state.agents.size(), rng);

    // Co-located members per context, in this phase's random order.
    std::vector<std::vector<int>> members(state.contexts.size());
    std::vector<int> drinkers;
    for (int id : order) {
        const auto& a = state.agents[static_cast<std::size_t>(id)];
        members[static_cast<std::size_t>(a.current_context)].push_back(id);
        if (a.state == DrinkingState::D) drinkers.push_back(id);
    }

    // Drinkers are frozen at tick start: anyone converted below is in NC and
    // is neither a target again nor a source this tick.
    for (int source : drinkers) {
        const auto c = static_cast<std::size_t>(state.agents[static_cast<std::size_t>(source)].current_context);
        const double s = state.contexts[c].beta_tilde();
        if (s <= 0.0) continue;
        for (int target : members[c]) {
            auto& t = state.agents[static_cast<std::size_t>(target)];
            if (t.state == DrinkingState::D || state.is_newly_converted(target)) continue;
            const double u1 = rng.uniform();
            const double u2 = rng.uniform(); // 1 - resistancy
            if (u1 < s * u2) {
                t.state = DrinkingState::D;
                t.drinking_period = kUnassignedPeriod;
                state.mark_newly_converted(target);
            }
        }
    }
}

void recovery_phase(SimState& state, double gamma, RngStream& rng)
{
    constexpr double kTick = 1.0;
    for (int id : shuffled_ids(state.agents.size(), rng)) {
        auto& a = state.agents[static_cast<std::size_t>(id)];
        if (a.state != DrinkingState::D || state.is_newly_converted(id)) continue;
        if (a.drinking_period == kUnassignedPeriod) {
            a.drinking_period = std::max(kTick, rng.exponential(gamma));
        } else if (a.drinking_period > 0.0) {
            a.drinking_period = std::max(0.0, a.drinking_period - kTick);
        } else {
            a.state = DrinkingState::FD;
            a.drinking_period = 0.0;
        }
    }
}

void reinitiation_phase(SimState& state, double rho, RngStream& rng)
{
    for (int id : shuffled_ids(state.agents.size(), rng)) {
        auto& a = state.agents[static_cast<std::size_t>(id)];
        if (a.state != DrinkingState::FD || state.is_newly_converted(id)) continue;
        if (rng.uniform() < rho) {
            a.state = DrinkingState::D;
            a.drinking_period = kUnassignedPeriod;
            state.mark_newly_converted(id);
        }
    }
}

void class_year_phase(SimState& state)
{
    for (auto& a : state.agents) {
        if (++a.class_year >= kClassYears) {
            // graduate leaves, a non-drinking freshman takes the same slot
            a.class_year = 0;
            a.state = DrinkingState::ND;
            a.drinking_period = 0.0;
        }
    }
}

void step(SimState& state, const ModelConfig& config, RngStream& rng)
{
    state.clear_newly_converted();
    movement_phase(state, rng);
    transmission_phase(state, rng);
    recovery_phase(state, config.gamma, rng);
    reinitiation_phase(state, config.rho, rng);
    ++state.tick;
    if (state.tick % config.ticks_per_year == 0) class_year_phase(state);
    state.recount_drinkers();
}

SimState initialize_state(const ModelConfig& config, RngStream& rng)
{
    const auto& spec = config.population;
    const VisitMatrix matrix = spec.resample_matrix && !spec.visit_matrix
                                   ? synthesize_visit_matrix(spec, rng)
                                   : resolve_visit_matrix(spec);
    SimState state;
    state.agents = initialize_population(spec, matrix, rng);
    state.contexts = make_contexts(config);
    state.clear_newly_converted();
    for (auto& a : state.agents) a.current_context = sample_context(a.visit_probs, rng.uniform());
    state.recount_drinkers();
    return state;
}

TimeSeries run_replicate(const ModelConfig& config, std::uint64_t seed)
{
    config.validate();
    RngStream rng(seed);
    SimState state = initialize_state(config, rng);
    TimeSeries series;
    series.context_names = config.population.context_names;
    series.records.reserve(static_cast<std::size_t>(config.horizon_ticks) + 1);
    series.records.push_back(snapshot(state));
    for (int t = 0; t < config.horizon_ticks; ++t) {
        step(state, config, rng);
        series.records.push_back(snapshot(state));
    }
    return series;
}

std::vector<TimeSeries> run_replicates(const ModelConfig& config, int replicates, std::uint64_t base_seed,
                                       int threads)
{
    if (replicates < 1) throw InvalidInput("run_replicates: replicates must be >= 1");
    config.validate();
    std::vector<TimeSeries> runs(static_cast<std::size_t>(replicates));
    parallel_for(replicates, threads, [&](int i) {
        runs[static_cast<std::size_t>(i)] = run_replicate(config, base_seed + static_cast<std::uint64_t>(i));
    });
    return runs;
}

EnsembleSummary summarize(std::span<const TimeSeries> runs, TickWindow qs_window, std::uint64_t base_seed)
{
    if (runs.empty()) throw InvalidInput("summarize: no replicates");
    EnsembleSummary s;
    s.context_names = runs.front().context_names;
    s.replicates = static_cast<int>(runs.size());
    s.base_seed = base_seed;
    const std::size_t ticks = runs.front().records.size();
    for (const auto& r : runs) {
        if (r.records.size() != ticks) throw InvalidInput("summarize: replicates differ in length");
    }
    std::vector<double> nd(runs.size()), d(runs.size()), fd(runs.size());
    for (std::size_t t = 0; t < ticks; ++t) {
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& rec = runs[i].records[t];
            const double n = static_cast<double>(rec.n_nd + rec.n_d + rec.n_fd);
            nd[i] = rec.n_nd / n;
            d[i] = rec.n_d / n;
            fd[i] = rec.n_fd / n;
        }
        s.ticks.push_back(runs.front().records[t].tick);
        s.mean_nd.push_back(mean_of(nd));
        s.mean_d.push_back(mean_of(d));
        s.mean_fd.push_back(mean_of(fd));
        s.sd_nd.push_back(sd_of(nd, s.mean_nd.back()));
        s.sd_d.push_back(sd_of(d, s.mean_d.back()));
        s.sd_fd.push_back(sd_of(fd, s.mean_fd.back()));
    }
    for (const auto& r : runs) s.replicate_qs.push_back(r.window_mean_drinker_fraction(qs_window));
    s.qs_mean = mean_of(s.replicate_qs);
    s.qs_sd = sd_of(s.replicate_qs, s.qs_mean);
    const double half = 1.96 * s.qs_sd / std::sqrt(static_cast<double>(runs.size()));
    s.qs_ci_lo = s.qs_mean - half;
    s.qs_ci_hi = s.qs_mean + half;
    return s;
}

EnsembleSummary run_ensemble(const ModelConfig& config, int replicates, std::uint64_t base_seed, int threads)
{
    const auto runs = run_replicates(config, replicates, base_seed, threads);
    return summarize(runs, config.qs_window, base_seed);
}

} // namespace campus
