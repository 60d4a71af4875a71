#pragma once

#include "campus/rng.hpp"
#include "campus/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace campus {

struct SimState {
    int tick = 0;
    std::vector<Agent> agents;
    std::vector<Context> contexts;
    /// Agents converted to D during the current tick (the NC set).
    std::vector<char> newly_converted;

    std::vector<int> state_counts() const; // {ND, D, FD}
    void clear_newly_converted();
    bool is_newly_converted(int id) const { return newly_converted[static_cast<std::size_t>(id)] != 0; }
    void mark_newly_converted(int id) { newly_converted[static_cast<std::size_t>(id)] = 1; }
    void recount_drinkers();
};

struct TickRecord {
    int tick = 0;
    int n_nd = 0;
    int n_d = 0;
    int n_fd = 0;
    std::vector<int> context_drinkers;

    bool operator==(const TickRecord&) const = default;
};

struct TimeSeries {
    std::vector<std::string> context_names;
    std::vector<TickRecord> records;

    int population() const;
    /// Drinker fraction averaged over records whose tick falls in the window.
    double window_mean_drinker_fraction(TickWindow window) const;

    bool operator==(const TimeSeries&) const = default;
};

struct EnsembleSummary {
    std::vector<std::string> context_names;
    int replicates = 0;
    std::uint64_t base_seed = 0;
    std::vector<int> ticks;
    // per tick, across replicates
    std::vector<double> mean_nd, mean_d, mean_fd;
    std::vector<double> sd_nd, sd_d, sd_fd;
    /// Per-replicate quasi-stationary drinker fraction.
    std::vector<double> replicate_qs;
    double qs_mean = 0.0;
    double qs_sd = 0.0;
    double qs_ci_lo = 0.0;
    double qs_ci_hi = 0.0;
};

/// Smallest m with cumulative visit probability >= u (lower bound strict,
/// upper bound inclusive). Falls back to the last context on round-off.
int sample_context(std::span<const double> visit_probs, double u);

std::vector<Context> make_contexts(const ModelConfig& config);

void movement_phase(SimState& state, RngStream& rng);
void transmission_phase(SimState& state, RngStream& rng);
void recovery_phase(SimState& state, double gamma, RngStream& rng);
void reinitiation_phase(SimState& state, double rho, RngStream& rng);
void class_year_phase(SimState& state);

/// One tick: clear NC, movement, transmission, recovery, reinitiation, then
/// class-year update if the completed tick is a multiple of ticks_per_year.
void step(SimState& state, const ModelConfig& config, RngStream& rng);

/// Build the initial state (population, contexts, initial placement).
SimState initialize_state(const ModelConfig& config, RngStream& rng);

TimeSeries run_replicate(const ModelConfig& config, std::uint64_t seed);

/// Replicate i uses seed base_seed + i. `threads` only changes the schedule.
std::vector<TimeSeries> run_replicates(const ModelConfig& config, int replicates,
                                       std::uint64_t base_seed, int threads = 1);

EnsembleSummary summarize(std::span<const TimeSeries> runs, TickWindow qs_window,
                          std::uint64_t base_seed = 0);

EnsembleSummary run_ensemble(const ModelConfig& config, int replicates, std::uint64_t base_seed,
                             int threads = 1);

/// Run `count` independent jobs over at most `threads` workers.
/// job(i) must only touch slot i of any shared output.
template <typename Job>
void parallel_for(int count, int threads, Job&& job);

} // namespace campus

#include "campus/detail/parallel.hpp"
