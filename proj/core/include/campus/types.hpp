#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace campus {

enum class DrinkingState : std::uint8_t { ND, D, FD };

const char* to_string(DrinkingState s);

/// Legal single-tick transitions: identity, ND->D, D->FD, FD->D.
/// D/FD->ND only happens through class-year replacement and is not covered here.
constexpr bool is_legal_transition(DrinkingState from, DrinkingState to)
{
    if (from == to) return true;
    return (from == DrinkingState::ND && to == DrinkingState::D) ||
           (from == DrinkingState::D && to == DrinkingState::FD) ||
           (from == DrinkingState::FD && to == DrinkingState::D);
}

inline constexpr int kClassYears = 5;
inline constexpr double kUnassignedPeriod = -1.0;

struct Agent {
    int id = 0;
    int class_year = 0; // 0 freshman ... 4 graduate
    std::vector<double> visit_probs;
    int current_context = 0;
    DrinkingState state = DrinkingState::ND;
    /// Ticks of drinking left; kUnassignedPeriod until the first recovery-phase
    /// visit after conversion. Zero whenever state != D.
    double drinking_period = 0.0;
};

struct Context {
    int id = 0;
    std::string name;
    double sigma = 0.0; // contact probability
    double beta = 0.0;  // influence success per contact
    int drinker_count = 0;

    double beta_tilde() const { return sigma * beta; }
};

struct TickWindow {
    int lo = 50;
    int hi = 100;
};

/// Everything needed to synthesize a population.
struct PopulationSpec {
    int size = 538;
    std::vector<std::string> context_names{"Library", "MU", "SDFC", "Dorm", "Others"};
    std::vector<double> mean_visit_probs;
    double concentration = 0.2; // Dirichlet kappa
    std::array<double, kClassYears> class_year_fractions{0.30, 0.25, 0.23, 0.18, 0.04};
    double initial_drinker_fraction = 0.05;
    /// Seed for the single shared visit matrix. Ignored when visit_matrix is set.
    std::uint64_t matrix_seed = 538;
    /// Redraw the visit matrix from each replicate's stream instead of sharing one.
    bool resample_matrix = false;
    /// Explicit N x n matrix (e.g. read from a file); overrides synthesis.
    std::optional<std::vector<std::vector<double>>> visit_matrix;
    /// Where visit_matrix was read from, for config snapshots.
    std::string matrix_file;

    int context_count() const { return static_cast<int>(context_names.size()); }
};

struct ModelConfig {
    PopulationSpec population;

    double tick_hours = 2.0;
    int ticks_per_day = 8;
    int ticks_per_year = 1440;

    double rho = 0.0187;
    double gamma = 0.0187;
    std::vector<double> sigmas; // one per context; last must be 0
    std::vector<double> betas;  // one per context

    int horizon_ticks = 100;
    TickWindow qs_window;
    std::uint64_t seed = 1;

    int population_size() const { return population.size; }
    int context_count() const { return population.context_count(); }

    /// Throws ConfigError describing the first violated constraint.
    void validate() const;
};

} // namespace campus
