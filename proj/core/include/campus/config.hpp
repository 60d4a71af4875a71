#pragma once

#include "campus/calibrate.hpp"
#include "campus/sensitivity.hpp"
#include "campus/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace campus {

struct SaSettings {
    int lhs_samples = 1000;
    int lhs_repetitions = 1;
    int sobol_samples = 1000;
    int replicates = 1;        // per global-SA design row
    int oat_replicates = 200;
    int oat_grid_points = 11;
    int sobol_bootstrap = 100;
    int regression_bootstrap = 1000;
    double bounds_scale = 2.0; // bounds are [0, scale * baseline]
};

/// Resolved settings for every subcommand.
struct RunSettings {
    ModelConfig model;
    CalibrationSpec calibration;
    ParameterSpace space;
    SaSettings sa;
    int replicates = 200;
    std::uint64_t seed = 1;
};

/// Baseline table values (Library, MU, SDFC, Dorm order).
namespace baseline {
inline constexpr double kSigma[] = {0.1429, 0.4492, 0.2043, 0.2037};
inline constexpr double kBeta[] = {0.0105, 0.0033, 0.0073, 0.0074};
inline constexpr double kRho = 0.0187;
inline constexpr double kGamma = 0.0187;
inline constexpr double kMuVisitProbability = 0.22;
inline constexpr double kConcentration = 0.2;
} // namespace baseline

/// Baseline settings, identical to parsing an empty file.
RunSettings default_settings();

/// Parse flat `key = value` text. `#` starts a comment; lists are comma
/// separated. Unknown keys, duplicates, malformed lines and out-of-range
/// values raise ConfigError naming the line and key.
RunSettings parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});

RunSettings parse_config(const std::filesystem::path& path);

/// Canonical text for `settings`; parse_config_text(format_config(s)) == s.
std::string format_config(const RunSettings& settings);

} // namespace campus
