#pragma once

#include "campus/calibrate.hpp"
#include "campus/engine.hpp"
#include "campus/popsynth.hpp"
#include "campus/sensitivity.hpp"

#include <filesystem>
#include <map>
#include <span>
#include <string>

namespace campus {

std::string timeseries_header(std::span<const std::string> context_names, bool with_replicate);

void write_timeseries(const TimeSeries& series, const std::filesystem::path& path);
/// Replicates stacked with a leading `replicate` column.
void write_timeseries(std::span<const TimeSeries> runs, const std::filesystem::path& path);
TimeSeries read_timeseries(const std::filesystem::path& path);

/// Per-tick mean and sd of state fractions (6 decimals).
void write_summary(const EnsembleSummary& summary, const std::filesystem::path& path);

/// One row per agent, whitespace-separated reals.
void write_visit_matrix(const VisitMatrix& matrix, const std::filesystem::path& path);
/// Throws IoError on unreadable files and ConfigError on malformed rows,
/// rows not summing to 1, or a row count different from expected_rows (> 0).
VisitMatrix read_visit_matrix(const std::filesystem::path& path, int expected_rows = 0,
                              int expected_cols = 0);

void write_calibration_report(const CalibrationResult& result, const ModelConfig& config,
                              const std::filesystem::path& path);

void write_design_csv(const ParameterSpace& space, const Matrix& design, const Vector& qoi,
                      const std::filesystem::path& path);
void write_indices_csv(std::span<const IndexEstimate> indices, const std::filesystem::path& path);
void write_oat_csv(const std::string& parameter, std::span<const OatPoint> sweep,
                   const std::filesystem::path& path);

using KeyValues = std::map<std::string, std::string>;

/// key = value file; metadata keys are prefixed `manifest.`.
void write_manifest(const KeyValues& metadata, const std::string& config_text,
                    const std::filesystem::path& path);
KeyValues read_key_values(const std::filesystem::path& path);

} // namespace campus
