#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "mlkol/harness.hpp"
#include "mlkol/schedules.hpp"
#include "mlkol/synth.hpp"

namespace mlkol {

/// Parses a config document. Type and range problems raise ConfigError
/// naming the JSON key; unknown keys are rejected the same way.
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& exp);

/// Reads and parses a config file. Syntax errors raise ConfigError with
/// field "<json>".
ExperimentConfig load_config(const std::filesystem::path& path);

/// Template with the defaults of a valid configuration.
ExperimentConfig template_config();

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

/// level,x,y,lambda,row_start,row_end
void write_schedule_csv(std::ostream& out, const LevelSchedule& sched);
nlohmann::json schedule_to_json(const LevelSchedule& sched);

/// kind,x,y
void write_contours_csv(std::ostream& out, ContourKind kind,
                        const std::vector<ContourPoint>& points, bool header);

/// estimator,n,trial,error_sq,elapsed_ms
void write_runs_csv(std::ostream& out, const RateReport& report);
/// estimator,n,median_error_sq,iqr_low,iqr_high
void write_summary_csv(std::ostream& out, const RateReport& report);
nlohmann::json report_to_json(const RateReport& report, const ExperimentPlan& plan);

/// Writes <prefix>.u.bin and <prefix>.v.bin (little-endian float64,
/// row-major) plus <prefix>.json describing dims and seed.
void write_dataset(const std::filesystem::path& prefix, const SampleSet& data);
SampleSet read_dataset(const std::filesystem::path& prefix);

}  // namespace mlkol
