#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vpme/experiments.hpp"
#include "vpme/simulate.hpp"

namespace vpme {

/// One row per (sweep value, seed, snapshot time).
inline constexpr std::array<std::string_view, 9> kConvergenceColumns{
    "experiment", "sweep_value", "seed", "time", "distance", "sup_distance", "aux", "complete", "note"};

/// One row per (dimension, N, x) grid point of the tail comparison.
inline constexpr std::array<std::string_view, 9> kTailColumns{
    "dim", "n", "x", "empirical", "std_error", "a", "b", "bound", "dominated"};

/// One row per snapshot of a single simulation.
inline constexpr std::array<std::string_view, 9> kSimulationColumns{
    "time", "kinetic", "field", "thermal", "total", "relative_drift", "support_radius", "max_density",
    "newton_iters"};

/// One row per epsilon of the manufactured Poisson check.
inline constexpr std::array<std::string_view, 6> kPoissonColumns{
    "epsilon", "max_error", "neutrality_error", "full_residual", "hat_residual", "newton_iters"};

/// Shortest round-trip decimal text of a double; "nan" and "inf" spelled out.
std::string format_double(double v);

/// Comma-separated header line, newline terminated.
std::string csv_header(const std::string_view* begin, std::size_t count);
template <std::size_t N>
std::string csv_header(const std::array<std::string_view, N>& cols) {
  return csv_header(cols.data(), N);
}

/// Number of fields on one CSV line; quoted fields may contain commas.
std::size_t csv_field_count(std::string_view line);

std::string convergence_csv(const ConvergenceTable& t);
std::string tail_csv(const TailTable& t);
std::string simulation_csv(const RunRecord& r);

std::string poisson_csv(const std::vector<PoissonCheckRow>& rows);

/// Metadata written next to every results.csv. Everything here is a function
/// of (config, seeds, results); wall-clock timings go to timing.json instead.
struct ReportMeta {
  std::string experiment;
  std::string config_hash;  ///< 16 hex digits
  std::string config;       ///< canonical configuration text
  std::string code_version;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::string, double>> tolerances;
  bool override_regime = false;
  std::vector<std::string> regime_notes;
  std::vector<std::string> columns;
  std::string summary;  ///< compact JSON object
};

std::string hex_hash(std::uint64_t h);
std::string code_version();

ReportMeta make_meta(const ExperimentConfig& cfg, const ConvergenceTable& t);
ReportMeta make_meta(const ExperimentConfig& cfg, const TailTable& t);
ReportMeta make_meta(const SimulationConfig& cfg, const RunRecord& r);

std::string to_json(const ReportMeta& m);
/// Throws IoError on malformed input.
ReportMeta parse_meta(const std::string& text);
ReportMeta read_meta(const std::filesystem::path& path);

/// Wall-clock timings as a JSON object.
std::string timing_json(const ConvergenceTable& t);
std::string timing_json(const TailTable& t);

/// <out>/<experiment>/<config-hash>
std::filesystem::path report_dir(const std::filesystem::path& out, const ReportMeta& m);

struct ReportPaths {
  std::filesystem::path dir;
  std::filesystem::path results;
  std::filesystem::path meta;
  std::filesystem::path timing;
};

/// Writes results.csv, meta.json and (when non-empty) timing.json. Each file
/// is written to a temporary sibling and renamed. Throws IoError.
ReportPaths write_report(const std::filesystem::path& out, const ReportMeta& meta, const std::string& csv,
                         const std::string& timing = {});

}  // namespace vpme
