#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dgs/sampling.hpp"
#include "dgs/synth.hpp"
#include "dgs/transform.hpp"

namespace dgs::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Score manifests: one flat JSON object per line with keys id, class,
// difficulty and optional path. Other keys are carried through untouched.

std::vector<ScoreRecord> read_manifest(std::istream& in,
                                       std::string_view source = "<stream>");
std::vector<ScoreRecord> load_manifest(const std::filesystem::path& path);

std::string manifest_line(const ScoreRecord& record);
void write_manifest(std::ostream& out, std::span<const ScoreRecord> records);
void save_manifest(const std::filesystem::path& path,
                   std::span<const ScoreRecord> records);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// ---------------------------------------------------------------------------
// Run configuration.

struct RunConfig {
  SamplingConfig sampling;
  int ipc = 10;
  Strategy strategy = Strategy::Scale;
  SyntheticSpec synthetic;
  BenchOptions bench;

  /// Canonical JSON of every effective setting.
  Json to_json() const;
};

/// Parses and validates; errors are ErrorKind::Validation with the field path
/// (e.g. "$.synthetic.pool_law.alpha") as subject.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Re-checks cross-field constraints after CLI overrides are applied.
void validate_config(const RunConfig& config);

/// 16 hex digits of FNV-1a over the canonical config JSON.
std::string config_hash(const RunConfig& config);

/// Config hash, seed and the built-in defaults, embedded in every output.
Json provenance(const RunConfig& config);

// ---------------------------------------------------------------------------
// Serialization of pipeline results.

Json to_json(const VectorXd& v);
Json to_json(const DifficultyHistogram& hist);
Json to_json(const TransformParams& params);
Json to_json(const TransformDiagnostics& diagnostics, bool include_grid = true);
Json to_json(const SamplingPlan& plan);
Json to_json(const SelectionManifest& manifest);
Json to_json(const BenchResult& result);

// ---------------------------------------------------------------------------
// Result tables.

/// CSV with one line per result:
/// table,strategy,ipc,pool_factor,accuracy_mean,accuracy_std,tv_distance_to_target,repeats
std::string bench_csv(const BenchReport& report);

/// Human-readable tables: strategies as rows (hill, ground, slope, cliff,
/// scale) and pool factors as rows ("2 x IPC" ...), IPCs as columns, cells
/// "mean ± std" in percent.
std::string bench_text(const BenchReport& report);

// ---------------------------------------------------------------------------
// Histogram figures.

struct PlotPanel {
  DifficultyHistogram hist;
  std::string label;
  /// Shown in the title; estimated from bin centers when absent.
  std::optional<double> mean_difficulty;
};

/// Panels side by side; y axis counts, x axis difficulty intervals.
std::string render_svg(std::span<const PlotPanel> panels);
/// Plain-text bars, one row per bin, scaled to `width` characters.
std::string render_text(std::span<const PlotPanel> panels, int width = 40);

/// Writes `path` as SVG and the same path with extension ".txt" as the text
/// fallback.
void emit_histogram_plot(std::span<const PlotPanel> panels,
                         const std::filesystem::path& path);

}  // namespace dgs::io
