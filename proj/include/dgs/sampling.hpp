#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dgs/transform.hpp"
#include "dgs/types.hpp"

namespace dgs {

/// Target-distribution families. `Scale` follows the original dataset's
/// own difficulty histogram; the rest are fixed shapes.
enum class Strategy { Hill, Ground, Slope, Cliff, Scale };

/// Display order used by result tables.
inline constexpr Strategy kAllStrategies[] = {
    Strategy::Hill, Strategy::Ground, Strategy::Slope, Strategy::Cliff,
    Strategy::Scale};

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

struct TargetDistribution {
  Strategy kind = Strategy::Scale;
  VectorXd weights;
  std::string class_label;
  bool constant_fallback = false;
};

/// Geometric ratio of the cliff shape.
inline constexpr double kCliffRatio = 0.5;

using ShapeOverrides = std::map<Strategy, VectorXd>;

/// ground: uniform; slope: w[n] ~ N - n; hill: w[n] ~ N/2 - |n - (N-1)/2|;
/// cliff: w[n] ~ 0.5^n. An override, when given for `kind`, replaces the
/// built-in shape (it is validated and normalized).
TargetDistribution predefined_target(Strategy kind, int bin_count,
                                     const ShapeOverrides* overrides = nullptr);

/// Proportional scaling of the original histogram, optionally after the
/// clipped log transform.
TargetDistribution scale_target(const DifficultyHistogram& original,
                                const TransformParams& params,
                                bool use_transform);

/// Largest-remainder apportionment of `total` units over `weights`. Floors
/// first, then one extra unit per bin in descending remainder order, ties to
/// the lower index.
std::vector<int> apportion(const VectorXd& weights, int total);

/// One deficit redistribution: `moved` records that bin `from_bin` could not
/// supply were taken from bin `to_bin` instead.
struct FallbackMove {
  int from_bin = 0;
  int to_bin = 0;
  int moved = 0;

  bool operator==(const FallbackMove&) const = default;
};

struct SamplingPlan {
  std::string class_label;
  int ipc = 0;
  std::vector<int> bin_targets;
  std::vector<FallbackMove> fallback_log;
};

SamplingPlan allocate(const TargetDistribution& target, int ipc);

/// The per-class result of selection.
struct ClassSelection {
  SamplingPlan plan;
  std::vector<int> selected_per_bin;
  std::vector<ScoreRecord> records;
};

/// Draws plan.bin_targets[n] records per bin uniformly without replacement,
/// redirecting any shortfall to the nearest bin with spare records (lower
/// bin on ties). Exactly plan.ipc records are returned.
ClassSelection select(std::span<const ScoreRecord> pool, SamplingPlan plan,
                      std::uint64_t seed, const BinningSpec& spec);

enum class FitSource { Pool, Original };

std::string_view to_string(FitSource s);
FitSource parse_fit_source(std::string_view name);

struct SamplingConfig {
  BinningSpec binning;
  double lambda = TransformParams::kDefaultLambda;
  double epsilon_scale = TransformParams::kDefaultEpsilonScale;
  FitSource fit_on = FitSource::Pool;
  bool transform_enabled = true;
  ShapeOverrides shape_overrides;
  std::uint64_t seed = 0;
  int pool_factor = 5;
};

struct ClassReport {
  std::string class_label;
  DifficultyHistogram original_hist;
  DifficultyHistogram pool_hist;
  TransformParams params;  ///< as fitted, on the configured source
  TransformDiagnostics diagnostics;
  bool transform_applied = false;
  TargetDistribution target;
  SamplingPlan plan;
  std::vector<int> selected_per_bin;
};

struct SelectionManifest {
  std::vector<ScoreRecord> records;  ///< grouped by class, classes sorted
  std::vector<ClassReport> classes;
  Strategy strategy = Strategy::Scale;
  int ipc = 0;
  std::uint64_t seed = 0;
  int pool_factor = 5;
};

/// Full per-class pipeline: histograms, threshold fit, target, allocation,
/// selection. Classes are processed in lexicographic order.
SelectionManifest sample_distilled(std::span<const ScoreRecord> original,
                                   std::span<const ScoreRecord> pool, int ipc,
                                   Strategy strategy,
                                   const SamplingConfig& config);

/// Normalized histogram of a selection for one class, for match diagnostics.
VectorXd selected_distribution(const ClassReport& report);

}  // namespace dgs
