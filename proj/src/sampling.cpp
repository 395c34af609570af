#include "dgs/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "dgs/histogram.hpp"
#include "dgs/rng.hpp"

namespace dgs {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Hill: return "hill";
    case Strategy::Ground: return "ground";
    case Strategy::Slope: return "slope";
    case Strategy::Cliff: return "cliff";
    case Strategy::Scale: return "scale";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : kAllStrategies)
    if (to_string(s) == name) return s;
  throw Error(ErrorKind::InvalidArgument,
              "unknown strategy '" + std::string(name) +
                  "' (expected hill, ground, slope, cliff or scale)",
              "strategy");
}

std::string_view to_string(FitSource s) {
  return s == FitSource::Pool ? "pool" : "original";
}

FitSource parse_fit_source(std::string_view name) {
  if (name == "pool") return FitSource::Pool;
  if (name == "original") return FitSource::Original;
  throw Error(ErrorKind::InvalidArgument,
              "unknown fit source '" + std::string(name) +
                  "' (expected pool or original)",
              "fit_thresholds_on");
}

namespace {

void check_probability_vector(const VectorXd& w, std::string_view what) {
  if (w.size() == 0)
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " is empty");
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (!(w[i] >= 0.0) || !std::isfinite(w[i]))
      throw Error(ErrorKind::InvalidArgument,
                  std::string(what) + " has a negative or non-finite entry");
  if (std::abs(w.sum() - 1.0) > 1e-9)
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + " does not sum to 1");
}

VectorXd builtin_shape(Strategy kind, int n) {
  VectorXd w(n);
  for (int k = 0; k < n; ++k) {
    switch (kind) {
      case Strategy::Ground: w[k] = 1.0; break;
      case Strategy::Slope: w[k] = n - k; break;
      case Strategy::Hill: w[k] = n / 2.0 - std::abs(k - (n - 1) / 2.0); break;
      case Strategy::Cliff: w[k] = std::pow(kCliffRatio, k); break;
      case Strategy::Scale:
        throw Error(ErrorKind::InvalidArgument,
                    "scale is not a pre-defined shape", "strategy");
    }
  }
  return w;
}

}  // namespace

TargetDistribution predefined_target(Strategy kind, int bin_count,
                                     const ShapeOverrides* overrides) {
  BinningSpec{bin_count}.validate();
  TargetDistribution target;
  target.kind = kind;
  VectorXd raw;
  if (overrides) {
    if (auto it = overrides->find(kind); it != overrides->end()) {
      raw = it->second;
      if (raw.size() != bin_count)
        throw Error(ErrorKind::LengthMismatch,
                    "shape override for " + std::string(to_string(kind)) +
                        " has " + std::to_string(raw.size()) +
                        " weights, expected " + std::to_string(bin_count),
                    "shape_overrides." + std::string(to_string(kind)));
      if ((raw.array() < 0.0).any() || !raw.allFinite())
        throw Error(ErrorKind::InvalidArgument,
                    "shape override weights must be finite and non-negative",
                    "shape_overrides." + std::string(to_string(kind)));
    }
  }
  if (raw.size() == 0) raw = builtin_shape(kind, bin_count);
  target.weights = normalize(raw);
  return target;
}

TargetDistribution scale_target(const DifficultyHistogram& original,
                                const TransformParams& params,
                                bool use_transform) {
  if (!(original.total > 0.0))
    throw Error(ErrorKind::DegenerateDistribution,
                "original histogram is empty", original.class_label);
  TargetDistribution target;
  target.kind = Strategy::Scale;
  target.class_label = original.class_label;
  if (use_transform) {
    auto outcome = apply_transform(original, params);
    target.weights = std::move(outcome.distribution);
    target.constant_fallback = outcome.constant_fallback;
  } else {
    target.weights = normalize(original);
  }
  return target;
}

std::vector<int> apportion(const VectorXd& weights, int total) {
  if (total < 0)
    throw Error(ErrorKind::InvalidArgument, "cannot apportion a negative total");
  check_probability_vector(weights, "weights");
  const auto n = static_cast<std::size_t>(weights.size());
  std::vector<int> counts(n);
  std::vector<double> remainder(n);
  long assigned = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double quota = total * weights[static_cast<Eigen::Index>(k)];
    const double floor = std::floor(quota);
    counts[k] = static_cast<int>(floor);
    remainder[k] = quota - floor;
    assigned += counts[k];
  }
  long leftover = total - assigned;
  // Quotas sum to total up to rounding, so at most one unit per bin is left.
  if (leftover < 0 || leftover > static_cast<long>(n))
    throw Error(ErrorKind::InvalidArgument,
                "apportionment drifted; weights are not a probability vector");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t i = 0; leftover > 0; ++i, --leftover) ++counts[order[i]];
  return counts;
}

SamplingPlan allocate(const TargetDistribution& target, int ipc) {
  if (ipc < 1)
    throw Error(ErrorKind::InvalidArgument, "ipc must be >= 1", "ipc");
  SamplingPlan plan;
  plan.class_label = target.class_label;
  plan.ipc = ipc;
  plan.bin_targets = apportion(target.weights, ipc);
  return plan;
}

ClassSelection select(std::span<const ScoreRecord> pool, SamplingPlan plan,
                      std::uint64_t seed, const BinningSpec& spec) {
  spec.validate();
  const int n = spec.bin_count;
  if (static_cast<int>(plan.bin_targets.size()) != n)
    throw Error(ErrorKind::LengthMismatch,
                "plan has " + std::to_string(plan.bin_targets.size()) +
                    " bins, binning has " + std::to_string(n),
                plan.class_label);
  if (std::accumulate(plan.bin_targets.begin(), plan.bin_targets.end(), 0) !=
      plan.ipc)
    throw Error(ErrorKind::InvalidArgument,
                "plan bin targets do not sum to ipc", plan.class_label);
  if (static_cast<long>(pool.size()) < plan.ipc)
    throw Error(ErrorKind::InsufficientPool,
                "pool for class '" + plan.class_label + "' holds " +
                    std::to_string(pool.size()) + " records, ipc is " +
                    std::to_string(plan.ipc),
                plan.class_label);

  std::vector<std::vector<const ScoreRecord*>> bins(static_cast<std::size_t>(n));
  std::unordered_set<std::string_view> seen;
  for (const auto& r : pool) {
    check_difficulty(r);
    if (r.class_label != plan.class_label)
      throw Error(ErrorKind::InvalidArgument,
                  "pool record '" + r.id + "' belongs to class '" +
                      r.class_label + "', not '" + plan.class_label + "'",
                  r.id);
    if (!seen.insert(r.id).second)
      throw Error(ErrorKind::DuplicateId, "duplicate pool id '" + r.id + "'",
                  r.id);
    bins[static_cast<std::size_t>(spec.bin_of(r.difficulty))].push_back(&r);
  }
  // Selection must not depend on manifest order.
  for (auto& b : bins)
    std::sort(b.begin(), b.end(),
              [](const ScoreRecord* a, const ScoreRecord* c) { return a->id < c->id; });

  std::vector<int> take(static_cast<std::size_t>(n));
  std::vector<int> spare(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int available = static_cast<int>(bins[k].size());
    take[k] = std::min(plan.bin_targets[k], available);
    spare[k] = available - take[k];
  }
  plan.fallback_log.clear();
  for (int k = 0; k < n; ++k) {
    int deficit = plan.bin_targets[k] - take[k];
    while (deficit > 0) {
      int donor = -1;
      for (int d = 1; d < n && donor < 0; ++d) {
        if (k - d >= 0 && spare[k - d] > 0)
          donor = k - d;
        else if (k + d < n && spare[k + d] > 0)
          donor = k + d;
      }
      if (donor < 0)
        throw Error(ErrorKind::InsufficientPool,
                    "no donor bin left for class '" + plan.class_label + "'",
                    plan.class_label);
      const int moved = std::min(deficit, spare[donor]);
      spare[donor] -= moved;
      take[donor] += moved;
      deficit -= moved;
      plan.fallback_log.push_back({k, donor, moved});
    }
  }

  ClassSelection out;
  out.records.reserve(static_cast<std::size_t>(plan.ipc));
  for (int k = 0; k < n; ++k) {
    if (take[k] == 0) continue;
    Engine engine(derive_seed(seed, plan.class_label, static_cast<std::uint64_t>(k)));
    auto candidates = bins[k];
    sample_without_replacement(candidates, static_cast<std::size_t>(take[k]), engine);
    for (const ScoreRecord* r : candidates) out.records.push_back(*r);
  }
  out.selected_per_bin = std::move(take);
  out.plan = std::move(plan);
  return out;
}

SelectionManifest sample_distilled(std::span<const ScoreRecord> original,
                                   std::span<const ScoreRecord> pool, int ipc,
                                   Strategy strategy,
                                   const SamplingConfig& config) {
  config.binning.validate();
  if (ipc < 1) throw Error(ErrorKind::InvalidArgument, "ipc must be >= 1", "ipc");
  if (!(config.lambda >= 0.0 && config.lambda <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "lambda must lie in [0, 1]", "lambda");
  if (!(config.epsilon_scale > 0.0))
    throw Error(ErrorKind::InvalidArgument, "epsilon_scale must be positive",
                "epsilon_scale");
  if (config.pool_factor < 1)
    throw Error(ErrorKind::InvalidArgument, "pool_factor must be >= 1",
                "pool_factor");

  const auto original_hists = build_class_histograms(original, config.binning);
  const auto pool_hists = build_class_histograms(pool, config.binning);

  SelectionManifest manifest;
  manifest.strategy = strategy;
  manifest.ipc = ipc;
  manifest.seed = config.seed;
  manifest.pool_factor = config.pool_factor;

  for (const auto& [label, original_hist] : original_hists) {
    auto pool_it = pool_hists.find(label);
    if (pool_it == pool_hists.end())
      throw Error(ErrorKind::MissingClass,
                  "class '" + label + "' is in the original manifest but not in the pool",
                  label);
    const DifficultyHistogram& pool_hist = pool_it->second;

    ClassReport report;
    report.class_label = label;
    report.original_hist = original_hist;
    report.pool_hist = pool_hist;

    const DifficultyHistogram& fit_source =
        config.fit_on == FitSource::Pool ? pool_hist : original_hist;
    auto fit = fit_thresholds(fit_source, config.lambda,
                              scaled_epsilon(fit_source, config.epsilon_scale));
    report.params = fit.params;
    report.diagnostics = std::move(fit.diagnostics);

    if (strategy == Strategy::Scale) {
      TransformParams on_original = report.params;
      on_original.epsilon = scaled_epsilon(original_hist, config.epsilon_scale);
      report.transform_applied = config.transform_enabled;
      report.target = scale_target(original_hist, on_original, config.transform_enabled);
    } else {
      report.target = predefined_target(strategy, config.binning.bin_count,
                                        &config.shape_overrides);
    }
    report.target.class_label = label;

    std::vector<ScoreRecord> class_pool;
    for (const auto& r : pool)
      if (r.class_label == label) class_pool.push_back(r);

    auto selection = select(class_pool, allocate(report.target, ipc),
                            config.seed, config.binning);
    report.plan = std::move(selection.plan);
    report.selected_per_bin = std::move(selection.selected_per_bin);
    for (auto& r : selection.records) manifest.records.push_back(std::move(r));
    manifest.classes.push_back(std::move(report));
  }
  return manifest;
}

VectorXd selected_distribution(const ClassReport& report) {
  VectorXd counts(static_cast<Eigen::Index>(report.selected_per_bin.size()));
  for (std::size_t k = 0; k < report.selected_per_bin.size(); ++k)
    counts[static_cast<Eigen::Index>(k)] = report.selected_per_bin[k];
  return normalize(counts);
}

}  // namespace dgs
