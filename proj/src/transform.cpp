#include "dgs/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dgs {

void TransformParams::validate(int bin_count) const {
  if (!thresholds_feasible(bottom_clip, top_clip, bin_count))
    throw Error(ErrorKind::InvalidThreshold,
                "thresholds (b=" + std::to_string(bottom_clip) + ", t=" +
                    std::to_string(top_clip) + ") infeasible for " +
                    std::to_string(bin_count) + " bins");
  if (!(epsilon > 0.0))
    throw Error(ErrorKind::InvalidArgument, "epsilon must be positive",
                "epsilon");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "lambda must lie in [0, 1]",
                "lambda");
}

double scaled_epsilon(const DifficultyHistogram& hist, double epsilon_scale) {
  return hist.total > 0.0 ? epsilon_scale * hist.total : epsilon_scale;
}

CellObjective threshold_objective(const DifficultyHistogram& hist, int bottom,
                                  int top, double lambda, double epsilon) {
  const auto n = hist.counts.size();
  const auto f = transformed_distribution(hist.counts, bottom, top, epsilon);
  const VectorXd reference = normalize(hist.counts, std::optional(epsilon));
  const VectorXd uniform = VectorXd::Constant(n, 1.0 / static_cast<double>(n));

  CellObjective cell;
  cell.kl_to_original = kl_divergence(f.distribution, reference);
  cell.kl_to_uniform = kl_divergence(f.distribution, uniform);
  cell.value = lambda * cell.kl_to_original + (1.0 - lambda) * cell.kl_to_uniform;
  cell.constant_fallback = f.constant_fallback;
  return cell;
}

ThresholdFit fit_thresholds(const DifficultyHistogram& hist, double lambda,
                            std::optional<double> epsilon) {
  hist.spec.validate();
  if (!(hist.total > 0.0))
    throw Error(ErrorKind::DegenerateDistribution,
                "cannot fit thresholds on an empty histogram", hist.class_label);
  const double eps = epsilon.value_or(scaled_epsilon(hist));
  const int n = hist.size();

  ThresholdFit fit;
  fit.params.epsilon = eps;
  fit.params.lambda = lambda;
  fit.params.validate(n);

  auto& diag = fit.diagnostics;
  diag.objective_grid = MatrixXd::Constant(
      n - 1, n - 1, std::numeric_limits<double>::infinity());

  std::vector<CellObjective> cells;
  double minimum = std::numeric_limits<double>::infinity();
  for (int b = 0; b <= n - 2; ++b) {
    for (int t = 0; b + t <= n - 2; ++t) {
      const CellObjective cell = threshold_objective(hist, b, t, lambda, eps);
      diag.objective_grid(b, t) = cell.value;
      if (cell.constant_fallback) ++diag.fallback_cells;
      minimum = std::min(minimum, cell.value);
      cells.push_back(cell);
    }
  }
  // Cells within the tie tolerance of the minimum are tied; first in (b, t) wins.
  const double tolerance = kObjectiveTieTolerance * std::max(1.0, std::abs(minimum));
  CellObjective best;
  std::size_t index = 0;
  bool found = false;
  for (int b = 0; b <= n - 2 && !found; ++b) {
    for (int t = 0; b + t <= n - 2; ++t, ++index) {
      if (cells[index].value <= minimum + tolerance) {
        best = cells[index];
        fit.params.bottom_clip = b;
        fit.params.top_clip = t;
        found = true;
        break;
      }
    }
  }
  diag.objective_value = best.value;
  diag.kl_to_original = best.kl_to_original;
  diag.kl_to_uniform = best.kl_to_uniform;
  diag.constant_fallback = best.constant_fallback;
  return fit;
}

TransformOutcome<double> apply_transform(const DifficultyHistogram& hist,
                                         const TransformParams& params) {
  params.validate(hist.size());
  return transformed_distribution(hist.counts, params.bottom_clip,
                                  params.top_clip, params.epsilon);
}

}  // namespace dgs
