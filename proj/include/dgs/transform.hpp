#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "dgs/histogram.hpp"
#include "dgs/types.hpp"

namespace dgs {

/// Fitted clipping thresholds plus the floor and trade-off weight that
/// produced them. Together they fully determine the correction map.
struct TransformParams {
  static constexpr double kDefaultLambda = 0.5;
  static constexpr double kDefaultEpsilonScale = 1e-6;

  int bottom_clip = 0;  ///< leading bins zeroed before the floor is added
  int top_clip = 0;     ///< trailing bins zeroed before the floor is added
  double epsilon = 1e-6;
  double lambda = kDefaultLambda;

  void validate(int bin_count) const;
};

inline bool thresholds_feasible(int bottom, int top, int bin_count) {
  return bottom >= 0 && top >= 0 && bottom + top <= bin_count - 2;
}

/// Zeroes the `bottom` lowest and `top` highest bins, then adds `epsilon`
/// everywhere. Heaviside H(0) = 1 with 0-based bins, so bins
/// [bottom, N-1-top] keep their mass.
template <typename Derived>
Vector<typename Derived::Scalar> clip(const Eigen::MatrixBase<Derived>& counts,
                                      int bottom, int top,
                                      typename Derived::Scalar epsilon) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<int>(counts.size());
  if (!thresholds_feasible(bottom, top, n))
    throw Error(ErrorKind::InvalidThreshold,
                "thresholds (b=" + std::to_string(bottom) + ", t=" +
                    std::to_string(top) + ") infeasible for " +
                    std::to_string(n) + " bins; need b + t <= N - 2");
  if (!(epsilon > Scalar(0)))
    throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
  Vector<Scalar> out = Vector<Scalar>::Constant(n, epsilon);
  const int kept = n - bottom - top;
  out.segment(bottom, kept) += counts.segment(bottom, kept);
  return out;
}

/// ln(x / min) / ln(max / min): the minimum maps to 0, the maximum to 1.
/// Throws ConstantDistribution when max == min.
template <typename Derived>
Vector<typename Derived::Scalar> log_transform(
    const Eigen::MatrixBase<Derived>& clipped) {
  using Scalar = typename Derived::Scalar;
  Eigen::Index top = 0;
  const Scalar lo = clipped.minCoeff();
  const Scalar hi = clipped.maxCoeff(&top);
  if (!(lo > Scalar(0)))
    throw Error(ErrorKind::InvalidArgument,
                "log_transform requires strictly positive entries");
  if (!(hi > lo))
    throw Error(ErrorKind::ConstantDistribution,
                "log_transform of a constant distribution is undefined");
  // Scalar log per entry; the maximum divides by itself.
  const Vector<Scalar> logs = clipped.unaryExpr([lo](Scalar x) {
    using std::log;
    return log(x / lo);
  });
  return logs / logs[top];
}

/// sum p * ln(p / q) with 0 * ln(0 / q) := 0.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& p,
                                        const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  if (p.size() != q.size())
    throw Error(ErrorKind::LengthMismatch,
                "kl_divergence: lengths " + std::to_string(p.size()) + " and " +
                    std::to_string(q.size()) + " differ");
  using std::abs;
  using std::log;
  if (abs(p.sum() - Scalar(1)) > Scalar(1e-9) ||
      abs(q.sum() - Scalar(1)) > Scalar(1e-9))
    throw Error(ErrorKind::InvalidArgument,
                "kl_divergence: arguments must sum to 1");
  Scalar acc(0);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < Scalar(0) || q[i] < Scalar(0))
      throw Error(ErrorKind::InvalidArgument,
                  "kl_divergence: negative probability");
    if (p[i] == Scalar(0)) continue;
    if (q[i] == Scalar(0))
      throw Error(ErrorKind::InvalidArgument,
                  "kl_divergence: q is zero where p is positive");
    acc += p[i] * log(p[i] / q[i]);
  }
  // Rounding can leave -1e-17 for p ~= q.
  return std::max(acc, Scalar(0));
}

template <typename Scalar>
struct TransformOutcome {
  Vector<Scalar> distribution;    ///< sums to 1
  bool constant_fallback = false; ///< clipped vector was constant; uniform used
};

/// normalize(log_transform(clip(counts))) with the uniform fallback for a
/// constant clipped vector.
template <typename Derived>
TransformOutcome<typename Derived::Scalar> transformed_distribution(
    const Eigen::MatrixBase<Derived>& counts, int bottom, int top,
    typename Derived::Scalar epsilon) {
  using Scalar = typename Derived::Scalar;
  const Vector<Scalar> clipped = clip(counts, bottom, top, epsilon);
  const auto n = clipped.size();
  if (!(clipped.maxCoeff() > clipped.minCoeff()))
    return {Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n)), true};
  return {normalize(log_transform(clipped)), false};
}

struct TransformDiagnostics {
  double objective_value = 0.0;
  double kl_to_original = 0.0;
  double kl_to_uniform = 0.0;
  /// Objective per (b, t); rows are b, columns t, infeasible cells +inf.
  MatrixXd objective_grid;
  /// The chosen cell's clipped vector was constant, so f^ := uniform.
  bool constant_fallback = false;
  int fallback_cells = 0;
};

struct ThresholdFit {
  TransformParams params;
  TransformDiagnostics diagnostics;
};

/// epsilon_scale * hist.total, or epsilon_scale itself for an empty
/// histogram so the floor stays positive.
double scaled_epsilon(const DifficultyHistogram& hist,
                      double epsilon_scale = TransformParams::kDefaultEpsilonScale);

/// Objective of one (b, t) cell:
/// lambda * KL(f^ || P^) + (1 - lambda) * KL(f^ || U), with P^ the
/// epsilon-floored normalized histogram.
struct CellObjective {
  double value = 0.0;
  double kl_to_original = 0.0;
  double kl_to_uniform = 0.0;
  bool constant_fallback = false;
};

CellObjective threshold_objective(const DifficultyHistogram& hist, int bottom,
                                  int top, double lambda, double epsilon);

/// Cells whose objectives differ by less than this (relative to
/// max(1, |minimum|)) are treated as tied.
inline constexpr double kObjectiveTieTolerance = 1e-13;

/// Exhaustive search over every feasible (b, t). Ties go to the smallest b,
/// then the smallest t.
ThresholdFit fit_thresholds(const DifficultyHistogram& hist,
                            double lambda = TransformParams::kDefaultLambda,
                            std::optional<double> epsilon = std::nullopt);

TransformOutcome<double> apply_transform(const DifficultyHistogram& hist,
                                         const TransformParams& params);

}  // namespace dgs
