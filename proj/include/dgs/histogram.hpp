#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "dgs/types.hpp"

namespace dgs {

/// Counts the records of `class_label` per difficulty bin. Records of other
/// classes are ignored; an absent class yields an all-zero histogram.
DifficultyHistogram build_histogram(std::span<const ScoreRecord> records,
                                    const BinningSpec& spec,
                                    std::string_view class_label);

/// One histogram per class label, keyed (and therefore ordered) by label.
std::map<std::string, DifficultyHistogram> build_class_histograms(
    std::span<const ScoreRecord> records, const BinningSpec& spec);

/// Throws OutOfRange naming the id if a difficulty lies outside [0, 1].
void check_difficulty(const ScoreRecord& record);

/// Scales non-negative masses to a probability vector. With a floor, every
/// entry is raised by it first, so an all-zero input becomes uniform.
template <typename Derived>
Vector<typename Derived::Scalar> normalize(
    const Eigen::MatrixBase<Derived>& counts,
    std::optional<typename Derived::Scalar> floor = std::nullopt) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> p = counts;
  if (floor) p.array() += *floor;
  const Scalar sum = p.sum();
  if (!(sum > Scalar(0)))
    throw Error(ErrorKind::DegenerateDistribution,
                "cannot normalize a distribution with zero total mass");
  p /= sum;
  return p;
}

template <typename Scalar>
Vector<Scalar> normalize(const BasicHistogram<Scalar>& hist,
                         std::optional<Scalar> floor = std::nullopt) {
  try {
    return normalize(hist.counts, floor);
  } catch (const Error& e) {
    throw Error(e.kind(), e.what(), hist.class_label);
  }
}

/// Half the L1 distance between two probability vectors.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar total_variation(const Eigen::MatrixBase<DerivedP>& p,
                                          const Eigen::MatrixBase<DerivedQ>& q) {
  if (p.size() != q.size())
    throw Error(ErrorKind::LengthMismatch,
                "total_variation: vectors differ in length");
  return (p - q).template lpNorm<1>() / 2;
}

/// Mean difficulty estimated from bin centers; nullopt when the histogram is
/// empty.
std::optional<double> mean_difficulty(const DifficultyHistogram& hist);

}  // namespace dgs
