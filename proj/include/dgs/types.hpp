#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dgs/error.hpp"

namespace dgs {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using VectorXd = Vector<double>;
using MatrixXd = Eigen::MatrixXd;

/// One scored image. `difficulty` is 1 - classifier confidence on the true
/// class, so it lives in [0, 1].
struct ScoreRecord {
  std::string id;
  std::string class_label;
  double difficulty = 0.0;
  std::optional<std::string> source_path;
  /// Keys the manifest reader did not recognize, kept in file order as
  /// (key, serialized JSON value) so they survive a round trip.
  std::vector<std::pair<std::string, std::string>> extra;
};

/// Equal-width bins over [0, 1]. Bins are half-open except the last, which
/// is closed so a difficulty of exactly 1 is representable.
struct BinningSpec {
  static constexpr int kDefaultBinCount = 20;
  static constexpr int kMinBinCount = 4;

  int bin_count = kDefaultBinCount;

  void validate() const {
    if (bin_count < kMinBinCount)
      throw Error(ErrorKind::InvalidSpec,
                  "bin_count must be >= " + std::to_string(kMinBinCount) +
                      ", got " + std::to_string(bin_count),
                  "bin_count");
  }

  /// min(floor(d * N), N - 1). Caller guarantees d in [0, 1].
  int bin_of(double difficulty) const {
    const int k = static_cast<int>(difficulty * bin_count);
    return k < bin_count - 1 ? k : bin_count - 1;
  }

  double lower_edge(int k) const { return static_cast<double>(k) / bin_count; }
  double center(int k) const { return (k + 0.5) / bin_count; }
};

/// Per-class binned mass over difficulty. Counts are real-valued so floored
/// or smoothed distributions can reuse the type.
template <typename Scalar>
struct BasicHistogram {
  BinningSpec spec;
  Vector<Scalar> counts;
  Scalar total = Scalar(0);
  std::string class_label;

  int size() const { return static_cast<int>(counts.size()); }
};

using DifficultyHistogram = BasicHistogram<double>;

}  // namespace dgs
