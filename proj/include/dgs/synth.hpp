#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dgs/sampling.hpp"
#include "dgs/types.hpp"

namespace dgs {

struct BetaLaw {
  double alpha = 1.0;
  double beta = 1.0;
};

/// Probability mass of Beta(alpha, beta) in each bin of `spec`.
VectorXd beta_bin_masses(const BetaLaw& law, const BinningSpec& spec);

/// Desk-scale stand-in for a real dataset plus a generated image pool.
/// Classes are isotropic unit-variance Gaussian clouds whose centers sit
/// `class_separation` apart.
struct SyntheticSpec {
  int class_count = 10;
  int per_class_original = 500;
  int pool_factor = 5;
  int ipc = 50;  ///< pool holds pool_factor * ipc records per class
  /// Difficulty laws enforced by acceptance-resampling; nullopt keeps the
  /// raw classifier difficulties.
  std::optional<BetaLaw> original_law = BetaLaw{2.0, 2.0};
  std::optional<BetaLaw> pool_law = BetaLaw{2.0, 8.0};
  int feature_dim = 16;
  double class_separation = 2.5;
  std::uint64_t seed = 0;
  int test_per_class = 200;
  BinningSpec binning;
  /// Candidates drawn per accepted record before giving up.
  int attempt_budget = 400;

  void validate() const;
};

/// Features for every generated record, addressable by record id.
class FeatureStore {
 public:
  Eigen::Map<const VectorXd> operator[](const std::string& id) const;
  bool contains(const std::string& id) const { return row_of_.contains(id); }
  void add(const std::string& id, const VectorXd& x);
  int dim() const { return dim_; }
  std::size_t size() const { return row_of_.size(); }

 private:
  int dim_ = 0;
  std::vector<double> values_;  // row-major, dim_ per record
  std::unordered_map<std::string, std::size_t> row_of_;
};

struct TestSplit {
  MatrixXd features;
  std::vector<std::string> labels;
};

/// Nearest-centroid classifier with a softmax over negative squared
/// distances; the temperature is 2 * pooled within-class variance.
struct CentroidClassifier {
  std::vector<std::string> classes;  ///< sorted
  MatrixXd centroids;                ///< one row per class
  double temperature = 2.0;

  static CentroidClassifier fit(const MatrixXd& features,
                                std::span<const std::string> labels);

  VectorXd probabilities(const Eigen::Ref<const VectorXd>& x) const;
  int predict(const Eigen::Ref<const VectorXd>& x) const;
  /// 1 - confidence on the true class, clamped to [0, 1].
  double difficulty(const Eigen::Ref<const VectorXd>& x,
                    std::string_view true_class) const;
};

struct SyntheticData {
  std::vector<ScoreRecord> original;
  std::vector<ScoreRecord> pool;
  FeatureStore features;
  TestSplit test;
  CentroidClassifier scorer;
  MatrixXd class_centers;
  /// Worst per-class TV distance between realized histograms and the laws
  /// (0 when no law is set).
  double original_law_tv = 0.0;
  double pool_law_tv = 0.0;
};

std::string class_name(int index);

/// Generates original and pool manifests whose difficulties come from a
/// real classifier's confidence, resampled to the configured Beta laws.
/// Seed-deterministic end to end.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Top-1 accuracy on `test` of a nearest-centroid classifier fitted on the
/// features of `selection`.
double evaluate_downstream(std::span<const ScoreRecord> selection,
                           const FeatureStore& features, const TestSplit& test);

struct BenchResult {
  Strategy strategy = Strategy::Scale;
  int ipc = 0;
  int pool_factor = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;  ///< unbiased sample std over repeats
  double tv_distance_to_target = 0.0;
  int repeats = 0;
};

/// Mean and unbiased (n - 1) standard deviation.
std::pair<double, double> mean_and_std(std::span<const double> values);

/// Full factorial over strategies x ipcs x pool_factors, `repeats` seeds per
/// cell. Within a (ipc, pool_factor, repeat) triple every strategy sees the
/// same synthetic data. Results are ordered strategy-major, then ipc, then
/// pool factor.
std::vector<BenchResult> run_sweep(const SyntheticSpec& spec,
                                   std::span<const Strategy> strategies,
                                   std::span<const int> ipcs,
                                   std::span<const int> pool_factors, int repeats,
                                   const SamplingConfig& base);

/// Strategy comparison at a fixed pool factor and pool-size comparison for
/// the scale strategy.
struct BenchReport {
  std::vector<BenchResult> strategy_table;
  std::vector<BenchResult> pool_table;
  std::vector<int> ipcs;
  std::vector<int> pool_factors;
  int strategy_pool_factor = 5;
  /// Per ipc: scale mean >= every predefined mean minus that strategy's std.
  std::vector<bool> scale_ordering_holds;
};

struct BenchOptions {
  std::vector<int> ipcs{10, 20, 50};
  std::vector<int> pool_factors{2, 3, 4, 5, 6};
  int strategy_pool_factor = 5;
  int repeats = 3;
};

BenchReport run_bench(const SyntheticSpec& spec, const BenchOptions& options,
                      const SamplingConfig& base);

}  // namespace dgs
