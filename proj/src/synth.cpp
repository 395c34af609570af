#include "dgs/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>

#include <boost/math/special_functions/beta.hpp>

#include "dgs/histogram.hpp"
#include "dgs/rng.hpp"

namespace dgs {

namespace {

void require(bool ok, const char* field, const std::string& message) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, message, field);
}

// Box-Muller on the portable uniform stream.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform_unit(engine_);
    const double u2 = uniform_unit(engine_);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  VectorXd vector(int dim) {
    VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = next();
    return v;
  }

 private:
  Engine engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::string record_id(std::string_view split, int cls, int index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*s-%s-%05d", static_cast<int>(split.size()),
                split.data(), class_name(cls).c_str(), index);
  return buf;
}

}  // namespace

void SyntheticSpec::validate() const {
  require(class_count >= 2, "class_count", "class_count must be >= 2");
  require(per_class_original >= 1, "per_class_original",
          "per_class_original must be positive");
  require(pool_factor >= 1, "pool_factor", "pool_factor must be positive");
  require(ipc >= 1, "ipc", "ipc must be positive");
  require(feature_dim >= 1, "feature_dim", "feature_dim must be positive");
  require(class_separation > 0.0, "class_separation",
          "class_separation must be positive");
  require(test_per_class >= 1, "test_per_class", "test_per_class must be positive");
  require(attempt_budget >= 1, "attempt_budget", "attempt_budget must be positive");
  for (const auto* law : {&original_law, &pool_law})
    if (*law)
      require((*law)->alpha > 0.0 && (*law)->beta > 0.0,
              law == &original_law ? "original_law" : "pool_law",
              "Beta parameters must be positive");
  binning.validate();
}

VectorXd beta_bin_masses(const BetaLaw& law, const BinningSpec& spec) {
  const int n = spec.bin_count;
  VectorXd masses(n);
  double previous = 0.0;
  for (int k = 0; k < n; ++k) {
    const double upper =
        k + 1 == n ? 1.0 : boost::math::ibeta(law.alpha, law.beta, spec.lower_edge(k + 1));
    masses[k] = upper - previous;
    previous = upper;
  }
  return masses;
}

Eigen::Map<const VectorXd> FeatureStore::operator[](const std::string& id) const {
  auto it = row_of_.find(id);
  if (it == row_of_.end())
    throw Error(ErrorKind::InvalidArgument, "no features for record '" + id + "'", id);
  return Eigen::Map<const VectorXd>(values_.data() + it->second * dim_, dim_);
}

void FeatureStore::add(const std::string& id, const VectorXd& x) {
  if (row_of_.empty()) dim_ = static_cast<int>(x.size());
  if (x.size() != dim_)
    throw Error(ErrorKind::LengthMismatch, "feature dimension mismatch for '" + id + "'", id);
  if (!row_of_.emplace(id, row_of_.size()).second)
    throw Error(ErrorKind::DuplicateId, "duplicate feature id '" + id + "'", id);
  values_.insert(values_.end(), x.data(), x.data() + x.size());
}

CentroidClassifier CentroidClassifier::fit(const MatrixXd& features,
                                           std::span<const std::string> labels) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size()))
    throw Error(ErrorKind::LengthMismatch, "features and labels differ in length");
  CentroidClassifier model;
  const std::set<std::string> unique(labels.begin(), labels.end());
  model.classes.assign(unique.begin(), unique.end());
  std::map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < model.classes.size(); ++i)
    index[model.classes[i]] = static_cast<Eigen::Index>(i);

  const auto k = static_cast<Eigen::Index>(model.classes.size());
  model.centroids = MatrixXd::Zero(k, features.cols());
  VectorXd count = VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const auto c = index[labels[static_cast<std::size_t>(i)]];
    model.centroids.row(c) += features.row(i);
    count[c] += 1.0;
  }
  model.centroids.array().colwise() /= count.array();

  double sq = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    sq += (features.row(i) -
           model.centroids.row(index[labels[static_cast<std::size_t>(i)]]))
              .squaredNorm();
  const double denom = static_cast<double>(features.rows() * features.cols());
  const double variance = denom > 0 ? sq / denom : 0.0;
  model.temperature = 2.0 * std::max(variance, 1e-12);
  return model;
}

VectorXd CentroidClassifier::probabilities(const Eigen::Ref<const VectorXd>& x) const {
  const VectorXd logits =
      -(centroids.rowwise() - x.transpose()).rowwise().squaredNorm() / temperature;
  const VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

int CentroidClassifier::predict(const Eigen::Ref<const VectorXd>& x) const {
  Eigen::Index best = 0;
  (centroids.rowwise() - x.transpose()).rowwise().squaredNorm().minCoeff(&best);
  return static_cast<int>(best);
}

double CentroidClassifier::difficulty(const Eigen::Ref<const VectorXd>& x,
                                      std::string_view true_class) const {
  auto it = std::lower_bound(classes.begin(), classes.end(), true_class);
  if (it == classes.end() || *it != true_class)
    throw Error(ErrorKind::MissingClass,
                "classifier has no class '" + std::string(true_class) + "'",
                std::string(true_class));
  const double p = probabilities(x)[it - classes.begin()];
  return std::clamp(1.0 - p, 0.0, 1.0);
}

std::string class_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "class_%02d", index);
  return buf;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const int dim = spec.feature_dim;
  const int k = spec.class_count;
  SyntheticData data;

  // Orthogonal centers when the dimension allows, random directions otherwise;
  // either way pairwise distances are (about) class_separation.
  const double radius = spec.class_separation / std::numbers::sqrt2;
  data.class_centers = MatrixXd::Zero(k, dim);
  if (dim >= k) {
    for (int c = 0; c < k; ++c) data.class_centers(c, c) = radius;
  } else {
    NormalStream dirs(derive_seed(spec.seed, "centers", 0));
    for (int c = 0; c < k; ++c)
      data.class_centers.row(c) = dirs.vector(dim).normalized().transpose() * radius;
  }

  auto draw = [&](NormalStream& stream, int cls) -> VectorXd {
    return data.class_centers.row(cls).transpose() + stream.vector(dim);
  };

  // The scorer plays the role of the pretrained model: fitted once on a
  // reference draw of the original clouds, then applied to every record.
  {
    MatrixXd reference(static_cast<Eigen::Index>(k) * spec.per_class_original, dim);
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(reference.rows()));
    for (int c = 0; c < k; ++c) {
      NormalStream stream(derive_seed(spec.seed, "reference", static_cast<std::uint64_t>(c)));
      for (int i = 0; i < spec.per_class_original; ++i) {
        reference.row(static_cast<Eigen::Index>(c) * spec.per_class_original + i) =
            draw(stream, c).transpose();
        labels.push_back(class_name(c));
      }
    }
    data.scorer = CentroidClassifier::fit(reference, labels);
  }

  auto generate_split = [&](std::string_view split, int cls, int count,
                            const std::optional<BetaLaw>& law,
                            std::vector<ScoreRecord>& out) -> double {
    NormalStream stream(derive_seed(spec.seed, split, static_cast<std::uint64_t>(cls)));
    const std::string label = class_name(cls);
    auto emit = [&](const VectorXd& x, double difficulty) {
      ScoreRecord r;
      r.id = record_id(split, cls, static_cast<int>(out.size()));
      r.class_label = label;
      r.difficulty = difficulty;
      data.features.add(r.id, x);
      out.push_back(std::move(r));
    };

    if (!law) {
      for (int i = 0; i < count; ++i) {
        const VectorXd x = draw(stream, cls);
        emit(x, data.scorer.difficulty(x, label));
      }
      return 0.0;
    }

    const VectorXd masses = beta_bin_masses(*law, spec.binning);
    const std::vector<int> quota = apportion(masses, count);
    std::vector<int> filled(quota.size(), 0);
    int remaining = count;
    const long budget = static_cast<long>(spec.attempt_budget) * count;
    VectorXd realized = VectorXd::Zero(spec.binning.bin_count);
    for (long attempt = 0; remaining > 0 && attempt < budget; ++attempt) {
      const VectorXd x = draw(stream, cls);
      const double d = data.scorer.difficulty(x, label);
      const int bin = spec.binning.bin_of(d);
      if (filled[bin] >= quota[bin]) continue;
      ++filled[bin];
      realized[bin] += 1.0;
      --remaining;
      emit(x, d);
    }
    if (remaining > 0) {
      int worst = 0;
      for (std::size_t b = 0; b < quota.size(); ++b)
        if (quota[b] - filled[b] > quota[worst] - filled[worst]) worst = static_cast<int>(b);
      char law_text[64];
      std::snprintf(law_text, sizeof law_text, "Beta(%g, %g)", law->alpha, law->beta);
      throw Error(ErrorKind::SpecInfeasible,
                  "could not realize " + std::string(law_text) + " for " +
                      std::string(split) + " split of " + label + " within " +
                      std::to_string(budget) + " candidates (bin " +
                      std::to_string(worst) + " short by " +
                      std::to_string(quota[worst] - filled[worst]) +
                      "); try a looser Beta target or a different class_separation",
                  label);
    }
    return total_variation(normalize(realized), masses);
  };

  const int pool_per_class = spec.pool_factor * spec.ipc;
  for (int c = 0; c < k; ++c) {
    data.original_law_tv = std::max(
        data.original_law_tv,
        generate_split("orig", c, spec.per_class_original, spec.original_law, data.original));
    data.pool_law_tv = std::max(
        data.pool_law_tv, generate_split("pool", c, pool_per_class, spec.pool_law, data.pool));
  }

  data.test.features.resize(static_cast<Eigen::Index>(k) * spec.test_per_class, dim);
  for (int c = 0; c < k; ++c) {
    NormalStream stream(derive_seed(spec.seed, "test", static_cast<std::uint64_t>(c)));
    for (int i = 0; i < spec.test_per_class; ++i) {
      data.test.features.row(static_cast<Eigen::Index>(c) * spec.test_per_class + i) =
          draw(stream, c).transpose();
      data.test.labels.push_back(class_name(c));
    }
  }
  return data;
}

double evaluate_downstream(std::span<const ScoreRecord> selection,
                           const FeatureStore& features, const TestSplit& test) {
  if (selection.empty())
    throw Error(ErrorKind::InvalidArgument, "selection is empty");
  if (test.labels.empty())
    throw Error(ErrorKind::InvalidArgument, "test split is empty");
  MatrixXd x(static_cast<Eigen::Index>(selection.size()), features.dim());
  std::vector<std::string> labels;
  labels.reserve(selection.size());
  for (std::size_t i = 0; i < selection.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = features[selection[i].id].transpose();
    labels.push_back(selection[i].class_label);
  }
  const auto model = CentroidClassifier::fit(x, labels);
  for (const auto& label : std::set<std::string>(test.labels.begin(), test.labels.end()))
    if (!std::binary_search(model.classes.begin(), model.classes.end(), label))
      throw Error(ErrorKind::MissingClass,
                  "selection has no records of test class '" + label + "'", label);

  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < test.features.rows(); ++i) {
    const int predicted = model.predict(test.features.row(i).transpose());
    if (model.classes[static_cast<std::size_t>(predicted)] ==
        test.labels[static_cast<std::size_t>(i)])
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.labels.size());
}

std::pair<double, double> mean_and_std(std::span<const double> values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

std::vector<BenchResult> run_sweep(const SyntheticSpec& spec,
                                   std::span<const Strategy> strategies,
                                   std::span<const int> ipcs,
                                   std::span<const int> pool_factors, int repeats,
                                   const SamplingConfig& base) {
  if (repeats < 3)
    throw Error(ErrorKind::InvalidArgument, "repeats must be >= 3", "repeats");
  if (strategies.empty() || ipcs.empty() || pool_factors.empty())
    throw Error(ErrorKind::InvalidArgument, "sweep axes must be non-empty");

  struct Samples {
    std::vector<double> accuracy;
    std::vector<double> tv;
  };
  // Keyed by (strategy index, ipc index, pool factor index).
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, Samples> cells;

  for (std::size_t ii = 0; ii < ipcs.size(); ++ii) {
    for (std::size_t pi = 0; pi < pool_factors.size(); ++pi) {
      for (int rep = 0; rep < repeats; ++rep) {
        SyntheticSpec cell_spec = spec;
        cell_spec.ipc = ipcs[ii];
        cell_spec.pool_factor = pool_factors[pi];
        cell_spec.seed = derive_seed(spec.seed, "repeat", static_cast<std::uint64_t>(rep));
        cell_spec.binning = base.binning;
        const SyntheticData data = generate_synthetic(cell_spec);

        for (std::size_t si = 0; si < strategies.size(); ++si) {
          SamplingConfig config = base;
          config.seed = cell_spec.seed;
          config.pool_factor = pool_factors[pi];
          const auto manifest = sample_distilled(data.original, data.pool, ipcs[ii],
                                                 strategies[si], config);
          double tv = 0.0;
          for (const auto& report : manifest.classes)
            tv += total_variation(selected_distribution(report), report.target.weights);
          tv /= static_cast<double>(manifest.classes.size());
          auto& samples = cells[{si, ii, pi}];
          samples.accuracy.push_back(
              evaluate_downstream(manifest.records, data.features, data.test));
          samples.tv.push_back(tv);
        }
      }
    }
  }

  std::vector<BenchResult> results;
  for (const auto& [key, samples] : cells) {
    const auto [si, ii, pi] = key;
    BenchResult r;
    r.strategy = strategies[si];
    r.ipc = ipcs[ii];
    r.pool_factor = pool_factors[pi];
    std::tie(r.accuracy_mean, r.accuracy_std) = mean_and_std(samples.accuracy);
    r.tv_distance_to_target = mean_and_std(samples.tv).first;
    r.repeats = static_cast<int>(samples.accuracy.size());
    results.push_back(r);
  }
  return results;
}

BenchReport run_bench(const SyntheticSpec& spec, const BenchOptions& options,
                      const SamplingConfig& base) {
  BenchReport report;
  report.ipcs = options.ipcs;
  report.pool_factors = options.pool_factors;
  report.strategy_pool_factor = options.strategy_pool_factor;
  const int strategy_pf[] = {options.strategy_pool_factor};
  report.strategy_table = run_sweep(spec, kAllStrategies, options.ipcs, strategy_pf,
                                    options.repeats, base);
  const Strategy scale_only[] = {Strategy::Scale};
  report.pool_table = run_sweep(spec, scale_only, options.ipcs, options.pool_factors,
                                options.repeats, base);

  for (int ipc : options.ipcs) {
    const BenchResult* scale = nullptr;
    for (const auto& r : report.strategy_table)
      if (r.ipc == ipc && r.strategy == Strategy::Scale) scale = &r;
    bool holds = scale != nullptr;
    for (const auto& r : report.strategy_table)
      if (holds && r.ipc == ipc && r.strategy != Strategy::Scale &&
          scale->accuracy_mean < r.accuracy_mean - r.accuracy_std)
        holds = false;
    report.scale_ordering_holds.push_back(holds);
  }
  return report;
}

}  // namespace dgs
