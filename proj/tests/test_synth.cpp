#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "dgs/histogram.hpp"
#include "dgs/rng.hpp"
#include "dgs/synth.hpp"
#include "oracles.hpp"

using dgs::ErrorKind;
using dgs::ScoreRecord;
using dgs::Strategy;
using dgs::SyntheticSpec;
using dgs::VectorXd;

namespace {

SyntheticSpec small_spec(std::uint64_t seed = 1) {
  SyntheticSpec s;
  s.class_count = 4;
  s.per_class_original = 200;
  s.ipc = 10;
  s.test_per_class = 100;
  s.seed = seed;
  return s;
}

std::vector<double> difficulties(const std::vector<ScoreRecord>& rs) {
  std::vector<double> out;
  for (const auto& r : rs) out.push_back(r.difficulty);
  return out;
}

double mean(const std::vector<double>& xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("beta bin masses agree with quadrature") {
  const dgs::BinningSpec spec{20};
  for (auto [a, b] : {std::pair{2.0, 2.0}, {2.0, 8.0}, {1.0, 1.0}, {3.5, 2.5}}) {
    const VectorXd m = dgs::beta_bin_masses({a, b}, spec);
    const auto q = oracle::beta_masses(a, b, 20);
    CHECK(std::abs(m.sum() - 1.0) <= 1e-12);
    for (int k = 0; k < 20; ++k) CHECK(std::abs(m[k] - q[k]) <= 1e-9);
  }
}

TEST_CASE("huge separation makes records easy") {
  SyntheticSpec s = small_spec();
  s.class_count = 2;
  s.class_separation = 60;
  s.original_law.reset();
  s.pool_law.reset();
  const auto data = dgs::generate_synthetic(s);
  for (double d : difficulties(data.original)) CHECK(d < 1e-6);
  for (double d : difficulties(data.pool)) CHECK(d < 1e-6);
}

TEST_CASE("vanishing separation approaches chance confidence") {
  SyntheticSpec s = small_spec();
  s.class_count = 5;
  s.per_class_original = 5000;
  s.class_separation = 1e-6;
  s.original_law.reset();
  s.pool_law.reset();
  const auto data = dgs::generate_synthetic(s);
  const auto d = difficulties(data.original);
  CHECK(mean(d) == doctest::Approx(1.0 - 1.0 / 5).epsilon(0.02));
  for (double x : d) CHECK(std::abs(x - 0.8) < 0.05);
}

TEST_CASE("vanishing separation cannot realize a Beta law") {
  SyntheticSpec s = small_spec();
  s.class_separation = 1e-6;
  s.attempt_budget = 20;
  try {
    dgs::generate_synthetic(s);
    FAIL("expected spec-infeasible");
  } catch (const dgs::Error& e) {
    CHECK(e.kind() == ErrorKind::SpecInfeasible);
    CHECK(std::string(e.what()).find("Beta") != std::string::npos);
  }
}

TEST_CASE("easy-biased pool peaks below the original") {
  const auto data = dgs::generate_synthetic(small_spec(3));
  const dgs::BinningSpec spec{};
  for (const auto& [label, orig] : dgs::build_class_histograms(data.original, spec)) {
    const auto pool = dgs::build_histogram(data.pool, spec, label);
    Eigen::Index a = 0, b = 0;
    pool.counts.maxCoeff(&a);
    orig.counts.maxCoeff(&b);
    CHECK(a < b);
  }
}

TEST_CASE("default spec realizes its laws within 0.05") {
  SyntheticSpec s;
  s.seed = 11;
  const auto data = dgs::generate_synthetic(s);
  CHECK(data.original.size() == 5000);
  CHECK(data.pool.size() == 10 * 5 * 50);
  CHECK(data.original_law_tv <= 0.05);
  CHECK(data.pool_law_tv <= 0.05);

  // Recompute per class from the records with the quadrature masses.
  const dgs::BinningSpec spec{};
  const auto orig_q = oracle::beta_masses(2, 2, 20);
  const auto pool_q = oracle::beta_masses(2, 8, 20);
  VectorXd oq = Eigen::Map<const VectorXd>(orig_q.data(), 20);
  VectorXd pq = Eigen::Map<const VectorXd>(pool_q.data(), 20);
  for (const auto& [label, h] : dgs::build_class_histograms(data.original, spec))
    CHECK(dgs::total_variation(dgs::normalize(h), oq) <= 0.05);
  for (const auto& [label, h] : dgs::build_class_histograms(data.pool, spec))
    CHECK(dgs::total_variation(dgs::normalize(h), pq) <= 0.05);
}

TEST_CASE("recorded difficulty is the scorer's") {
  const auto data = dgs::generate_synthetic(small_spec(4));
  for (std::size_t i = 0; i < data.original.size(); i += 37) {
    const auto& r = data.original[i];
    CHECK(r.difficulty == data.scorer.difficulty(data.features[r.id], r.class_label));
    const VectorXd p = data.scorer.probabilities(data.features[r.id]);
    CHECK(std::abs(p.sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("generation is seed-deterministic") {
  const auto a = dgs::generate_synthetic(small_spec(5));
  const auto b = dgs::generate_synthetic(small_spec(5));
  const auto c = dgs::generate_synthetic(small_spec(6));
  REQUIRE(a.pool.size() == b.pool.size());
  for (std::size_t i = 0; i < a.pool.size(); ++i) {
    CHECK(a.pool[i].id == b.pool[i].id);
    CHECK(a.pool[i].difficulty == b.pool[i].difficulty);
    CHECK(a.features[a.pool[i].id] == b.features[b.pool[i].id]);
  }
  CHECK(a.test.features == b.test.features);
  CHECK(a.original[0].difficulty != c.original[0].difficulty);

  std::set<std::string> ids;
  for (const auto& r : a.original) ids.insert(r.id);
  for (const auto& r : a.pool) ids.insert(r.id);
  CHECK(ids.size() == a.original.size() + a.pool.size());
}

TEST_CASE("spec validation") {
  auto bad = [](auto mutate) {
    SyntheticSpec s;
    mutate(s);
    try {
      s.validate();
    } catch (const dgs::Error& e) {
      return e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::InvalidSpec;
    }
    return false;
  };
  CHECK(bad([](SyntheticSpec& s) { s.class_count = 1; }));
  CHECK(bad([](SyntheticSpec& s) { s.class_separation = 0; }));
  CHECK(bad([](SyntheticSpec& s) { s.per_class_original = 0; }));
  CHECK(bad([](SyntheticSpec& s) { s.pool_law = dgs::BetaLaw{0, 2}; }));
  CHECK(bad([](SyntheticSpec& s) { s.binning.bin_count = 3; }));
}

TEST_CASE("full original set on a separable spec is nearly perfect") {
  SyntheticSpec s = small_spec(7);
  s.class_separation = 8;
  s.original_law.reset();
  s.pool_law.reset();
  const auto data = dgs::generate_synthetic(s);
  CHECK(dgs::evaluate_downstream(data.original, data.features, data.test) >= 0.95);
}

TEST_CASE("one record per class at the full centroids matches full accuracy") {
  auto data = dgs::generate_synthetic(small_spec(8));
  std::map<std::string, std::pair<VectorXd, int>> sums;
  for (const auto& r : data.original) {
    auto& [sum, count] = sums[r.class_label];
    if (count == 0) sum = VectorXd::Zero(data.features.dim());
    sum += data.features[r.id];
    ++count;
  }
  std::vector<ScoreRecord> centers;
  for (const auto& [label, sc] : sums) {
    ScoreRecord r{"center-" + label, label, 0.0, std::nullopt, {}};
    data.features.add(r.id, sc.first / sc.second);
    centers.push_back(r);
  }
  CHECK(dgs::evaluate_downstream(centers, data.features, data.test) ==
        dgs::evaluate_downstream(data.original, data.features, data.test));
}

TEST_CASE("permuted test labels give chance accuracy") {
  SyntheticSpec s = small_spec(9);
  s.class_count = 10;
  s.test_per_class = 300;
  const auto data = dgs::generate_synthetic(s);
  dgs::TestSplit shuffled = data.test;
  std::mt19937_64 rng(9);
  std::shuffle(shuffled.labels.begin(), shuffled.labels.end(), rng);
  CHECK(std::abs(dgs::evaluate_downstream(data.original, data.features, shuffled) - 0.1) <= 0.05);
}

TEST_CASE("selection missing a test class is rejected") {
  const auto data = dgs::generate_synthetic(small_spec(10));
  std::vector<ScoreRecord> partial;
  for (const auto& r : data.original)
    if (r.class_label != "class_02") partial.push_back(r);
  try {
    dgs::evaluate_downstream(partial, data.features, data.test);
    FAIL("accepted a selection without class_02");
  } catch (const dgs::Error& e) {
    CHECK(e.kind() == ErrorKind::MissingClass);
    CHECK(e.subject() == "class_02");
  }
}

TEST_CASE("mean_and_std uses the unbiased estimator") {
  const std::vector<double> xs{0.5, 0.7, 0.9};
  const auto [m, sd] = dgs::mean_and_std(xs);
  CHECK(m == doctest::Approx(0.7));
  CHECK(sd == doctest::Approx(0.2));
  const std::vector<double> one{0.3};
  CHECK(dgs::mean_and_std(one).second == 0.0);
}

TEST_CASE("one-cell sweep records its repeats") {
  const Strategy ground[] = {Strategy::Ground};
  const int ipcs[] = {10};
  const int pfs[] = {3};
  const auto results = dgs::run_sweep(small_spec(12), ground, ipcs, pfs, 3, {});
  REQUIRE(results.size() == 1);
  const auto& r = results[0];
  CHECK(r.strategy == Strategy::Ground);
  CHECK(r.ipc == 10);
  CHECK(r.pool_factor == 3);
  CHECK(r.repeats == 3);
  CHECK(r.accuracy_mean >= 0.0);
  CHECK(r.accuracy_mean <= 1.0);
  CHECK(r.accuracy_std >= 0.0);

  // Std is the unbiased spread of the per-repeat accuracies.
  std::vector<double> acc;
  for (int rep = 0; rep < 3; ++rep) {
    auto s = small_spec(12);
    s.ipc = 10;
    s.pool_factor = 3;
    s.seed = dgs::derive_seed(12, "repeat", static_cast<std::uint64_t>(rep));
    const auto data = dgs::generate_synthetic(s);
    dgs::SamplingConfig cfg;
    cfg.seed = s.seed;
    cfg.pool_factor = 3;
    const auto m = dgs::sample_distilled(data.original, data.pool, 10, Strategy::Ground, cfg);
    acc.push_back(dgs::evaluate_downstream(m.records, data.features, data.test));
  }
  const double mu = (acc[0] + acc[1] + acc[2]) / 3;
  double ss = 0;
  for (double a : acc) ss += (a - mu) * (a - mu);
  CHECK(r.accuracy_mean == doctest::Approx(mu).epsilon(1e-12));
  CHECK(r.accuracy_std == doctest::Approx(std::sqrt(ss / 2)).epsilon(1e-12));

  CHECK_THROWS_AS(dgs::run_sweep(small_spec(), ground, ipcs, pfs, 2, {}), dgs::Error);
}
