#include <doctest.h>

#include <cmath>
#include <random>

#include "dgs/transform.hpp"
#include "oracles.hpp"

using dgs::DifficultyHistogram;
using dgs::ErrorKind;
using dgs::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

VectorXd vec(const oracle::Vec& xs) {
  return Eigen::Map<const VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

oracle::Vec stdvec(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

DifficultyHistogram hist_of(const VectorXd& counts) {
  DifficultyHistogram h;
  h.spec.bin_count = static_cast<int>(counts.size());
  h.counts = counts;
  h.total = counts.sum();
  h.class_label = "c";
  return h;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const dgs::Error& e) {
    return e.kind();
  }
  FAIL("expected dgs::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("clip examples") {
  const double eps = 1e-6;
  const VectorXd c = vec({5, 3, 2, 4});
  CHECK(dgs::clip(c, 0, 0, eps) == vec({5 + eps, 3 + eps, 2 + eps, 4 + eps}));
  CHECK(dgs::clip(c, 1, 1, eps) == vec({eps, 3 + eps, 2 + eps, eps}));
  CHECK(kind_of([&] { dgs::clip(c, 2, 2, eps); }) == ErrorKind::InvalidThreshold);
  CHECK(kind_of([&] { dgs::clip(c, 3, 0, eps); }) == ErrorKind::InvalidThreshold);
  CHECK(kind_of([&] { dgs::clip(c, 0, 0, 0.0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("clip agrees with the Heaviside form") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 30);
    oracle::Vec c(n);
    for (auto& x : c) x = static_cast<double>(rng() % 50);
    const int b = static_cast<int>(rng() % (n - 1));
    const int t = static_cast<int>(rng() % (n - 1 - b));
    const double eps = 1e-3 * (1 + static_cast<double>(rng() % 10));
    CHECK(dgs::clip(vec(c), b, t, eps) == vec(oracle::clip(c, b, t, eps)));
  }
}

TEST_CASE("log_transform examples") {
  const VectorXd a = dgs::log_transform(vec({1, 10, 100}));
  CHECK(a[0] == 0.0);
  CHECK(a[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(a[2] == 1.0);

  const double e = std::exp(1.0);
  const VectorXd b = dgs::log_transform(vec({e, e, e * e}));
  CHECK(b[0] == 0.0);
  CHECK(b[1] == 0.0);
  CHECK(b[2] == doctest::Approx(1.0).epsilon(1e-15));

  // Both floored bins map to 0; reference values computed to 40 digits.
  const VectorXd c = dgs::log_transform(dgs::clip(vec({5, 3, 2, 4}), 1, 1, 1e-6));
  CHECK(c[0] == 0.0);
  CHECK(c[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c[2] == doctest::Approx(0.972813357074438438).epsilon(1e-14));
  CHECK(c[3] == 0.0);

  CHECK(kind_of([] { dgs::log_transform(vec({2, 2, 2})); }) ==
        ErrorKind::ConstantDistribution);
  CHECK(kind_of([] { dgs::log_transform(vec({0, 1, 2})); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("log_transform matches the oracle and keeps order") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 37);
    oracle::Vec c(n);
    for (auto& x : c) x = static_cast<double>(rng() % 200);
    c[rng() % n] += 1;
    const int b = static_cast<int>(rng() % (n - 1));
    const int t = static_cast<int>(rng() % (n - 1 - b));
    double total = 0;
    for (double x : c) total += x;
    const double eps = 1e-6 * total;
    const auto clipped = oracle::clip(c, b, t, eps);
    const auto expect = oracle::log_transform(clipped);
    if (expect.empty()) continue;
    const VectorXd got = dgs::log_transform(vec(clipped));
    for (int i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    for (int i = b; i <= n - 1 - t; ++i)
      for (int j = b; j <= n - 1 - t; ++j)
        if (c[i] <= c[j]) CHECK(got[i] <= got[j]);
    Eigen::Index lo = 0, hi = 0;
    vec(clipped).minCoeff(&lo);
    vec(clipped).maxCoeff(&hi);
    CHECK(got[lo] == 0.0);
    CHECK(got[hi] == 1.0);
    CHECK(got.minCoeff() >= 0.0);
    CHECK(got.maxCoeff() <= 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (clipped[i] == clipped[j]) CHECK(got[i] == got[j]);
  }
}

TEST_CASE("kl_divergence examples") {
  const VectorXd p = vec({0.2, 0.3, 0.5});
  CHECK(dgs::kl_divergence(p, p) == 0.0);
  CHECK(dgs::kl_divergence(vec({1, 0}), vec({0.5, 0.5})) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(kind_of([] { dgs::kl_divergence(vec({1, 0}), vec({0.2, 0.3, 0.5})); }) ==
        ErrorKind::LengthMismatch);
  CHECK(kind_of([] { dgs::kl_divergence(vec({0.5, 0.6}), vec({0.5, 0.5})); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("kl_divergence against a second summation") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 40);
    oracle::Vec a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = (rng() % 5 == 0) ? 0.0 : std::generate_canonical<double, 53>(rng);
      b[i] = 1e-3 + std::generate_canonical<double, 53>(rng);
    }
    a[0] += 0.1;
    const auto p = oracle::normalized(a);
    const auto q = oracle::normalized(b);
    const double got = dgs::kl_divergence(vec(p), vec(q));
    CHECK(got >= 0.0);
    CHECK(std::abs(got - oracle::kl(p, q)) <= 1e-12);
    CHECK(dgs::kl_divergence(vec(p), vec(p)) == 0.0);
  }
}

TEST_CASE("uniform histogram fits (0,0)") {
  const auto fit = dgs::fit_thresholds(hist_of(VectorXd::Constant(6, 100.0)));
  CHECK(fit.params.bottom_clip == 0);
  CHECK(fit.params.top_clip == 0);
  CHECK(fit.diagnostics.objective_value == 0.0);
  CHECK(fit.diagnostics.constant_fallback);
  CHECK(fit.params.epsilon == doctest::Approx(600e-6));

  const auto g = oracle::grid_minimum(oracle::Vec(6, 100.0), 0.5, 600e-6, 1e-13);
  CHECK(g.b == 0);
  CHECK(g.t == 0);
}

TEST_CASE("lambda one scores only the distance to the original") {
  const VectorXd c = vec({40, 25, 10, 5, 3, 1, 0, 0});
  const auto h = hist_of(c);
  const double eps = dgs::scaled_epsilon(h);
  const auto cell = dgs::threshold_objective(h, 0, 0, 1.0, eps);
  const auto f = dgs::transformed_distribution(c, 0, 0, eps).distribution;
  const VectorXd ref = dgs::normalize(c, std::optional(eps));
  CHECK(cell.value == doctest::Approx(dgs::kl_divergence(f, ref)).epsilon(1e-15));
  CHECK(cell.value == doctest::Approx(oracle::objective(stdvec(c), 0, 0, 1.0, eps).value)
                          .epsilon(1e-12));
}

TEST_CASE("Beta(2,8) grid matches a full recomputation") {
  const auto counts = oracle::beta_shaped_counts(2, 8, 20, 2500);
  const auto h = hist_of(vec(counts));
  const auto fit = dgs::fit_thresholds(h, 0.5);
  const double eps = 1e-6 * h.total;
  const auto g = oracle::grid_minimum(counts, 0.5, eps, 1e-13);
  CHECK(std::abs(fit.diagnostics.objective_value - g.value) <= 1e-12);
  CHECK(fit.params.bottom_clip == g.b);
  CHECK(fit.params.top_clip == g.t);

  const auto& grid = fit.diagnostics.objective_grid;
  for (int b = 0; b < 19; ++b)
    for (int t = 0; t < 19; ++t) {
      if (b + t <= 18) {
        CHECK(std::abs(grid(b, t) - oracle::objective(counts, b, t, 0.5, eps).value) <= 1e-12);
        CHECK(fit.diagnostics.objective_value <= grid(b, t) + 1e-13);
      } else {
        CHECK(std::isinf(grid(b, t)));
      }
    }
  const auto& d = fit.diagnostics;
  CHECK(std::abs(d.objective_value - (0.5 * d.kl_to_original + 0.5 * d.kl_to_uniform)) <= 1e-12);
  CHECK(std::abs(d.objective_value - grid.minCoeff()) <= 1e-13);
}

TEST_CASE("symmetric Beta(2,2) histogram resolves its tie to (0,1)") {
  // Reference values computed to 40 digits.
  const VectorXd c = vec({44, 111, 144, 144, 111, 44});
  const auto fit = dgs::fit_thresholds(hist_of(c), 0.5);
  CHECK(fit.params.bottom_clip == 0);
  CHECK(fit.params.top_clip == 1);
  CHECK(fit.diagnostics.objective_value ==
        doctest::Approx(0.16166213047549795425).epsilon(1e-12));
  CHECK(std::abs(fit.diagnostics.objective_grid(0, 1) - fit.diagnostics.objective_grid(1, 0)) <
        1e-13);
}

TEST_CASE("single-bin histogram fits with the uniform fallback flagged") {
  VectorXd c = VectorXd::Zero(5);
  c[2] = 10;
  const auto fit = dgs::fit_thresholds(hist_of(c));
  CHECK(fit.diagnostics.fallback_cells > 0);
  CHECK(std::isfinite(fit.diagnostics.objective_value));
  CHECK(kind_of([] { dgs::fit_thresholds(hist_of(VectorXd::Zero(5))); }) ==
        ErrorKind::DegenerateDistribution);
}

TEST_CASE("apply_transform lowers the peak of an easy-biased histogram") {
  const auto h = hist_of(vec(oracle::beta_shaped_counts(2, 8, 20, 2500)));
  const auto fit = dgs::fit_thresholds(h);
  const auto out = dgs::apply_transform(h, fit.params);
  CHECK(out.distribution.maxCoeff() < dgs::normalize(h).maxCoeff());
  CHECK(std::abs(out.distribution.sum() - 1.0) <= 1e-12);

  dgs::TransformParams bad;
  bad.bottom_clip = 10;
  bad.top_clip = 10;
  CHECK(kind_of([&] { dgs::apply_transform(h, bad); }) == ErrorKind::InvalidThreshold);
}

TEST_CASE("apply_transform of a log-uniform input is uniform") {
  // Constant counts give a constant clipped vector.
  const auto out = dgs::apply_transform(hist_of(VectorXd::Constant(7, 3.0)), {});
  CHECK(out.constant_fallback);
  CHECK(out.distribution.isApprox(VectorXd::Constant(7, 1.0 / 7)));
}

TEST_CASE("apply_transform output sums to one") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 37);
    VectorXd c(n);
    for (auto& x : c) x = static_cast<double>(rng() % 100);
    c[0] += 1;
    dgs::TransformParams p;
    p.bottom_clip = static_cast<int>(rng() % (n - 1));
    p.top_clip = static_cast<int>(rng() % (n - 1 - p.bottom_clip));
    p.epsilon = 1e-6 * c.sum();
    const auto out = dgs::apply_transform(hist_of(c), p);
    CHECK(std::abs(out.distribution.sum() - 1.0) <= 1e-12);
    CHECK((out.distribution.array() >= 0).all());
  }
}

TEST_CASE("scaling counts and epsilon together leaves the transform unchanged") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 20);
    VectorXd c(n);
    for (auto& x : c) x = static_cast<double>(rng() % 100);
    c[0] += 1;
    const int b = static_cast<int>(rng() % (n - 1));
    const int t = static_cast<int>(rng() % (n - 1 - b));
    const double eps = 1e-3;
    const VectorXd base = dgs::clip(c, b, t, eps);
    if (!(base.maxCoeff() > base.minCoeff())) continue;
    const VectorXd f = dgs::log_transform(base);
    for (double scale : {2.0, 8.0, 0.25, 1024.0}) {
      const VectorXd g = dgs::log_transform(dgs::clip((c * scale).eval(), b, t, eps * scale));
      CHECK(g == f);
    }
  }
}

TEST_CASE("log transform flattens Beta-shaped histograms with empty tails") {
  std::mt19937_64 rng(31);
  int tested = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const double a = 1.2 + 8 * std::generate_canonical<double, 53>(rng);
    const double b = 1.2 + 8 * std::generate_canonical<double, 53>(rng);
    const int n = 8 + static_cast<int>(rng() % 33);
    const auto counts = oracle::beta_density_counts(a, b, n, 50 + static_cast<double>(rng() % 2000));
    if (std::count(counts.begin(), counts.end(), 0.0) == 0) continue;
    ++tested;
    const auto h = hist_of(vec(counts));
    dgs::TransformParams p;
    p.epsilon = dgs::scaled_epsilon(h);
    const auto out = dgs::apply_transform(h, p);
    CHECK(oracle::variance(stdvec(out.distribution)) < oracle::variance(oracle::normalized(counts)));
  }
  CHECK(tested > 100);
}

TEST_CASE("flattening fails for a two-level histogram") {
  // Regression: the min bin maps to 0, so the spread grows.
  const auto h = hist_of(vec({50, 100, 50, 100}));
  dgs::TransformParams p;
  p.epsilon = dgs::scaled_epsilon(h);
  const auto out = dgs::apply_transform(h, p);
  CHECK(out.distribution.isApprox(vec({0, 0.5, 0, 0.5})));
  CHECK(oracle::variance(stdvec(out.distribution)) >
        oracle::variance(oracle::normalized({50, 100, 50, 100})));
}

TEST_CASE("fitted objective is the grid minimum on random histograms") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 17);
    VectorXd c(n);
    for (auto& x : c) x = static_cast<double>(rng() % 60);
    c[rng() % n] += 1;
    const double lambda = static_cast<double>(rng() % 11) / 10.0;
    const auto fit = dgs::fit_thresholds(hist_of(c), lambda);
    const auto g = oracle::grid_minimum(stdvec(c), lambda, 1e-6 * c.sum(), 1e-13);
    CHECK(std::abs(fit.diagnostics.objective_value - g.value) <= 1e-12);
    CHECK(fit.params.bottom_clip == g.b);
    CHECK(fit.params.top_clip == g.t);
    CHECK(fit.params.lambda == lambda);
  }
}

TEST_CASE("TransformParams validation") {
  dgs::TransformParams p;
  CHECK_NOTHROW(p.validate(4));
  p.bottom_clip = 1;
  p.top_clip = 2;
  CHECK(kind_of([&] { p.validate(4); }) == ErrorKind::InvalidThreshold);
  p = {};
  p.epsilon = -1;
  CHECK(kind_of([&] { p.validate(4); }) == ErrorKind::InvalidArgument);
  p = {};
  p.lambda = 1.5;
  CHECK(kind_of([&] { p.validate(4); }) == ErrorKind::InvalidArgument);
}
