#include <cstdio>
#include <limits>
#include <fstream>
#include <set>

#include "dgs/io.hpp"
#include "dgs/rng.hpp"

namespace dgs::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::Validation, path + ": " + message, path);
}

void reject_unknown_keys(const Json& obj, const std::string& path,
                         std::initializer_list<std::string_view> known) {
  const std::set<std::string_view> allowed(known);
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) fail(path + "." + key, "unknown key");
}

const Json& require_object(const Json& value, const std::string& path) {
  if (!value.is_object()) fail(path, "expected an object");
  return value;
}

int get_int(const Json& value, const std::string& path) {
  if (!value.is_number_integer()) fail(path, "expected an integer");
  const auto v = value.get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    fail(path, "integer out of range");
  return static_cast<int>(v);
}

double get_real(const Json& value, const std::string& path) {
  if (!value.is_number()) fail(path, "expected a number");
  return value.get<double>();
}

bool get_bool(const Json& value, const std::string& path) {
  if (!value.is_boolean()) fail(path, "expected true or false");
  return value.get<bool>();
}

std::string get_string(const Json& value, const std::string& path) {
  if (!value.is_string()) fail(path, "expected a string");
  return value.get<std::string>();
}

std::vector<int> get_int_list(const Json& value, const std::string& path) {
  if (!value.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < value.size(); ++i)
    out.push_back(get_int(value[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::optional<BetaLaw> get_law(const Json& value, const std::string& path) {
  if (value.is_null()) return std::nullopt;
  require_object(value, path);
  reject_unknown_keys(value, path, {"alpha", "beta"});
  BetaLaw law;
  if (!value.contains("alpha") || !value.contains("beta"))
    fail(path, "expected both alpha and beta");
  law.alpha = get_real(value["alpha"], path + ".alpha");
  law.beta = get_real(value["beta"], path + ".beta");
  return law;
}

Json law_json(const std::optional<BetaLaw>& law) {
  if (!law) return nullptr;
  return Json{{"alpha", law->alpha}, {"beta", law->beta}};
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  require_object(doc, "$");
  reject_unknown_keys(doc, "$",
                      {"bin_count", "lambda", "epsilon_scale", "ipc", "pool_factor",
                       "strategy", "seed", "fit_thresholds_on", "transform_enabled",
                       "shape_overrides", "synthetic", "bench"});
  RunConfig cfg;
  auto& s = cfg.sampling;
  if (doc.contains("bin_count")) s.binning.bin_count = get_int(doc["bin_count"], "$.bin_count");
  if (doc.contains("lambda")) s.lambda = get_real(doc["lambda"], "$.lambda");
  if (doc.contains("epsilon_scale"))
    s.epsilon_scale = get_real(doc["epsilon_scale"], "$.epsilon_scale");
  if (doc.contains("ipc")) cfg.ipc = get_int(doc["ipc"], "$.ipc");
  if (doc.contains("pool_factor")) s.pool_factor = get_int(doc["pool_factor"], "$.pool_factor");
  if (doc.contains("strategy")) {
    const auto name = get_string(doc["strategy"], "$.strategy");
    try {
      cfg.strategy = parse_strategy(name);
    } catch (const Error& e) {
      fail("$.strategy", e.what());
    }
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() &&
                                               doc["seed"].get<long long>() >= 0))
      fail("$.seed", "expected a non-negative integer");
    s.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("fit_thresholds_on")) {
    const auto name = get_string(doc["fit_thresholds_on"], "$.fit_thresholds_on");
    try {
      s.fit_on = parse_fit_source(name);
    } catch (const Error& e) {
      fail("$.fit_thresholds_on", e.what());
    }
  }
  if (doc.contains("transform_enabled"))
    s.transform_enabled = get_bool(doc["transform_enabled"], "$.transform_enabled");
  if (doc.contains("shape_overrides")) {
    const auto& overrides = require_object(doc["shape_overrides"], "$.shape_overrides");
    for (const auto& [key, value] : overrides.items()) {
      const std::string path = "$.shape_overrides." + key;
      Strategy kind;
      try {
        kind = parse_strategy(key);
      } catch (const Error&) {
        fail(path, "unknown shape (expected hill, ground, slope or cliff)");
      }
      if (kind == Strategy::Scale) fail(path, "scale has no fixed shape to override");
      if (!value.is_array()) fail(path, "expected an array of weights");
      VectorXd w(static_cast<Eigen::Index>(value.size()));
      for (std::size_t i = 0; i < value.size(); ++i)
        w[static_cast<Eigen::Index>(i)] =
            get_real(value[i], path + "[" + std::to_string(i) + "]");
      s.shape_overrides[kind] = std::move(w);
    }
  }
  if (doc.contains("synthetic")) {
    const auto& syn = require_object(doc["synthetic"], "$.synthetic");
    reject_unknown_keys(syn, "$.synthetic",
                        {"class_count", "per_class_original", "feature_dim",
                         "class_separation", "test_per_class", "attempt_budget",
                         "original_law", "pool_law"});
    auto& sp = cfg.synthetic;
    if (syn.contains("class_count"))
      sp.class_count = get_int(syn["class_count"], "$.synthetic.class_count");
    if (syn.contains("per_class_original"))
      sp.per_class_original =
          get_int(syn["per_class_original"], "$.synthetic.per_class_original");
    if (syn.contains("feature_dim"))
      sp.feature_dim = get_int(syn["feature_dim"], "$.synthetic.feature_dim");
    if (syn.contains("class_separation"))
      sp.class_separation = get_real(syn["class_separation"], "$.synthetic.class_separation");
    if (syn.contains("test_per_class"))
      sp.test_per_class = get_int(syn["test_per_class"], "$.synthetic.test_per_class");
    if (syn.contains("attempt_budget"))
      sp.attempt_budget = get_int(syn["attempt_budget"], "$.synthetic.attempt_budget");
    if (syn.contains("original_law"))
      sp.original_law = get_law(syn["original_law"], "$.synthetic.original_law");
    if (syn.contains("pool_law"))
      sp.pool_law = get_law(syn["pool_law"], "$.synthetic.pool_law");
  }
  if (doc.contains("bench")) {
    const auto& b = require_object(doc["bench"], "$.bench");
    reject_unknown_keys(b, "$.bench",
                        {"ipcs", "pool_factors", "strategy_pool_factor", "repeats"});
    if (b.contains("ipcs")) cfg.bench.ipcs = get_int_list(b["ipcs"], "$.bench.ipcs");
    if (b.contains("pool_factors"))
      cfg.bench.pool_factors = get_int_list(b["pool_factors"], "$.bench.pool_factors");
    if (b.contains("strategy_pool_factor"))
      cfg.bench.strategy_pool_factor =
          get_int(b["strategy_pool_factor"], "$.bench.strategy_pool_factor");
    if (b.contains("repeats")) cfg.bench.repeats = get_int(b["repeats"], "$.bench.repeats");
  }
  validate_config(cfg);
  return cfg;
}

void validate_config(const RunConfig& cfg) {
  const auto& s = cfg.sampling;
  if (s.binning.bin_count < BinningSpec::kMinBinCount)
    fail("$.bin_count", "must be >= " + std::to_string(BinningSpec::kMinBinCount));
  if (!(s.lambda >= 0.0 && s.lambda <= 1.0)) fail("$.lambda", "must lie in [0, 1]");
  if (!(s.epsilon_scale > 0.0)) fail("$.epsilon_scale", "must be positive");
  if (cfg.ipc < 1) fail("$.ipc", "must be >= 1");
  if (s.pool_factor < 1) fail("$.pool_factor", "must be >= 1");
  for (const auto& [kind, w] : s.shape_overrides) {
    const std::string path = "$.shape_overrides." + std::string(to_string(kind));
    if (w.size() != s.binning.bin_count)
      fail(path, "expected " + std::to_string(s.binning.bin_count) + " weights, got " +
                     std::to_string(w.size()));
    if (!w.allFinite() || (w.array() < 0.0).any()) fail(path, "weights must be finite and >= 0");
    if (!(w.sum() > 0.0)) fail(path, "weights must not all be zero");
  }

  const auto& sp = cfg.synthetic;
  if (sp.class_count < 2) fail("$.synthetic.class_count", "must be >= 2");
  if (sp.per_class_original < 1) fail("$.synthetic.per_class_original", "must be >= 1");
  if (sp.feature_dim < 1) fail("$.synthetic.feature_dim", "must be >= 1");
  if (!(sp.class_separation > 0.0)) fail("$.synthetic.class_separation", "must be positive");
  if (sp.test_per_class < 1) fail("$.synthetic.test_per_class", "must be >= 1");
  if (sp.attempt_budget < 1) fail("$.synthetic.attempt_budget", "must be >= 1");
  for (const auto& [law, name] : {std::pair{&sp.original_law, "original_law"},
                                  std::pair{&sp.pool_law, "pool_law"}}) {
    if (!*law) continue;
    const std::string path = std::string("$.synthetic.") + name;
    if (!((*law)->alpha > 0.0)) fail(path + ".alpha", "must be positive");
    if (!((*law)->beta > 0.0)) fail(path + ".beta", "must be positive");
  }

  const auto& b = cfg.bench;
  if (b.ipcs.empty()) fail("$.bench.ipcs", "must not be empty");
  for (std::size_t i = 0; i < b.ipcs.size(); ++i)
    if (b.ipcs[i] < 1) fail("$.bench.ipcs[" + std::to_string(i) + "]", "must be >= 1");
  if (b.pool_factors.empty()) fail("$.bench.pool_factors", "must not be empty");
  for (std::size_t i = 0; i < b.pool_factors.size(); ++i)
    if (b.pool_factors[i] < 1)
      fail("$.bench.pool_factors[" + std::to_string(i) + "]", "must be >= 1");
  if (b.strategy_pool_factor < 1) fail("$.bench.strategy_pool_factor", "must be >= 1");
  if (b.repeats < 3) fail("$.bench.repeats", "must be >= 3");
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string(), path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Validation,
                path.string() + ": malformed JSON: " + e.what(), "$");
  }
  return parse_config(doc);
}

Json RunConfig::to_json() const {
  const auto& s = sampling;
  Json overrides = Json::object();
  for (const auto& [kind, w] : s.shape_overrides)
    overrides[std::string(dgs::to_string(kind))] = io::to_json(w);
  return Json{
      {"bin_count", s.binning.bin_count},
      {"lambda", s.lambda},
      {"epsilon_scale", s.epsilon_scale},
      {"ipc", ipc},
      {"pool_factor", s.pool_factor},
      {"strategy", dgs::to_string(strategy)},
      {"seed", s.seed},
      {"fit_thresholds_on", dgs::to_string(s.fit_on)},
      {"transform_enabled", s.transform_enabled},
      {"shape_overrides", overrides},
      {"synthetic",
       {{"class_count", synthetic.class_count},
        {"per_class_original", synthetic.per_class_original},
        {"feature_dim", synthetic.feature_dim},
        {"class_separation", synthetic.class_separation},
        {"test_per_class", synthetic.test_per_class},
        {"attempt_budget", synthetic.attempt_budget},
        {"original_law", law_json(synthetic.original_law)},
        {"pool_law", law_json(synthetic.pool_law)}}},
      {"bench",
       {{"ipcs", bench.ipcs},
        {"pool_factors", bench.pool_factors},
        {"strategy_pool_factor", bench.strategy_pool_factor},
        {"repeats", bench.repeats}}},
  };
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.to_json().dump())));
  return buf;
}

Json provenance(const RunConfig& config) {
  return Json{
      {"tool", "dgs"},
      {"version", kToolVersion},
      {"config_hash", config_hash(config)},
      {"seed", config.sampling.seed},
      {"config", config.to_json()},
      {"defaults",
       {{"bin_count", BinningSpec::kDefaultBinCount},
        {"lambda", TransformParams::kDefaultLambda},
        {"epsilon_scale", TransformParams::kDefaultEpsilonScale},
        {"pool_factor", SamplingConfig{}.pool_factor},
        {"cliff_ratio", kCliffRatio},
        {"rng", "mt19937_64 seeded with splitmix64(splitmix64(seed ^ fnv1a64(class)) + bin)"}}},
  };
}

}  // namespace dgs::io
