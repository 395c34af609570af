#include "dgs/cli.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "dgs/histogram.hpp"
#include "dgs/io.hpp"

namespace dgs::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string manifest;
  std::string original;
  std::string pool;
  std::optional<int> ipc;
  std::optional<std::string> strategy;
  bool no_transform = false;
  std::optional<std::string> fit_on;
};

io::RunConfig resolve_config(const Options& opt) {
  io::RunConfig cfg = opt.config_path.empty() ? io::parse_config(Json::object())
                                              : io::load_config(opt.config_path);
  if (opt.seed) cfg.sampling.seed = *opt.seed;
  if (opt.ipc) cfg.ipc = *opt.ipc;
  if (opt.strategy) {
    try {
      cfg.strategy = parse_strategy(*opt.strategy);
    } catch (const Error& e) {
      throw Error(ErrorKind::Validation, std::string("--strategy: ") + e.what(), "$.strategy");
    }
  }
  if (opt.no_transform) cfg.sampling.transform_enabled = false;
  if (opt.fit_on) {
    try {
      cfg.sampling.fit_on = parse_fit_source(*opt.fit_on);
    } catch (const Error& e) {
      throw Error(ErrorKind::Validation, std::string("--fit-on: ") + e.what(),
                  "$.fit_thresholds_on");
    }
  }
  io::validate_config(cfg);
  return cfg;
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir, dir);
  return p;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::map<std::string, double> class_means(std::span<const ScoreRecord> records) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& r : records) {
    auto& [sum, n] = acc[r.class_label];
    sum += r.difficulty;
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [label, sn] : acc) out[label] = sn.first / sn.second;
  return out;
}

std::optional<double> lookup(const std::map<std::string, double>& m, const std::string& key) {
  auto it = m.find(key);
  return it == m.end() ? std::nullopt : std::optional(it->second);
}

// Safe file stem for a class label.
std::string file_stem(std::string_view label) {
  std::string s;
  for (char c : label) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return s.empty() ? "class" : s;
}

int cmd_histogram(const Options& opt, std::ostream& out) {
  const auto cfg = resolve_config(opt);
  const auto records = io::load_manifest(opt.manifest);
  const auto hists = build_class_histograms(records, cfg.sampling.binning);
  const auto means = class_means(records);

  Json doc{{"provenance", io::provenance(cfg)}, {"histograms", Json::array()}};
  std::vector<io::PlotPanel> panels;
  for (const auto& [label, hist] : hists) {
    Json h = io::to_json(hist);
    const auto mean = lookup(means, label);
    h["mean_difficulty"] = mean ? Json(*mean) : Json(nullptr);
    doc["histograms"].push_back(std::move(h));
    panels.push_back({hist, label, mean});
  }
  if (opt.out_dir.empty()) {
    out << dump(doc);
    return 0;
  }
  const auto dir = prepare_out_dir(opt.out_dir);
  io::write_file_atomic(dir / "histograms.json", dump(doc));
  if (!panels.empty()) io::emit_histogram_plot(panels, dir / "histograms.svg");
  out << "wrote " << (dir / "histograms.json").string() << '\n';
  return 0;
}

int cmd_fit(const Options& opt, std::ostream& out) {
  const auto cfg = resolve_config(opt);
  const auto records = io::load_manifest(opt.manifest);
  const auto hists = build_class_histograms(records, cfg.sampling.binning);

  Json doc{{"provenance", io::provenance(cfg)}, {"classes", Json::array()}};
  for (const auto& [label, hist] : hists) {
    const auto fit = fit_thresholds(hist, cfg.sampling.lambda,
                                    scaled_epsilon(hist, cfg.sampling.epsilon_scale));
    doc["classes"].push_back({{"class", label},
                              {"params", io::to_json(fit.params)},
                              {"diagnostics", io::to_json(fit.diagnostics)}});
  }
  if (opt.out_dir.empty()) {
    out << dump(doc);
    return 0;
  }
  const auto dir = prepare_out_dir(opt.out_dir);
  io::write_file_atomic(dir / "fit.json", dump(doc));
  out << "wrote " << (dir / "fit.json").string() << '\n';
  return 0;
}

int cmd_sample(const Options& opt, std::ostream& out) {
  const auto cfg = resolve_config(opt);
  const auto original = io::load_manifest(opt.original);
  const auto pool = io::load_manifest(opt.pool);
  const auto manifest =
      sample_distilled(original, pool, cfg.ipc, cfg.strategy, cfg.sampling);

  Json doc{{"provenance", io::provenance(cfg)}};
  const Json body = io::to_json(manifest);
  for (const auto& [key, value] : body.items()) doc[key] = value;

  const auto dir = prepare_out_dir(opt.out_dir);
  io::write_file_atomic(dir / "selection.json", dump(doc));
  io::save_manifest(dir / "distilled.jsonl", manifest.records);

  const auto original_means = class_means(original);
  const auto pool_means = class_means(pool);
  const auto selected_means = class_means(manifest.records);
  const auto plot_dir = dir / "plots";
  fs::create_directories(plot_dir);
  for (const auto& c : manifest.classes) {
    DifficultyHistogram selected = c.original_hist;
    for (std::size_t k = 0; k < c.selected_per_bin.size(); ++k)
      selected.counts[static_cast<Eigen::Index>(k)] = c.selected_per_bin[k];
    selected.total = c.plan.ipc;
    const io::PlotPanel panels[] = {
        {c.original_hist, "original " + c.class_label, lookup(original_means, c.class_label)},
        {c.pool_hist, "image pool " + c.class_label, lookup(pool_means, c.class_label)},
        {selected, "distilled " + c.class_label, lookup(selected_means, c.class_label)},
    };
    io::emit_histogram_plot(panels, plot_dir / (file_stem(c.class_label) + ".svg"));
  }
  out << "selected " << manifest.records.size() << " records over "
      << manifest.classes.size() << " classes; wrote " << (dir / "selection.json").string()
      << '\n';
  return 0;
}

int cmd_synth(const Options& opt, std::ostream& out) {
  const auto cfg = resolve_config(opt);
  SyntheticSpec spec = cfg.synthetic;
  spec.seed = cfg.sampling.seed;
  spec.ipc = cfg.ipc;
  spec.pool_factor = cfg.sampling.pool_factor;
  spec.binning = cfg.sampling.binning;
  auto data = generate_synthetic(spec);

  auto with_features = [&](std::vector<ScoreRecord> records) {
    for (auto& r : records) {
      Json f = Json::array();
      const auto x = data.features[r.id];
      for (Eigen::Index i = 0; i < x.size(); ++i) f.push_back(x[i]);
      r.extra.emplace_back("features", f.dump());
    }
    return records;
  };
  const auto dir = prepare_out_dir(opt.out_dir);
  io::save_manifest(dir / "original.jsonl", with_features(data.original));
  io::save_manifest(dir / "pool.jsonl", with_features(data.pool));

  std::string test;
  for (Eigen::Index i = 0; i < data.test.features.rows(); ++i) {
    Json row{{"class", data.test.labels[static_cast<std::size_t>(i)]},
             {"features", io::to_json(VectorXd(data.test.features.row(i).transpose()))}};
    test += row.dump() + "\n";
  }
  io::write_file_atomic(dir / "test.jsonl", test);
  io::write_file_atomic(dir / "synth.json",
                        dump({{"provenance", io::provenance(cfg)},
                              {"original_law_tv", data.original_law_tv},
                              {"pool_law_tv", data.pool_law_tv},
                              {"original_records", data.original.size()},
                              {"pool_records", data.pool.size()}}));
  out << "wrote " << data.original.size() << " original and " << data.pool.size()
      << " pool records to " << dir.string() << '\n';
  return 0;
}

int cmd_bench(const Options& opt, std::ostream& out) {
  const auto cfg = resolve_config(opt);
  SyntheticSpec spec = cfg.synthetic;
  spec.seed = cfg.sampling.seed;
  spec.binning = cfg.sampling.binning;
  const auto report = run_bench(spec, cfg.bench, cfg.sampling);
  const std::string text = io::bench_text(report);
  out << text;
  if (opt.out_dir.empty()) return 0;

  const auto dir = prepare_out_dir(opt.out_dir);
  Json rows = Json::array();
  for (const auto& r : report.strategy_table) {
    auto j = io::to_json(r);
    j["table"] = "strategy";
    rows.push_back(std::move(j));
  }
  for (const auto& r : report.pool_table) {
    auto j = io::to_json(r);
    j["table"] = "pool_size";
    rows.push_back(std::move(j));
  }
  Json ordering = Json::array();
  for (std::size_t i = 0; i < report.ipcs.size(); ++i)
    ordering.push_back({{"ipc", report.ipcs[i]},
                        {"flag", report.scale_ordering_holds[i] ? "pass" : "warn"}});
  io::write_file_atomic(dir / "bench.csv", io::bench_csv(report));
  io::write_file_atomic(dir / "bench.txt", text);
  io::write_file_atomic(dir / "bench.json", dump({{"provenance", io::provenance(cfg)},
                                                  {"results", rows},
                                                  {"scale_ordering", ordering}}));
  return 0;
}

void report_error(std::ostream& err, std::string_view kind, const std::string& message,
                  const std::string& subject = {}, std::optional<std::size_t> line = {}) {
  Json e{{"kind", kind}, {"message", message}};
  if (!subject.empty()) e["subject"] = subject;
  if (line) e["line"] = *line;
  err << Json{{"error", e}}.dump() << '\n';
}

}  // namespace

int run(std::span<const std::string> argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Difficulty-guided sampling of distilled datasets from a generated image pool",
               "dgs"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Seed for every random choice");
  };

  auto* histogram = app.add_subcommand("histogram", "Per-class difficulty histograms and plot");
  add_common(histogram);
  histogram->add_option("manifest", opt.manifest, "Score manifest (JSON lines)")->required();
  histogram->add_option("--out", opt.out_dir, "Output directory (default: JSON to stdout)");

  auto* fit = app.add_subcommand("fit", "Fit clipping thresholds per class");
  add_common(fit);
  fit->add_option("manifest", opt.manifest, "Score manifest (JSON lines)")->required();
  fit->add_option("--out", opt.out_dir, "Output directory (default: JSON to stdout)");

  auto* sample = app.add_subcommand("sample", "Select a distilled subset from an image pool");
  add_common(sample);
  sample->add_option("--original", opt.original, "Original dataset manifest")->required();
  sample->add_option("--pool", opt.pool, "Image pool manifest")->required();
  sample->add_option("--out", opt.out_dir, "Output directory")->required();
  sample->add_option("--ipc", opt.ipc, "Images per class");
  sample->add_option("--strategy", opt.strategy, "scale, hill, ground, slope or cliff");
  sample->add_flag("--no-transform", opt.no_transform, "Use the raw original histogram");
  sample->add_option("--fit-on", opt.fit_on, "Histogram to fit thresholds on: pool|original");

  auto* synth = app.add_subcommand("synth", "Generate synthetic original and pool manifests");
  add_common(synth);
  synth->add_option("--out", opt.out_dir, "Output directory")->required();
  synth->add_option("--ipc", opt.ipc, "Images per class (pool = pool_factor x ipc)");

  auto* bench = app.add_subcommand("bench", "Strategy and pool-size sweeps on synthetic data");
  add_common(bench);
  bench->add_option("--out", opt.out_dir, "Output directory for csv/json/txt tables");

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (histogram->parsed()) return cmd_histogram(opt, out);
    if (fit->parsed()) return cmd_fit(opt, out);
    if (sample->parsed()) return cmd_sample(opt, out);
    if (synth->parsed()) return cmd_synth(opt, out);
    if (bench->parsed()) return cmd_bench(opt, out);
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what(), e.subject(), e.line());
    return 1;
  } catch (const std::exception& e) {
    report_error(err, "internal_error", e.what());
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace dgs::cli
