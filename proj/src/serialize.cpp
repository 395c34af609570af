#include <cmath>
#include <cstdio>
#include <sstream>

#include "dgs/io.hpp"

namespace dgs::io {

Json to_json(const VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json to_json(const DifficultyHistogram& hist) {
  return Json{{"class", hist.class_label},
              {"bin_count", hist.spec.bin_count},
              {"total", hist.total},
              {"counts", to_json(hist.counts)}};
}

Json to_json(const TransformParams& params) {
  return Json{{"b", params.bottom_clip},
              {"t", params.top_clip},
              {"epsilon", params.epsilon},
              {"lambda", params.lambda}};
}

Json to_json(const TransformDiagnostics& d, bool include_grid) {
  Json out{{"objective_value", d.objective_value},
           {"kl_to_original", d.kl_to_original},
           {"kl_to_uniform", d.kl_to_uniform},
           {"constant_fallback", d.constant_fallback},
           {"fallback_cells", d.fallback_cells}};
  if (include_grid) {
    // Rows are b, columns t; infeasible cells are null.
    Json grid = Json::array();
    for (Eigen::Index b = 0; b < d.objective_grid.rows(); ++b) {
      Json row = Json::array();
      for (Eigen::Index t = 0; t < d.objective_grid.cols(); ++t) {
        const double v = d.objective_grid(b, t);
        row.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
      }
      grid.push_back(std::move(row));
    }
    out["objective_grid"] = std::move(grid);
  }
  return out;
}

Json to_json(const SamplingPlan& plan) {
  Json moves = Json::array();
  for (const auto& m : plan.fallback_log)
    moves.push_back({{"from_bin", m.from_bin}, {"to_bin", m.to_bin}, {"moved", m.moved}});
  return Json{{"class", plan.class_label},
              {"ipc", plan.ipc},
              {"bin_targets", plan.bin_targets},
              {"fallback_log", std::move(moves)}};
}

Json to_json(const SelectionManifest& manifest) {
  Json classes = Json::array();
  for (const auto& c : manifest.classes) {
    classes.push_back({{"class", c.class_label},
                       {"params", to_json(c.params)},
                       {"diagnostics", to_json(c.diagnostics)},
                       {"transform_applied", c.transform_applied},
                       {"target",
                        {{"kind", to_string(c.target.kind)},
                         {"weights", to_json(c.target.weights)},
                         {"constant_fallback", c.target.constant_fallback}}},
                       {"plan", to_json(c.plan)},
                       {"selected_per_bin", c.selected_per_bin},
                       {"original_histogram", to_json(c.original_hist)},
                       {"pool_histogram", to_json(c.pool_hist)}});
  }
  Json records = Json::array();
  for (const auto& r : manifest.records) records.push_back(Json::parse(manifest_line(r)));
  return Json{{"strategy", to_string(manifest.strategy)},
              {"ipc", manifest.ipc},
              {"seed", manifest.seed},
              {"pool_factor", manifest.pool_factor},
              {"classes", std::move(classes)},
              {"records", std::move(records)}};
}

Json to_json(const BenchResult& r) {
  return Json{{"strategy", to_string(r.strategy)},
              {"ipc", r.ipc},
              {"pool_factor", r.pool_factor},
              {"accuracy_mean", r.accuracy_mean},
              {"accuracy_std", r.accuracy_std},
              {"tv_distance_to_target", r.tv_distance_to_target},
              {"repeats", r.repeats}};
}

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

const BenchResult* find(const std::vector<BenchResult>& table, Strategy s, int ipc, int pf) {
  for (const auto& r : table)
    if (r.strategy == s && r.ipc == ipc && r.pool_factor == pf) return &r;
  return nullptr;
}

std::string cell(const BenchResult* r) {
  if (!r) return "-";
  return fmt("%.1f ± %.1f", 100.0 * r->accuracy_mean, 100.0 * r->accuracy_std);
}

void csv_rows(std::ostringstream& out, std::string_view table,
              const std::vector<BenchResult>& rows) {
  for (const auto& r : rows)
    out << table << ',' << to_string(r.strategy) << ',' << r.ipc << ',' << r.pool_factor
        << ',' << fmt("%.6f", r.accuracy_mean) << ',' << fmt("%.6f", r.accuracy_std) << ','
        << fmt("%.6f", r.tv_distance_to_target) << ',' << r.repeats << '\n';
}

}  // namespace

std::string bench_csv(const BenchReport& report) {
  std::ostringstream out;
  out << "table,strategy,ipc,pool_factor,accuracy_mean,accuracy_std,"
         "tv_distance_to_target,repeats\n";
  csv_rows(out, "strategy", report.strategy_table);
  csv_rows(out, "pool_size", report.pool_table);
  return out.str();
}

std::string bench_text(const BenchReport& report) {
  std::ostringstream out;
  auto header = [&](std::string_view first) {
    out << first;
    for (int ipc : report.ipcs) out << " | IPC = " << ipc;
    out << '\n';
  };

  const int repeats =
      report.strategy_table.empty() ? 0 : report.strategy_table.front().repeats;
  out << "Sampling distribution (pool = " << report.strategy_pool_factor
      << " x IPC), accuracy % mean ± std over " << repeats << " seeds\n";
  header("Distribution");
  for (Strategy s : kAllStrategies) {
    std::string name(to_string(s));
    name[0] = static_cast<char>(std::toupper(name[0]));
    out << name;
    for (int ipc : report.ipcs)
      out << " | " << cell(find(report.strategy_table, s, ipc, report.strategy_pool_factor));
    out << '\n';
  }
  out << "scale vs pre-defined ordering:";
  for (std::size_t i = 0; i < report.ipcs.size(); ++i)
    out << " IPC=" << report.ipcs[i] << ' '
        << (i < report.scale_ordering_holds.size() && report.scale_ordering_holds[i] ? "pass"
                                                                                     : "warn");
  out << "\n\n";

  out << "Image pool size (scale strategy), accuracy % mean ± std\n";
  header("Size");
  for (int pf : report.pool_factors) {
    out << pf << " x IPC";
    for (int ipc : report.ipcs)
      out << " | " << cell(find(report.pool_table, Strategy::Scale, ipc, pf));
    out << '\n';
  }
  return out.str();
}

}  // namespace dgs::io
