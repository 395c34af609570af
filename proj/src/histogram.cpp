#include "dgs/histogram.hpp"

namespace dgs {

void check_difficulty(const ScoreRecord& record) {
  if (!(record.difficulty >= 0.0 && record.difficulty <= 1.0))
    throw Error(ErrorKind::OutOfRange,
                "difficulty " + std::to_string(record.difficulty) +
                    " of record '" + record.id + "' is outside [0, 1]",
                record.id);
}

DifficultyHistogram build_histogram(std::span<const ScoreRecord> records,
                                    const BinningSpec& spec,
                                    std::string_view class_label) {
  spec.validate();
  DifficultyHistogram hist;
  hist.spec = spec;
  hist.class_label = std::string(class_label);
  hist.counts = VectorXd::Zero(spec.bin_count);
  for (const auto& r : records) {
    check_difficulty(r);
    if (r.class_label != class_label) continue;
    hist.counts[spec.bin_of(r.difficulty)] += 1.0;
    hist.total += 1.0;
  }
  return hist;
}

std::map<std::string, DifficultyHistogram> build_class_histograms(
    std::span<const ScoreRecord> records, const BinningSpec& spec) {
  spec.validate();
  std::map<std::string, DifficultyHistogram> out;
  for (const auto& r : records) {
    check_difficulty(r);
    auto [it, inserted] = out.try_emplace(r.class_label);
    auto& hist = it->second;
    if (inserted) {
      hist.spec = spec;
      hist.class_label = r.class_label;
      hist.counts = VectorXd::Zero(spec.bin_count);
    }
    hist.counts[spec.bin_of(r.difficulty)] += 1.0;
    hist.total += 1.0;
  }
  return out;
}

std::optional<double> mean_difficulty(const DifficultyHistogram& hist) {
  if (!(hist.total > 0.0)) return std::nullopt;
  double acc = 0.0;
  for (int k = 0; k < hist.size(); ++k) acc += hist.counts[k] * hist.spec.center(k);
  return acc / hist.total;
}

}  // namespace dgs
