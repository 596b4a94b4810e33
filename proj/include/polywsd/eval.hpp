#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "polywsd/bcl.hpp"
#include "polywsd/data.hpp"

namespace polywsd {

struct PosScore {
  std::size_t attempted = 0;
  std::size_t correct = 0;
  std::size_t total_gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  std::size_t attempted = 0;
  std::size_t correct = 0;
  std::size_t total_gold = 0;
  double precision = 0.0;
  double recall = 0.0;
  double micro_f1 = 0.0;
  std::map<Pos, PosScore> per_pos;
};

// Harmonic mean, 0 when both are 0.
double f1_score(double precision, double recall);

using GoldKey = std::map<std::string, std::vector<std::string>>;

// A prediction is correct when its sense is among the gold senses for its id.
// ScoringError for an id absent from the gold key or predicted twice. With
// `pos_of`, per-POS scores are filled for every POS present in the gold key.
EvalReport score_f1(std::span<const PredictionLine> predictions, const GoldKey& gold,
                    const std::map<std::string, Pos>* pos_of = nullptr);

EvalReport score_f1(const std::filesystem::path& predictions, const std::filesystem::path& gold,
                    const std::optional<std::filesystem::path>& corpus = std::nullopt);

nlohmann::json to_json(const EvalReport& report);

// Totals of one training run, as written in the summary record of a metrics
// log.
struct RunMetrics {
  std::string mode;
  std::string fingerprint;  // identifies model config, train config and data
  std::uint64_t steps = 0;
  std::uint64_t gloss_forwards = 0;
  std::uint64_t context_forwards = 0;
  double wall_seconds = 0.0;
  std::uint64_t device_count = 1;
};

struct CostReport {
  RunMetrics run;
  // device_count x wall-clock hours.
  double gpu_hours_analog = 0.0;
};

CostReport cost_report(const RunMetrics& run);

// Exact reduction 1 - a/b = (b - a)/b kept as an integer fraction.
struct CountReduction {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

struct CostComparison {
  CostReport candidate;  // usually the BCL run
  CostReport baseline;   // usually the all-candidates run
  CountReduction gloss_forward_reduction;
  double wall_clock_reduction = 0.0;
  double gpu_hours_reduction = 0.0;
};

// ConfigError when the fingerprints differ. DataError when the baseline did
// fewer gloss forwards than the candidate.
CostComparison compare_costs(const RunMetrics& candidate, const RunMetrics& baseline);

nlohmann::json to_json(const CostReport& report);
nlohmann::json to_json(const CostComparison& comparison);

// Metrics log: one JSON object per line, "type": "step" for each step and a
// final "type": "summary" record.
nlohmann::json step_record(const StepMetrics& m);
nlohmann::json summary_record(const RunMetrics& run);
RunMetrics read_run_summary(const std::filesystem::path& metrics_log);

}  // namespace polywsd
