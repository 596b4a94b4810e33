#include "polywsd/eval.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "polywsd/errors.hpp"

namespace polywsd {

using nlohmann::json;

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

template <typename Counts>
void finish(Counts& c, double& precision, double& recall, double& f1) {
  precision = c.attempted ? static_cast<double>(c.correct) / static_cast<double>(c.attempted) : 0.0;
  recall = c.total_gold ? static_cast<double>(c.correct) / static_cast<double>(c.total_gold) : 0.0;
  f1 = f1_score(precision, recall);
}

}  // namespace

EvalReport score_f1(std::span<const PredictionLine> predictions, const GoldKey& gold,
                    const std::map<std::string, Pos>* pos_of) {
  EvalReport report;
  report.total_gold = gold.size();
  if (pos_of) {
    for (const auto& [id, senses] : gold) {
      if (auto it = pos_of->find(id); it != pos_of->end()) ++report.per_pos[it->second].total_gold;
    }
  }

  std::set<std::string> seen;
  for (const PredictionLine& p : predictions) {
    auto g = gold.find(p.instance_id);
    if (g == gold.end()) throw ScoringError("prediction for unknown instance " + p.instance_id);
    if (!seen.insert(p.instance_id).second) throw ScoringError("duplicate prediction for " + p.instance_id);
    const bool hit = std::find(g->second.begin(), g->second.end(), p.sense_id) != g->second.end();
    ++report.attempted;
    if (hit) ++report.correct;
    if (pos_of) {
      if (auto it = pos_of->find(p.instance_id); it != pos_of->end()) {
        PosScore& ps = report.per_pos[it->second];
        ++ps.attempted;
        if (hit) ++ps.correct;
      }
    }
  }

  finish(report, report.precision, report.recall, report.micro_f1);
  for (auto& [pos, ps] : report.per_pos) finish(ps, ps.precision, ps.recall, ps.f1);
  return report;
}

EvalReport score_f1(const std::filesystem::path& predictions, const std::filesystem::path& gold,
                    const std::optional<std::filesystem::path>& corpus) {
  const auto preds = load_predictions(predictions);
  const auto key = load_gold_key(gold);
  if (!corpus) return score_f1(preds, key);
  std::map<std::string, Pos> pos_of;
  for (const CorpusInstance& inst : load_corpus(*corpus)) pos_of.emplace(inst.id, inst.pos);
  return score_f1(preds, key, &pos_of);
}

json to_json(const EvalReport& report) {
  json per_pos = json::object();
  for (const auto& [pos, ps] : report.per_pos) {
    per_pos[pos_name(pos)] = {{"attempted", ps.attempted}, {"correct", ps.correct}, {"total_gold", ps.total_gold},
                              {"precision", ps.precision}, {"recall", ps.recall},   {"f1", ps.f1}};
  }
  return {{"micro_f1", report.micro_f1},
          {"precision", report.precision},
          {"recall", report.recall},
          {"attempted", report.attempted},
          {"correct", report.correct},
          {"total_gold", report.total_gold},
          {"per_pos", per_pos}};
}

// ---------------------------------------------------------------------------

CostReport cost_report(const RunMetrics& run) {
  return {run, static_cast<double>(run.device_count) * run.wall_seconds / 3600.0};
}

CostComparison compare_costs(const RunMetrics& candidate, const RunMetrics& baseline) {
  if (candidate.fingerprint != baseline.fingerprint) {
    throw ConfigError("cannot compare runs with different configs or data (" + candidate.fingerprint + " vs " +
                      baseline.fingerprint + ")");
  }
  if (baseline.gloss_forwards == 0 || baseline.gloss_forwards < candidate.gloss_forwards) {
    throw DataError("baseline run must do at least as many gloss forwards as the candidate");
  }
  CostComparison c;
  c.candidate = cost_report(candidate);
  c.baseline = cost_report(baseline);
  std::uint64_t num = baseline.gloss_forwards - candidate.gloss_forwards;
  std::uint64_t den = baseline.gloss_forwards;
  const std::uint64_t g = std::gcd(num, den);
  c.gloss_forward_reduction = {num / g, den / g};
  c.wall_clock_reduction = baseline.wall_seconds > 0.0 ? 1.0 - candidate.wall_seconds / baseline.wall_seconds : 0.0;
  c.gpu_hours_reduction = c.baseline.gpu_hours_analog > 0.0
                              ? 1.0 - c.candidate.gpu_hours_analog / c.baseline.gpu_hours_analog
                              : 0.0;
  return c;
}

json to_json(const CostReport& report) {
  return {{"mode", report.run.mode},
          {"steps", report.run.steps},
          {"gloss_forwards", report.run.gloss_forwards},
          {"context_forwards", report.run.context_forwards},
          {"wall_seconds", report.run.wall_seconds},
          {"device_count", report.run.device_count},
          {"gpu_hours_analog", report.gpu_hours_analog}};
}

json to_json(const CostComparison& c) {
  return {{"candidate", to_json(c.candidate)},
          {"baseline", to_json(c.baseline)},
          {"gloss_forward_reduction",
           {{"numerator", c.gloss_forward_reduction.numerator},
            {"denominator", c.gloss_forward_reduction.denominator},
            {"value", c.gloss_forward_reduction.value()}}},
          {"wall_clock_reduction", c.wall_clock_reduction},
          {"gpu_hours_reduction", c.gpu_hours_reduction}};
}

json step_record(const StepMetrics& m) {
  return {{"type", "step"},
          {"step", m.step},
          {"epoch", m.epoch},
          {"loss", m.loss},
          {"gloss_forwards", m.counts.gloss},
          {"context_forwards", m.counts.context},
          {"elapsed_seconds", m.elapsed_seconds}};
}

json summary_record(const RunMetrics& run) {
  return {{"type", "summary"},
          {"mode", run.mode},
          {"fingerprint", run.fingerprint},
          {"steps", run.steps},
          {"gloss_forwards", run.gloss_forwards},
          {"context_forwards", run.context_forwards},
          {"wall_seconds", run.wall_seconds},
          {"device_count", run.device_count}};
}

RunMetrics read_run_summary(const std::filesystem::path& metrics_log) {
  std::ifstream in(metrics_log);
  if (!in) throw DataError("cannot open metrics log " + metrics_log.string());
  std::optional<RunMetrics> summary;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed metrics record in " + metrics_log.string());
    if (j.value("type", "") != "summary") continue;
    RunMetrics r;
    r.mode = j.at("mode").get<std::string>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.steps = j.at("steps").get<std::uint64_t>();
    r.gloss_forwards = j.at("gloss_forwards").get<std::uint64_t>();
    r.context_forwards = j.at("context_forwards").get<std::uint64_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.device_count = j.at("device_count").get<std::uint64_t>();
    summary = r;
  }
  if (!summary) throw DataError("metrics log " + metrics_log.string() + " has no summary record");
  return *summary;
}

}  // namespace polywsd
