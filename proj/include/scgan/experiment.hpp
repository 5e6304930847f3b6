#pragma once

#include <string>
#include <vector>

#include "scgan/corpus.hpp"
#include "scgan/metrics.hpp"
#include "scgan/trainer.hpp"

namespace scgan {

struct MetricsRow {
  long step = 0;
  double fid = 0.0;
  double ifid = 0.0;
  double f8 = 0.0;
  double f_eighth = 0.0;
  double is_analogue = 0.0;
  double cls_accuracy = 0.0;
  double correction_accuracy = 0.0;
  double confidence_auc = 0.0;
  std::vector<std::string> warnings;
};

std::string metrics_row_to_json(const MetricsRow& row);
MetricsRow metrics_row_from_json(const std::string& line);

struct ExperimentResult {
  std::vector<MetricsRow> rows;
  std::string run_dir;
};

// Evaluates one checkpointed model snapshot against the clean reference.
MetricsRow evaluate_snapshot(const ModelSet& models, const Corpus& corpus, const EvalSet& eval,
                             const Oracle& oracle, long step, int eval_samples, uint64_t seed);

// Full training run with periodic evaluation. Writes into run_dir:
//   config.json       resolved configuration including defaults
//   metrics.jsonl     one row per evaluation
//   checkpoints/step-N state snapshots at every evaluation point
//   final_report.json final metrics row
//   run.log           timestamped progress log (the only timestamped file)
// With resume set and a checkpoint present, continues from the latest one on
// the identical trajectory. Divergence writes a diagnostic snapshot and
// rethrows.
// corpus_base/eval_path, when given, are recorded in config.json so the plot
// command can find the data behind the run.
ExperimentResult run_experiment(const Corpus& corpus, const EvalSet& eval, const TrainConfig& cfg,
                                const std::string& run_dir, bool resume = false,
                                const Oracle* shared_oracle = nullptr,
                                const std::string& corpus_base = "",
                                const std::string& eval_path = "");

}  // namespace scgan
