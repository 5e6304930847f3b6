#include "scgan/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "scgan/checkpoint.hpp"
#include "scgan/config.hpp"

namespace scgan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string now_string() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof(buf), "%Y-%m-%d %H:%M:%S", std::localtime(&t));
  return buf;
}

}  // namespace

std::string metrics_row_to_json(const MetricsRow& row) {
  std::string s = "{\"step\":" + std::to_string(row.step);
  s += ",\"fid\":" + fmt_double(row.fid);
  s += ",\"ifid\":" + fmt_double(row.ifid);
  s += ",\"f8\":" + fmt_double(row.f8);
  s += ",\"f_eighth\":" + fmt_double(row.f_eighth);
  s += ",\"is_analogue\":" + fmt_double(row.is_analogue);
  s += ",\"cls_accuracy\":" + fmt_double(row.cls_accuracy);
  s += ",\"correction_accuracy\":" + fmt_double(row.correction_accuracy);
  s += ",\"confidence_auc\":" + fmt_double(row.confidence_auc);
  s += ",\"warnings\":[";
  for (size_t i = 0; i < row.warnings.size(); ++i) {
    if (i) s += ",";
    s += json(row.warnings[i]).dump();
  }
  s += "]}";
  return s;
}

MetricsRow metrics_row_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("metrics row: ") + e.what());
  }
  MetricsRow row;
  row.step = j.at("step").get<long>();
  row.fid = j.at("fid").get<double>();
  row.ifid = j.at("ifid").get<double>();
  row.f8 = j.at("f8").get<double>();
  row.f_eighth = j.at("f_eighth").get<double>();
  row.is_analogue = j.at("is_analogue").get<double>();
  row.cls_accuracy = j.at("cls_accuracy").get<double>();
  row.correction_accuracy = j.at("correction_accuracy").get<double>();
  row.confidence_auc = j.at("confidence_auc").get<double>();
  for (const auto& w : j.at("warnings")) row.warnings.push_back(w.get<std::string>());
  return row;
}

MetricsRow evaluate_snapshot(const ModelSet& models, const Corpus& corpus, const EvalSet& eval,
                             const Oracle& oracle, long step, int eval_samples, uint64_t seed) {
  MetricsRow row;
  row.step = step;

  // Deterministic per-step draws, separate from the training stream.
  Rng rng = Rng::stream(seed, "eval.draws", static_cast<uint64_t>(step));
  const int n = eval_samples;
  const int K = models.cfg.K;
  Matrix Y(n, K);
  std::vector<int> gen_labels(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int k = rng.index(K);
    Y.at(i, k) = 1.0;
    gen_labels[static_cast<size_t>(i)] = k;
  }
  Matrix Z(n, models.cfg.d_z);
  for (double& v : Z.data) v = rng.normal();
  Matrix gen = models.generate(Z, Y);

  row.fid = frechet_distance(eval.x, gen, &row.warnings);
  row.ifid = intra_frechet(eval.x, eval.labels, gen, gen_labels, K, &row.warnings);
  PrdScores prd = prd_f_scores(eval.x, gen, 20, 1001, seed ^ static_cast<uint64_t>(step));
  row.f8 = prd.f8;
  row.f_eighth = prd.f_eighth;
  row.is_analogue = is_analogue(oracle.probs(gen));

  Diagnostics diag = curriculum_diagnostics(models, corpus);
  row.cls_accuracy = diag.cls_accuracy;
  row.correction_accuracy = diag.correction_accuracy;
  row.confidence_auc = diag.confidence_auc;
  return row;
}

ExperimentResult run_experiment(const Corpus& corpus, const EvalSet& eval, const TrainConfig& cfg,
                                const std::string& run_dir, bool resume,
                                const Oracle* shared_oracle, const std::string& corpus_base,
                                const std::string& eval_path) {
  cfg.validate();
  fs::create_directories(run_dir);
  fs::create_directories(run_dir + "/checkpoints");

  // Resolved configuration, defaults included.
  {
    json config = train_config_to_json(cfg);
    config["strategy"] = to_string(cfg.strategy);
    config["seed"] = cfg.seed;
    if (!corpus_base.empty()) config["corpus"] = corpus_base;
    if (!eval_path.empty()) config["eval"] = eval_path;
    write_text_file(run_dir + "/config.json", config.dump(2) + "\n");
  }

  std::ofstream log(run_dir + "/run.log", std::ios::app);
  log << "[" << now_string() << "] start strategy=" << to_string(cfg.strategy)
      << " seed=" << cfg.seed << " total_g_steps=" << cfg.total_g_steps << "\n";

  Oracle local_oracle;
  const Oracle* oracle = shared_oracle;
  if (!oracle) {
    local_oracle = train_oracle(eval, cfg.model, corpus.cfg.seed);
    oracle = &local_oracle;
  }

  const CorpusView view = corpus.view();
  TrainState state;
  std::vector<MetricsRow> rows;

  // Resume from the newest checkpoint; metric rows past it are dropped so the
  // continued run rewrites them identically.
  long resume_step = -1;
  if (resume) {
    for (const auto& entry : fs::directory_iterator(run_dir + "/checkpoints")) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("step-", 0) == 0) resume_step = std::max(resume_step, std::stol(name.substr(5)));
    }
  }
  if (resume_step >= 0) {
    state = load_checkpoint(run_dir + "/checkpoints/step-" + std::to_string(resume_step), view, cfg);
    std::ifstream in(run_dir + "/metrics.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      MetricsRow row = metrics_row_from_json(line);
      if (row.step <= resume_step) rows.push_back(std::move(row));
    }
    log << "[" << now_string() << "] resumed from step " << resume_step << "\n";
  } else {
    state = TrainState::create(view, cfg);
  }

  auto flush_metrics = [&]() {
    std::string body;
    for (const MetricsRow& row : rows) body += metrics_row_to_json(row) + "\n";
    write_text_file(run_dir + "/metrics.jsonl", body);
  };

  auto evaluate_and_checkpoint = [&](long step) {
    MetricsRow row =
        evaluate_snapshot(state.models, corpus, eval, *oracle, step, cfg.eval_samples, cfg.seed);
    rows.push_back(row);
    flush_metrics();
    save_checkpoint(run_dir + "/checkpoints/step-" + std::to_string(step), state);
    log << "[" << now_string() << "] step " << step << " fid=" << row.fid
        << " cls_acc=" << row.cls_accuracy << " corr_acc=" << row.correction_accuracy
        << " conf_auc=" << row.confidence_auc << "\n";
  };

  if (resume_step < 0) evaluate_and_checkpoint(0);

  double avg_d = 0.0, avg_g = 0.0;
  long window = 0;
  while (state.g_steps_done < cfg.total_g_steps) {
    StepLosses step_losses;
    try {
      step_losses = train_step(state, view, cfg);
    } catch (const DivergenceError& e) {
      save_checkpoint(run_dir + "/checkpoints/diverged-step-" + std::to_string(state.g_steps_done),
                      state);
      log << "[" << now_string() << "] diverged: " << e.what() << "\n";
      throw;
    }
    avg_d += step_losses.last_d.total;
    avg_g += step_losses.g;
    window += 1;
    const long step = state.g_steps_done;
    if (step % cfg.eval_every == 0 || step == cfg.total_g_steps) {
      log << "[" << now_string() << "] step " << step << " mean_d=" << avg_d / window
          << " mean_g=" << avg_g / window << "\n";
      avg_d = avg_g = 0.0;
      window = 0;
      evaluate_and_checkpoint(step);
    }
  }

  // Final report mirrors the last metrics row.
  {
    const MetricsRow& last = rows.back();
    json report;
    report["strategy"] = to_string(cfg.strategy);
    report["seed"] = cfg.seed;
    report["final"] = json::parse(metrics_row_to_json(last));
    write_text_file(run_dir + "/final_report.json", report.dump(2) + "\n");
  }
  log << "[" << now_string() << "] done\n";

  ExperimentResult result;
  result.rows = std::move(rows);
  result.run_dir = run_dir;
  return result;
}

}  // namespace scgan
