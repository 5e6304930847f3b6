// Command-line front end: forge corpora, run training experiments and sweeps,
// render plots. Exit codes: 0 success, 1 runtime failure, 2 configuration
// error. SC_GAN_THREADS caps kernel parallelism.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scgan/config.hpp"
#include "scgan/experiment.hpp"
#include "scgan/plots.hpp"

namespace fs = std::filesystem;
using namespace scgan;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SummaryRow {
  std::string strategy;
  uint64_t seed = 0;
  std::string axis_value;  // empty for plain train runs
  MetricsRow final;
};

void write_summary(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::string body =
      "strategy,seed,axis_value,fid,ifid,f8,f_eighth,is_analogue,cls_accuracy,"
      "correction_accuracy,confidence_auc\n";
  for (const SummaryRow& r : rows) {
    body += r.strategy + "," + std::to_string(r.seed) + "," + r.axis_value + "," +
            fmt_double(r.final.fid) + "," + fmt_double(r.final.ifid) + "," + fmt_double(r.final.f8) +
            "," + fmt_double(r.final.f_eighth) + "," + fmt_double(r.final.is_analogue) + "," +
            fmt_double(r.final.cls_accuracy) + "," + fmt_double(r.final.correction_accuracy) + "," +
            fmt_double(r.final.confidence_auc) + "\n";
  }
  write_text_file(path, body);
}

MetricsRow final_row_from_report(const std::string& run_dir) {
  json report = load_json_file(run_dir + "/final_report.json");
  return metrics_row_from_json(report.at("final").dump());
}

// One (strategy, seed) training cell. When resuming, a cell counts as done
// only if its recorded final step matches the requested total; anything
// shorter continues from its newest checkpoint.
MetricsRow run_cell(const Corpus& corpus, const EvalSet& eval, const Oracle& oracle,
                    TrainConfig cfg, Strategy strategy, uint64_t seed, const std::string& run_dir,
                    bool resume, const std::string& corpus_base, const std::string& eval_path) {
  cfg.strategy = strategy;
  cfg.seed = seed;
  if (resume && fs::exists(run_dir + "/final_report.json")) {
    MetricsRow done = final_row_from_report(run_dir);
    if (done.step == cfg.total_g_steps) return done;
  }
  ExperimentResult result =
      run_experiment(corpus, eval, cfg, run_dir, resume, &oracle, corpus_base, eval_path);
  return result.rows.back();
}

int cmd_forge(const std::string& config_path, const std::string& out_base) {
  ForgeConfig cfg = parse_forge_config(load_json_file(config_path));
  if (!fs::path(out_base).parent_path().empty())
    fs::create_directories(fs::path(out_base).parent_path());
  Corpus corpus = forge_to_files(cfg, out_base);
  std::cout << "forged corpus: " << corpus.labeled_x.rows << " labeled, "
            << corpus.unlabeled_x.rows << " unlabeled, K=" << corpus.K << " of " << corpus.K_total
            << " classes -> " << out_base << ".{samples,provenance,eval}.jsonl\n";
  return 0;
}

struct LoadedCorpus {
  Corpus corpus;
  EvalSet eval;
  std::string base;
  std::string eval_path;
};

LoadedCorpus materialize_corpus(const ExperimentSpec& spec, const std::string& out_dir) {
  LoadedCorpus out;
  if (spec.corpus_config) {
    fs::create_directories(out_dir);
    out.base = out_dir + "/corpus";
    out.corpus = forge_to_files(*spec.corpus_config, out.base);
  } else {
    out.base = spec.corpus_path;
    out.corpus = load_corpus(out.base);
  }
  out.eval_path = out.base + ".eval.jsonl";
  out.eval = load_eval_set(out.eval_path);
  return out;
}

int cmd_train(const std::string& spec_path, bool resume, bool dry_run) {
  ExperimentSpec spec = parse_experiment_spec(load_json_file(spec_path));
  spec.train.validate();

  if (dry_run) {
    std::cout << "spec ok: " << spec.strategies.size() << " strategies x " << spec.seeds.size()
              << " seeds, " << spec.train.total_g_steps << " G-steps each -> " << spec.out_dir
              << "\n";
    return 0;
  }

  LoadedCorpus data = materialize_corpus(spec, spec.out_dir);
  ModelConfig arch = spec.train.model;
  Oracle oracle = train_oracle(data.eval, arch, data.corpus.cfg.seed);

  std::vector<SummaryRow> summary;
  for (Strategy strategy : spec.strategies) {
    for (uint64_t seed : spec.seeds) {
      const std::string run_dir =
          spec.out_dir + "/" + to_string(strategy) + "/seed-" + std::to_string(seed);
      MetricsRow final = run_cell(data.corpus, data.eval, oracle, spec.train, strategy, seed,
                                  run_dir, resume, data.base, data.eval_path);
      summary.push_back({to_string(strategy), seed, "", final});
      std::cout << to_string(strategy) << " seed=" << seed << " fid=" << final.fid
                << " corr_acc=" << final.correction_accuracy
                << " conf_auc=" << final.confidence_auc << "\n";
    }
  }
  write_summary(spec.out_dir + "/summary.csv", summary);
  std::cout << "summary: " << spec.out_dir << "/summary.csv\n";
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& axis,
              const std::vector<std::string>& values) {
  if (values.empty()) throw ConfigError("sweep: --values must list at least one value");
  if (axis != "noise_ratio" && axis != "labeled_ratio")
    throw ConfigError("sweep: --axis must be noise_ratio or labeled_ratio");

  ExperimentSpec spec = parse_experiment_spec(load_json_file(spec_path));
  spec.train.validate();
  if (!spec.corpus_config)
    throw ConfigError("sweep: the spec needs an inline 'corpus_config' to vary " + axis);

  std::vector<SummaryRow> summary;
  for (const std::string& token : values) {
    double value = 0.0;
    try {
      value = std::stod(token);
    } catch (const std::exception&) {
      throw ConfigError("sweep: bad value '" + token + "'");
    }
    ForgeConfig forge = *spec.corpus_config;
    if (axis == "noise_ratio") {
      forge.corruption.noise_ratio = value;
    } else {
      forge.corruption.labeled_ratio = value;
    }

    const std::string cell_dir = spec.out_dir + "/" + axis + "=" + token;
    fs::create_directories(cell_dir);
    const std::string base = cell_dir + "/corpus";
    Corpus corpus = forge_to_files(forge, base);
    EvalSet eval = load_eval_set(base + ".eval.jsonl");
    Oracle oracle = train_oracle(eval, spec.train.model, corpus.cfg.seed);

    for (Strategy strategy : spec.strategies) {
      for (uint64_t seed : spec.seeds) {
        const std::string run_dir =
            cell_dir + "/" + to_string(strategy) + "/seed-" + std::to_string(seed);
        MetricsRow final = run_cell(corpus, eval, oracle, spec.train, strategy, seed, run_dir,
                                    false, base, base + ".eval.jsonl");
        summary.push_back({to_string(strategy), seed, token, final});
        std::cout << axis << "=" << token << " " << to_string(strategy) << " seed=" << seed
                  << " fid=" << final.fid << "\n";
      }
    }
  }
  write_summary(spec.out_dir + "/summary.csv", summary);

  json sweep_meta;
  sweep_meta["axis"] = axis;
  sweep_meta["values"] = values;
  write_text_file(spec.out_dir + "/sweep.json", sweep_meta.dump(2) + "\n");
  std::cout << "summary: " << spec.out_dir << "/summary.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft-curriculum conditional GAN workbench"};
  app.require_subcommand(1);

  std::string forge_config, forge_out;
  CLI::App* forge = app.add_subcommand("forge", "generate and corrupt a synthetic corpus");
  forge->add_option("--config", forge_config, "forge config JSON")->required();
  forge->add_option("--out", forge_out, "output base path")->required();

  std::string train_spec;
  bool train_resume = false, train_dry = false;
  CLI::App* train = app.add_subcommand("train", "run a strategy x seed experiment matrix");
  train->add_option("--spec", train_spec, "experiment spec JSON")->required();
  train->add_flag("--resume", train_resume, "continue interrupted runs from checkpoints");
  train->add_flag("--dry-run", train_dry, "validate the spec and exit");

  std::string sweep_spec, sweep_axis;
  std::vector<std::string> sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "sweep noise_ratio or labeled_ratio");
  sweep->add_option("--spec", sweep_spec, "experiment spec JSON")->required();
  sweep->add_option("--axis", sweep_axis, "noise_ratio or labeled_ratio")->required();
  sweep->add_option("--values", sweep_values, "axis values")->required()->delimiter(',');

  std::string plot_dir;
  CLI::App* plot = app.add_subcommand("plot", "render scatter and curve SVGs");
  plot->add_option("--dir", plot_dir, "run or sweep directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (*forge) return cmd_forge(forge_config, forge_out);
    if (*train) return cmd_train(train_spec, train_resume, train_dry);
    if (*sweep) return cmd_sweep(sweep_spec, sweep_axis, sweep_values);
    if (*plot) {
      render_plots(plot_dir);
      std::cout << "plots: " << plot_dir << "/plots\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
