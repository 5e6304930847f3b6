#include "scgan/config.hpp"

#include <algorithm>
#include <fstream>

namespace scgan {

using nlohmann::json;

void require_known_keys(const json& j, const std::vector<std::string>& allowed,
                        const std::string& context) {
  if (!j.is_object()) throw ConfigError(context + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError(context + ": unknown key '" + it.key() + "'");
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out << body;
  if (!out) throw ConfigError(path + ": write failed");
}

namespace {

template <class T>
T take(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

ForgeConfig parse_forge_config(const json& j) {
  require_known_keys(j,
                     {"k_total", "per_class", "dim", "layout", "data_seed", "noise_ratio",
                      "closed_classes", "labeled_ratio", "usage_ratio", "corruption_seed",
                      "eval_per_class", "eval_seed"},
                     "forge config");
  ForgeConfig cfg;
  cfg.k_total = take(j, "k_total", cfg.k_total);
  cfg.per_class = take(j, "per_class", cfg.per_class);
  cfg.dim = take(j, "dim", cfg.dim);
  const std::string layout = take<std::string>(j, "layout", "ring");
  if (layout == "ring") {
    cfg.layout = Layout::ring;
  } else if (layout == "grid") {
    cfg.layout = Layout::grid;
  } else {
    throw ConfigError("field 'layout' must be \"ring\" or \"grid\"");
  }
  cfg.data_seed = take(j, "data_seed", cfg.data_seed);
  cfg.corruption.noise_ratio = take(j, "noise_ratio", cfg.corruption.noise_ratio);
  cfg.corruption.closed_classes = take(j, "closed_classes", cfg.corruption.closed_classes);
  cfg.corruption.labeled_ratio = take(j, "labeled_ratio", cfg.corruption.labeled_ratio);
  cfg.corruption.usage_ratio = take(j, "usage_ratio", cfg.corruption.usage_ratio);
  cfg.corruption.seed = take(j, "corruption_seed", cfg.corruption.seed);
  cfg.eval_per_class = take(j, "eval_per_class", cfg.eval_per_class);
  cfg.eval_seed = take(j, "eval_seed", cfg.eval_seed);

  if (cfg.k_total < 2) throw ConfigError("field 'k_total' must be at least 2");
  if (cfg.per_class < 1) throw ConfigError("field 'per_class' must be at least 1");
  if (cfg.dim < 2) throw ConfigError("field 'dim' must be at least 2");
  if (cfg.eval_per_class < 1) throw ConfigError("field 'eval_per_class' must be at least 1");
  try {
    cfg.corruption.validate(cfg.k_total);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("field '") + e.what() + "'");
  }
  return cfg;
}

json forge_config_to_json(const ForgeConfig& cfg) {
  return json{{"k_total", cfg.k_total},
              {"per_class", cfg.per_class},
              {"dim", cfg.dim},
              {"layout", cfg.layout == Layout::ring ? "ring" : "grid"},
              {"data_seed", cfg.data_seed},
              {"noise_ratio", cfg.corruption.noise_ratio},
              {"closed_classes", cfg.corruption.closed_classes},
              {"labeled_ratio", cfg.corruption.labeled_ratio},
              {"usage_ratio", cfg.corruption.usage_ratio},
              {"corruption_seed", cfg.corruption.seed},
              {"eval_per_class", cfg.eval_per_class},
              {"eval_seed", cfg.eval_seed}};
}

Corpus forge_to_files(const ForgeConfig& cfg, const std::string& base_path) {
  CleanDataset clean =
      generate_synthetic_mixture(cfg.k_total, cfg.per_class, cfg.dim, cfg.layout, cfg.data_seed);
  Corpus corpus = build_corpus(clean, cfg.corruption);
  EvalSet eval =
      make_eval_split(clean, cfg.corruption.closed_classes, cfg.eval_per_class, cfg.eval_seed);
  save_corpus(corpus, base_path);
  save_eval_set(eval, base_path + ".eval.jsonl");
  return corpus;
}

TrainConfig parse_train_config(const json& j) {
  require_known_keys(j,
                     {"batch_size", "latent_dim", "lr_g", "lr_d", "beta1", "beta2", "epsilon",
                      "d_steps_per_g_step", "total_g_steps", "eval_every", "lambda_cls", "q_gce",
                      "tau", "eval_samples"},
                     "train config");
  TrainConfig cfg;
  cfg.optim.batch_size = take(j, "batch_size", cfg.optim.batch_size);
  cfg.optim.latent_dim = take(j, "latent_dim", cfg.optim.latent_dim);
  cfg.optim.lr_g = take(j, "lr_g", cfg.optim.lr_g);
  cfg.optim.lr_d = take(j, "lr_d", cfg.optim.lr_d);
  cfg.optim.beta1 = take(j, "beta1", cfg.optim.beta1);
  cfg.optim.beta2 = take(j, "beta2", cfg.optim.beta2);
  cfg.optim.epsilon = take(j, "epsilon", cfg.optim.epsilon);
  cfg.d_steps_per_g_step = take(j, "d_steps_per_g_step", cfg.d_steps_per_g_step);
  cfg.total_g_steps = take(j, "total_g_steps", cfg.total_g_steps);
  cfg.eval_every = take(j, "eval_every", cfg.eval_every);
  cfg.loss.lambda_cls = take(j, "lambda_cls", cfg.loss.lambda_cls);
  cfg.loss.q_gce = take(j, "q_gce", cfg.loss.q_gce);
  cfg.loss.tau = take(j, "tau", cfg.loss.tau);
  cfg.eval_samples = take(j, "eval_samples", cfg.eval_samples);
  cfg.validate();
  return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
  return json{{"batch_size", cfg.optim.batch_size},
              {"latent_dim", cfg.optim.latent_dim},
              {"lr_g", cfg.optim.lr_g},
              {"lr_d", cfg.optim.lr_d},
              {"beta1", cfg.optim.beta1},
              {"beta2", cfg.optim.beta2},
              {"epsilon", cfg.optim.epsilon},
              {"d_steps_per_g_step", cfg.d_steps_per_g_step},
              {"total_g_steps", cfg.total_g_steps},
              {"eval_every", cfg.eval_every},
              {"lambda_cls", cfg.loss.lambda_cls},
              {"q_gce", cfg.loss.q_gce},
              {"tau", cfg.loss.tau},
              {"eval_samples", cfg.eval_samples},
              {"model",
               {{"d_z", cfg.optim.latent_dim},
                {"h_embed", cfg.model.h_embed},
                {"h_feat", cfg.model.h_feat},
                {"g_hidden", cfg.model.g_hidden},
                {"d_hidden", cfg.model.d_hidden},
                {"leaky_slope", cfg.model.leaky_slope}}}};
}

ExperimentSpec parse_experiment_spec(const json& j) {
  require_known_keys(j, {"corpus", "corpus_config", "strategies", "seeds", "out_dir", "train"},
                     "experiment spec");
  ExperimentSpec spec;
  if (j.contains("corpus") == j.contains("corpus_config"))
    throw ConfigError("experiment spec: provide exactly one of 'corpus' or 'corpus_config'");
  if (j.contains("corpus")) spec.corpus_path = j.at("corpus").get<std::string>();
  if (j.contains("corpus_config")) spec.corpus_config = parse_forge_config(j.at("corpus_config"));

  if (!j.contains("strategies") || !j.at("strategies").is_array() || j.at("strategies").empty())
    throw ConfigError("experiment spec: 'strategies' must be a non-empty array");
  for (const auto& s : j.at("strategies"))
    spec.strategies.push_back(strategy_from_string(s.get<std::string>()));

  if (!j.contains("seeds") || !j.at("seeds").is_array() || j.at("seeds").empty())
    throw ConfigError("experiment spec: 'seeds' must be a non-empty array");
  for (const auto& s : j.at("seeds")) spec.seeds.push_back(s.get<uint64_t>());

  if (!j.contains("out_dir")) throw ConfigError("experiment spec: 'out_dir' is required");
  spec.out_dir = j.at("out_dir").get<std::string>();

  spec.train = j.contains("train") ? parse_train_config(j.at("train")) : TrainConfig{};
  return spec;
}

}  // namespace scgan
