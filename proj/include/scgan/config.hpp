#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scgan/corpus.hpp"
#include "scgan/trainer.hpp"

namespace scgan {

// Unknown keys are rejected everywhere: a typo in a hyperparameter name must
// fail loudly, not fall back to a default.
void require_known_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                        const std::string& context);

nlohmann::json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& body);

// Corpus-forging recipe: mixture geometry plus the corruption protocol.
struct ForgeConfig {
  int k_total = 10;
  int per_class = 1000;
  int dim = 2;
  Layout layout = Layout::ring;
  uint64_t data_seed = 1;
  CorruptionConfig corruption;
  int eval_per_class = 1000;
  uint64_t eval_seed = 99;
};

ForgeConfig parse_forge_config(const nlohmann::json& j);
nlohmann::json forge_config_to_json(const ForgeConfig& cfg);

// Runs build_corpus + make_eval_split and writes all three files at the base
// path. Returns the corpus.
Corpus forge_to_files(const ForgeConfig& cfg, const std::string& base_path);

struct ExperimentSpec {
  std::string corpus_path;                  // base path of an existing corpus
  std::optional<ForgeConfig> corpus_config; // or forge one under out_dir
  std::vector<Strategy> strategies;
  std::vector<uint64_t> seeds;
  std::string out_dir;
  TrainConfig train;
};

ExperimentSpec parse_experiment_spec(const nlohmann::json& j);
TrainConfig parse_train_config(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& cfg);

}  // namespace scgan
