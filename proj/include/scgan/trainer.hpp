#pragma once

#include "scgan/corpus.hpp"
#include "scgan/losses.hpp"

namespace scgan {

enum class Strategy {
  ours,
  supervised,
  random_gan,
  single_gan,
  curriculum_gan,
  ab1_ce,
  ab2_no_weights,
  ab3_no_correction,
};

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);  // ConfigError on unknown
const std::vector<Strategy>& all_strategies();

struct OptimConfig {
  double lr_g = 1e-4;
  double lr_d = 4e-4;  // the classifier head shares this rate
  double beta1 = 0.0;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 128;
  // Low-dimensional latent for the low-dimensional data: wide latents make
  // the 2-D generator map needlessly hard to learn and it drops modes.
  int latent_dim = 2;
};

struct TrainConfig {
  OptimConfig optim;
  LossConfig loss;  // strategy flags here are overwritten by resolve_strategy
  ModelConfig model;
  int d_steps_per_g_step = 2;
  long total_g_steps = 3000;
  long eval_every = 500;
  uint64_t seed = 1;
  Strategy strategy = Strategy::ours;
  int eval_samples = 10000;

  void validate() const;
};

// Fills the strategy flags of a LossConfig. The lambda/q/tau knobs of `base`
// are kept where the strategy uses them.
LossConfig resolve_strategy(Strategy s, const LossConfig& base);

// Does the strategy train the auxiliary classifier at all?
bool strategy_uses_classifier(Strategy s);

// Draws each index exactly once per epoch pass, reshuffling between passes.
// A request may span the epoch boundary.
class EpochSampler {
 public:
  EpochSampler() : rng_(0) {}
  EpochSampler(int n, Rng rng);

  std::vector<int> next(int count);
  int size() const { return n_; }

  std::string save_state() const;
  void load_state(const std::string& s);

 private:
  void reshuffle();
  std::vector<int> perm_;
  size_t pos_ = 0;
  Rng rng_;
  int n_ = 0;
};

struct Batches {
  Matrix labeled_x;
  std::vector<int> labeled_y;
  Matrix unlabeled_x;  // zero rows when the corpus has no unlabeled samples
  Matrix z;
  Matrix y_fake;  // one-hot, uniform over the closed classes
};

struct TrainState {
  ModelSet models;
  Rng draw_rng;  // latent vectors, fake conditions, random-label baselines
  EpochSampler labeled_sampler;
  EpochSampler unlabeled_sampler;
  long g_steps_done = 0;
  long d_steps_done = 0;

  TrainState() : draw_rng(0) {}
  static TrainState create(const CorpusView& view, const TrainConfig& cfg);
};

Batches assemble_batches(const CorpusView& view, TrainState& state, int batch_size);

// Per-instance labels and weights for one discriminator step under the given
// strategy flags. Classifier outputs are constants here.
CurriculumBatchTerms strategy_terms(const LossConfig& resolved, ModelSet& models,
                                    const Matrix& labeled_x, const std::vector<int>& labeled_y,
                                    const Matrix& unlabeled_x, Rng& rng);

struct StepLosses {
  losses::DLossParts last_d;
  double g = 0.0;
};

// d_steps_per_g_step discriminator/classifier updates followed by one
// generator update. Throws DivergenceError on a non-finite loss.
StepLosses train_step(TrainState& state, const CorpusView& view, const TrainConfig& cfg);

}  // namespace scgan
