#include "scgan/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace scgan {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::ours: return "ours";
    case Strategy::supervised: return "supervised";
    case Strategy::random_gan: return "random_gan";
    case Strategy::single_gan: return "single_gan";
    case Strategy::curriculum_gan: return "curriculum_gan";
    case Strategy::ab1_ce: return "ab1_ce";
    case Strategy::ab2_no_weights: return "ab2_no_weights";
    case Strategy::ab3_no_correction: return "ab3_no_correction";
  }
  throw ContractError("to_string: unknown strategy");
}

const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> all = {
      Strategy::ours,           Strategy::supervised,     Strategy::random_gan,
      Strategy::single_gan,     Strategy::curriculum_gan, Strategy::ab1_ce,
      Strategy::ab2_no_weights, Strategy::ab3_no_correction,
  };
  return all;
}

Strategy strategy_from_string(const std::string& name) {
  for (Strategy s : all_strategies())
    if (to_string(s) == name) return s;
  throw ConfigError("unknown strategy '" + name + "'");
}

bool strategy_uses_classifier(Strategy s) {
  switch (s) {
    case Strategy::supervised:
    case Strategy::random_gan:
    case Strategy::single_gan:
      return false;
    default:
      return true;
  }
}

LossConfig resolve_strategy(Strategy s, const LossConfig& base) {
  LossConfig cfg = base;
  cfg.use_classifier = strategy_uses_classifier(s);
  switch (s) {
    case Strategy::ours:
      cfg.correct_labels = true;
      cfg.weighting = LossConfig::Weighting::confidence;
      cfg.unlabeled = LossConfig::UnlabeledLabels::assigned;
      break;
    case Strategy::supervised:
      cfg.correct_labels = false;
      cfg.weighting = LossConfig::Weighting::one;
      cfg.unlabeled = LossConfig::UnlabeledLabels::none;
      cfg.lambda_cls = 0.0;
      break;
    case Strategy::random_gan:
      cfg.correct_labels = false;
      cfg.weighting = LossConfig::Weighting::one;
      cfg.unlabeled = LossConfig::UnlabeledLabels::random_one_hot;
      cfg.lambda_cls = 0.0;
      break;
    case Strategy::single_gan:
      cfg.correct_labels = false;
      cfg.weighting = LossConfig::Weighting::one;
      cfg.unlabeled = LossConfig::UnlabeledLabels::constant_uniform;
      cfg.lambda_cls = 0.0;
      break;
    case Strategy::curriculum_gan:
      cfg.correct_labels = false;
      cfg.weighting = LossConfig::Weighting::one;
      cfg.unlabeled = LossConfig::UnlabeledLabels::hard_threshold;
      break;
    case Strategy::ab1_ce:
      cfg.correct_labels = true;
      cfg.weighting = LossConfig::Weighting::confidence;
      cfg.unlabeled = LossConfig::UnlabeledLabels::assigned;
      cfg.q_gce = 0.0;  // plain cross entropy
      break;
    case Strategy::ab2_no_weights:
      cfg.correct_labels = true;
      cfg.weighting = LossConfig::Weighting::one;
      cfg.unlabeled = LossConfig::UnlabeledLabels::assigned;
      break;
    case Strategy::ab3_no_correction:
      cfg.correct_labels = false;
      cfg.weighting = LossConfig::Weighting::confidence;
      cfg.unlabeled = LossConfig::UnlabeledLabels::assigned;
      break;
  }
  return cfg;
}

void TrainConfig::validate() const {
  loss.validate();
  if (optim.lr_g <= 0.0 || optim.lr_d <= 0.0) throw ConfigError("learning rates must be positive");
  if (optim.beta1 < 0.0 || optim.beta1 >= 1.0) throw ConfigError("beta1 must be in [0, 1)");
  if (optim.beta2 < 0.0 || optim.beta2 >= 1.0) throw ConfigError("beta2 must be in [0, 1)");
  if (optim.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (optim.latent_dim < 1) throw ConfigError("latent_dim must be at least 1");
  if (d_steps_per_g_step < 1) throw ConfigError("d_steps_per_g_step must be at least 1");
  if (total_g_steps < 0) throw ConfigError("total_g_steps must be non-negative");
  if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
  if (eval_samples < 1) throw ConfigError("eval_samples must be at least 1");
}

EpochSampler::EpochSampler(int n, Rng rng) : rng_(std::move(rng)), n_(n) {
  perm_.resize(static_cast<size_t>(n));
  std::iota(perm_.begin(), perm_.end(), 0);
  reshuffle();
}

void EpochSampler::reshuffle() {
  rng_.shuffle(perm_);
  pos_ = 0;
}

std::vector<int> EpochSampler::next(int count) {
  std::vector<int> out;
  if (n_ == 0) return out;
  out.reserve(static_cast<size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    if (pos_ == perm_.size()) reshuffle();
    out.push_back(perm_[pos_++]);
  }
  return out;
}

std::string EpochSampler::save_state() const {
  std::ostringstream os;
  os << n_ << " " << pos_;
  for (int v : perm_) os << " " << v;
  os << " | " << rng_.save_state();
  return os.str();
}

void EpochSampler::load_state(const std::string& s) {
  std::istringstream is(s);
  is >> n_ >> pos_;
  perm_.resize(static_cast<size_t>(n_));
  for (int& v : perm_) is >> v;
  std::string sep;
  is >> sep;
  if (is.fail() || sep != "|") throw ParseError("EpochSampler: malformed state");
  std::string rng_state((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  rng_.load_state(rng_state);
  if (pos_ > perm_.size()) throw ParseError("EpochSampler: cursor out of range");
}

TrainState TrainState::create(const CorpusView& view, const TrainConfig& cfg) {
  cfg.validate();
  if (view.n_labeled() <= 0) throw ConfigError("corpus has no labeled samples");
  TrainState state;
  ModelConfig mc = cfg.model;
  mc.d = view.d;
  mc.K = view.K;
  mc.d_z = cfg.optim.latent_dim;
  state.models = ModelSet::create(mc, cfg.seed);
  state.draw_rng = Rng::stream(cfg.seed, "train.draws");
  state.labeled_sampler = EpochSampler(view.n_labeled(), Rng::stream(cfg.seed, "sampler.labeled"));
  state.unlabeled_sampler =
      EpochSampler(view.n_unlabeled(), Rng::stream(cfg.seed, "sampler.unlabeled"));
  return state;
}

Batches assemble_batches(const CorpusView& view, TrainState& state, int batch_size) {
  Batches b;
  const int d = view.d;
  const int K = view.K;

  std::vector<int> li = state.labeled_sampler.next(batch_size);
  b.labeled_x.resize(static_cast<int>(li.size()), d);
  b.labeled_y.resize(li.size());
  for (size_t i = 0; i < li.size(); ++i) {
    const int src = li[i];
    std::copy(view.labeled_x->row(src), view.labeled_x->row(src) + d,
              b.labeled_x.row(static_cast<int>(i)));
    b.labeled_y[i] = (*view.labeled_y)[static_cast<size_t>(src)];
  }

  std::vector<int> ui = state.unlabeled_sampler.next(view.n_unlabeled() > 0 ? batch_size : 0);
  b.unlabeled_x.resize(static_cast<int>(ui.size()), d);
  for (size_t i = 0; i < ui.size(); ++i)
    std::copy(view.unlabeled_x->row(ui[i]), view.unlabeled_x->row(ui[i]) + d,
              b.unlabeled_x.row(static_cast<int>(i)));

  // Prior draws: y ~ uniform over the closed classes, z ~ N(0, I).
  b.y_fake.resize(batch_size, K);
  for (int i = 0; i < batch_size; ++i) b.y_fake.at(i, state.draw_rng.index(K)) = 1.0;
  const int d_z = state.models.cfg.d_z;
  b.z.resize(batch_size, d_z);
  for (double& v : b.z.data) v = state.draw_rng.normal();
  return b;
}

CurriculumBatchTerms strategy_terms(const LossConfig& resolved, ModelSet& models,
                                    const Matrix& labeled_x, const std::vector<int>& labeled_y,
                                    const Matrix& unlabeled_x, Rng& rng) {
  CurriculumBatchTerms terms;
  const int K = models.cfg.K;

  Matrix lbl_probs, unlbl_probs;
  if (resolved.use_classifier) {
    if (labeled_x.rows > 0) lbl_probs = models.classify(labeled_x);
    if (unlabeled_x.rows > 0 && resolved.unlabeled != LossConfig::UnlabeledLabels::none)
      unlbl_probs = models.classify(unlabeled_x);
  }

  terms.labeled.resize(static_cast<size_t>(labeled_x.rows));
  for (int i = 0; i < labeled_x.rows; ++i) {
    InstanceTerms& t = terms.labeled[static_cast<size_t>(i)];
    Vec given = one_hot(K, labeled_y[static_cast<size_t>(i)]);
    if (resolved.use_classifier) {
      t.prediction = get_row(lbl_probs, i);
      t.confidence = losses::confidence(t.prediction);
    }
    t.label = resolved.correct_labels ? losses::correct_label(given, t.prediction) : given;
    t.weight = resolved.weighting == LossConfig::Weighting::confidence ? t.confidence : 1.0;
    t.kept = true;
  }

  if (resolved.unlabeled == LossConfig::UnlabeledLabels::none) return terms;

  terms.unlabeled.resize(static_cast<size_t>(unlabeled_x.rows));
  for (int i = 0; i < unlabeled_x.rows; ++i) {
    InstanceTerms& t = terms.unlabeled[static_cast<size_t>(i)];
    if (resolved.use_classifier) {
      t.prediction = get_row(unlbl_probs, i);
      t.confidence = losses::confidence(t.prediction);
    }
    switch (resolved.unlabeled) {
      case LossConfig::UnlabeledLabels::assigned:
        t.label = losses::assign_label(t.prediction);
        t.weight = resolved.weighting == LossConfig::Weighting::confidence ? t.confidence : 1.0;
        break;
      case LossConfig::UnlabeledLabels::random_one_hot:
        t.label = one_hot(K, rng.index(K));
        t.weight = 1.0;
        break;
      case LossConfig::UnlabeledLabels::constant_uniform:
        t.label = uniform_simplex(K);
        t.weight = 1.0;
        break;
      case LossConfig::UnlabeledLabels::hard_threshold:
        if (t.confidence >= resolved.tau) {
          t.label = one_hot(K, argmax(t.prediction));
          t.weight = 1.0;
        } else {
          t.label = uniform_simplex(K);  // placeholder, never scored
          t.weight = 0.0;
          t.kept = false;
        }
        break;
      case LossConfig::UnlabeledLabels::none:
        break;
    }
  }
  return terms;
}

namespace {

losses::DLossParts d_substep(TrainState& state, const CorpusView& view, const TrainConfig& cfg,
                             const LossConfig& resolved) {
  Batches b = assemble_batches(view, state, cfg.optim.batch_size);
  CurriculumBatchTerms terms = strategy_terms(resolved, state.models, b.labeled_x, b.labeled_y,
                                              b.unlabeled_x, state.draw_rng);

  state.models.disc_params.zero_grads();
  losses::DLossParts parts;
  parts.lbl = losses::real_hinge_from_terms(state.models, b.labeled_x, terms.labeled, true);
  if (!terms.unlabeled.empty())
    parts.unlbl = losses::real_hinge_from_terms(state.models, b.unlabeled_x, terms.unlabeled, true);
  parts.fake = losses::d_loss_fake(state.models, b.z, b.y_fake, true);
  if (resolved.use_classifier) {
    Matrix xf = state.models.generator.forward(state.models.gen_params, b.z, b.y_fake, nullptr);
    parts.cls = losses::cls_loss(state.models, b.labeled_x, b.labeled_y, xf, b.y_fake,
                                 resolved.q_gce, true, resolved.lambda_cls);
  }
  parts.total =
      losses::combine_d_loss(parts.lbl, parts.unlbl, parts.fake, parts.cls, resolved.lambda_cls);

  AdamConfig adam{cfg.optim.lr_d, cfg.optim.beta1, cfg.optim.beta2, cfg.optim.epsilon};
  adam_step(state.models.disc_params, adam);
  state.d_steps_done += 1;
  return parts;
}

[[noreturn]] void abort_diverged(const char* where, long g_step, double value) {
  std::ostringstream os;
  os << "non-finite " << where << " loss " << value << " at generator step " << g_step;
  throw DivergenceError(os.str());
}

}  // namespace

StepLosses train_step(TrainState& state, const CorpusView& view, const TrainConfig& cfg) {
  const LossConfig resolved = resolve_strategy(cfg.strategy, cfg.loss);
  resolved.validate();

  StepLosses out;
  for (int k = 0; k < cfg.d_steps_per_g_step; ++k) {
    out.last_d = d_substep(state, view, cfg, resolved);
    if (!std::isfinite(out.last_d.total)) abort_diverged("discriminator", state.g_steps_done, out.last_d.total);
  }

  Batches b = assemble_batches(view, state, cfg.optim.batch_size);
  state.models.gen_params.zero_grads();
  out.g = losses::g_loss(state.models, b.z, b.y_fake, true);
  if (!std::isfinite(out.g)) abort_diverged("generator", state.g_steps_done, out.g);
  AdamConfig adam{cfg.optim.lr_g, cfg.optim.beta1, cfg.optim.beta2, cfg.optim.epsilon};
  adam_step(state.models.gen_params, adam);
  state.g_steps_done += 1;
  return out;
}

}  // namespace scgan
