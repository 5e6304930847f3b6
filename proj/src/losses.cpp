#include "scgan/losses.hpp"

#include <cmath>

#include "scgan/kernels.hpp"

namespace scgan {

void LossConfig::validate() const {
  if (lambda_cls < 0.0) throw ConfigError("lambda_cls must be non-negative");
  if (q_gce < 0.0 || q_gce > 1.0) throw ConfigError("q_gce must be in [0, 1]");
  if (tau < 0.0 || tau > 1.0) throw ConfigError("tau must be in [0, 1]");
}

namespace losses {

double hinge_d(double score) { return score > -1.0 ? 1.0 + score : 0.0; }
double hinge_d_slope(double score) { return score > -1.0 ? 1.0 : 0.0; }

double gce_from_p(double p, double q) {
  if (q < 0.0 || q > 1.0) throw ConfigError("q_gce must be in [0, 1]");
  if (q == 0.0) return -std::log(std::max(p, 1e-12));
  return (1.0 - std::pow(std::max(p, 0.0), q)) / q;
}

double gce_grad_p(double p, double q) {
  if (q == 0.0) return -1.0 / std::max(p, 1e-12);
  return -std::pow(std::max(p, 1e-300), q - 1.0);
}

double gce(const Vec& pred, const Vec& label, double q) {
  return gce_from_p(dot(pred, label), q);
}

double confidence(const Vec& pred) {
  const int k = static_cast<int>(pred.size());
  if (k <= 1) return 1.0;
  double entropy = 0.0;
  for (double p : pred)
    if (p > 0.0) entropy -= p * std::log(p);
  double c = 1.0 - entropy / std::log(static_cast<double>(k));
  return std::min(1.0, std::max(0.0, c));
}

Vec correct_label(const Vec& given, const Vec& pred) {
  if (given.size() != pred.size()) throw ContractError("correct_label: size mismatch");
  Vec out(given.size());
  for (size_t i = 0; i < given.size(); ++i) out[i] = 0.5 * (given[i] + pred[i]);
  return out;
}

Vec assign_label(const Vec& pred) { return pred; }

namespace {

Matrix one_hot_rows(const std::vector<int>& labels, int k) {
  Matrix Y(static_cast<int>(labels.size()), k);
  for (size_t i = 0; i < labels.size(); ++i) {
    int y = labels[i];
    if (y < 0 || y >= k) throw ContractError("label index out of range");
    Y.at(static_cast<int>(i), y) = 1.0;
  }
  return Y;
}

// Annotation pass: classifier outputs and confidences, no gradients.
void annotate(const ModelSet& m, const Matrix& X, Matrix& probs, Vec& conf) {
  probs = m.classify(X);
  conf.resize(static_cast<size_t>(probs.rows));
  for (int i = 0; i < probs.rows; ++i) conf[static_cast<size_t>(i)] = confidence(get_row(probs, i));
}

}  // namespace

double real_hinge_from_terms(ModelSet& m, const Matrix& X, std::vector<InstanceTerms>& terms,
                             bool backprop) {
  if (static_cast<int>(terms.size()) != X.rows)
    throw ContractError("real_hinge_from_terms: terms do not match the batch");

  std::vector<int> kept_rows;
  for (size_t i = 0; i < terms.size(); ++i)
    if (terms[i].kept) kept_rows.push_back(static_cast<int>(i));
  if (kept_rows.empty()) return 0.0;

  const int n = static_cast<int>(kept_rows.size());
  Matrix Xk(n, X.cols);
  Matrix labels(n, m.cfg.K);
  for (int r = 0; r < n; ++r) {
    const int src = kept_rows[static_cast<size_t>(r)];
    std::copy(X.row(src), X.row(src) + X.cols, Xk.row(r));
    set_row(labels, r, terms[static_cast<size_t>(src)].label);
  }

  Mlp::Cache bb_cache;
  Matrix feat = m.backbone.forward(m.disc_params, Xk, backprop ? &bb_cache : nullptr);
  Vec scores = m.proj.score(m.disc_params, feat, labels);

  double loss = 0.0;
  for (int r = 0; r < n; ++r) {
    InstanceTerms& t = terms[static_cast<size_t>(kept_rows[static_cast<size_t>(r)])];
    t.score = scores[static_cast<size_t>(r)];
    t.contribution = t.weight * hinge_d(-t.score);
    loss += t.contribution;
  }
  loss /= n;

  if (backprop) {
    Vec dscore(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
      const InstanceTerms& t = terms[static_cast<size_t>(kept_rows[static_cast<size_t>(r)])];
      dscore[static_cast<size_t>(r)] = -t.weight * hinge_d_slope(-t.score) / n;
    }
    Matrix dFeat = m.proj.backward(m.disc_params, feat, labels, dscore, /*acc=*/true);
    m.backbone.backward(m.disc_params, bb_cache, dFeat, /*acc=*/true);
  }
  return loss;
}

double d_loss_labeled(ModelSet& m, const Matrix& X, const std::vector<int>& given,
                      const LossConfig& cfg, bool backprop,
                      std::vector<InstanceTerms>* terms_out) {
  if (X.rows != static_cast<int>(given.size()))
    throw ContractError("d_loss_labeled: labels do not match the batch");
  if (X.rows == 0) return 0.0;

  Matrix probs;
  Vec conf;
  annotate(m, X, probs, conf);

  std::vector<InstanceTerms> terms(static_cast<size_t>(X.rows));
  for (int i = 0; i < X.rows; ++i) {
    InstanceTerms& t = terms[static_cast<size_t>(i)];
    t.prediction = get_row(probs, i);
    t.confidence = conf[static_cast<size_t>(i)];
    Vec given_one_hot = one_hot(m.cfg.K, given[static_cast<size_t>(i)]);
    t.label = cfg.correct_labels ? correct_label(given_one_hot, t.prediction) : given_one_hot;
    t.weight = cfg.weighting == LossConfig::Weighting::confidence ? t.confidence : 1.0;
  }
  double loss = real_hinge_from_terms(m, X, terms, backprop);
  if (terms_out) *terms_out = std::move(terms);
  return loss;
}

double d_loss_unlabeled(ModelSet& m, const Matrix& U, const LossConfig& cfg, bool backprop,
                        std::vector<InstanceTerms>* terms_out) {
  if (U.rows == 0) return 0.0;

  Matrix probs;
  Vec conf;
  annotate(m, U, probs, conf);

  std::vector<InstanceTerms> terms(static_cast<size_t>(U.rows));
  for (int i = 0; i < U.rows; ++i) {
    InstanceTerms& t = terms[static_cast<size_t>(i)];
    t.prediction = get_row(probs, i);
    t.confidence = conf[static_cast<size_t>(i)];
    t.label = assign_label(t.prediction);
    t.weight = cfg.weighting == LossConfig::Weighting::confidence ? t.confidence : 1.0;
  }
  double loss = real_hinge_from_terms(m, U, terms, backprop);
  if (terms_out) *terms_out = std::move(terms);
  return loss;
}

double d_loss_fake(ModelSet& m, const Matrix& Z, const Matrix& Y, bool backprop) {
  if (Z.rows == 0) return 0.0;
  // The generator is detached here: no cache, no generator gradients.
  Matrix Xf = m.generator.forward(m.gen_params, Z, Y, nullptr);

  Mlp::Cache bb_cache;
  Matrix feat = m.backbone.forward(m.disc_params, Xf, backprop ? &bb_cache : nullptr);
  Vec scores = m.proj.score(m.disc_params, feat, Y);

  const int n = Xf.rows;
  double loss = 0.0;
  for (double s : scores) loss += hinge_d(s);
  loss /= n;

  if (backprop) {
    Vec dscore(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) dscore[static_cast<size_t>(i)] = hinge_d_slope(scores[static_cast<size_t>(i)]) / n;
    Matrix dFeat = m.proj.backward(m.disc_params, feat, Y, dscore, /*acc=*/true);
    m.backbone.backward(m.disc_params, bb_cache, dFeat, /*acc=*/true);
  }
  return loss;
}

namespace {

// Mean GCE of the classifier against fixed simplex labels; gradients flow into
// the classifier head and backbone, scaled by `scale`.
double gce_batch(ModelSet& m, const Matrix& X, const Matrix& labels, double q, bool backprop,
                 double scale) {
  const int n = X.rows;
  Mlp::Cache bb_cache;
  Matrix feat = m.backbone.forward(m.disc_params, X, backprop ? &bb_cache : nullptr);
  Matrix probs;
  kernels::softmax_rows(m.cls.logits(m.disc_params, feat), probs);

  Vec p;
  kernels::row_dots(probs, labels, p);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) loss += gce_from_p(p[static_cast<size_t>(i)], q);
  loss /= n;

  if (backprop && scale != 0.0) {
    Matrix dProbs(n, probs.cols);
    for (int i = 0; i < n; ++i) {
      const double g = scale * gce_grad_p(p[static_cast<size_t>(i)], q) / n;
      const double* l = labels.row(i);
      double* dp = dProbs.row(i);
      for (int j = 0; j < probs.cols; ++j) dp[j] = g * l[j];
    }
    Matrix dLogits;
    softmax_backward(probs, dProbs, dLogits);
    Matrix dFeat = m.cls.backward(m.disc_params, feat, dLogits, /*acc=*/true);
    m.backbone.backward(m.disc_params, bb_cache, dFeat, /*acc=*/true);
  }
  return loss;
}

}  // namespace

double cls_loss(ModelSet& m, const Matrix& X, const std::vector<int>& given, const Matrix& Xfake,
                const Matrix& Yfake, double q, bool backprop, double scale) {
  if (Xfake.rows == 0) throw ContractError("cls_loss: empty fake batch");
  if (X.rows != static_cast<int>(given.size()))
    throw ContractError("cls_loss: labels do not match the batch");

  double real_term = 0.0;
  if (X.rows > 0) {
    Matrix Yreal = one_hot_rows(given, m.cfg.K);
    real_term = gce_batch(m, X, Yreal, q, backprop, scale);
  }
  double fake_term = gce_batch(m, Xfake, Yfake, q, backprop, scale);
  return real_term + fake_term;
}

double combine_d_loss(double lbl, double unlbl, double fake, double cls, double lambda) {
  return lbl + unlbl + fake + lambda * cls;
}

DLossParts total_d_loss(ModelSet& m, const Matrix& X, const std::vector<int>& given,
                        const Matrix& U, const Matrix& Z, const Matrix& Y, const LossConfig& cfg,
                        bool backprop) {
  cfg.validate();
  DLossParts parts;
  parts.lbl = d_loss_labeled(m, X, given, cfg, backprop);
  parts.unlbl = d_loss_unlabeled(m, U, cfg, backprop);
  parts.fake = d_loss_fake(m, Z, Y, backprop);
  if (cfg.use_classifier) {
    Matrix Xf = m.generator.forward(m.gen_params, Z, Y, nullptr);
    parts.cls = cls_loss(m, X, given, Xf, Y, cfg.q_gce, backprop, cfg.lambda_cls);
  }
  parts.total = combine_d_loss(parts.lbl, parts.unlbl, parts.fake, parts.cls, cfg.lambda_cls);
  return parts;
}

double g_loss(ModelSet& m, const Matrix& Z, const Matrix& Y, bool backprop) {
  if (Z.rows == 0) throw ContractError("g_loss: empty latent batch");
  Generator::Cache gen_cache;
  Matrix Xf = m.generator.forward(m.gen_params, Z, Y, backprop ? &gen_cache : nullptr);

  Mlp::Cache bb_cache;
  Matrix feat = m.backbone.forward(m.disc_params, Xf, backprop ? &bb_cache : nullptr);
  Vec scores = m.proj.score(m.disc_params, feat, Y);

  const int n = Xf.rows;
  double loss = 0.0;
  for (double s : scores) loss -= s;
  loss /= n;

  if (backprop) {
    Vec dscore(static_cast<size_t>(n), -1.0 / n);
    // Discriminator parameters are pass-through only here.
    Matrix dFeat = m.proj.backward(m.disc_params, feat, Y, dscore, /*acc=*/false);
    Matrix dXf = m.backbone.backward(m.disc_params, bb_cache, dFeat, /*acc=*/false);
    m.generator.backward(m.gen_params, gen_cache, Y, dXf, /*acc=*/true);
  }
  return loss;
}

std::pair<double, double> supervised_losses(ModelSet& m, const Matrix& X,
                                            const std::vector<int>& given, const Matrix& Z,
                                            const Matrix& Y, bool backprop_d, bool backprop_g) {
  if (X.rows != static_cast<int>(given.size()))
    throw ContractError("supervised_losses: labels do not match the batch");

  std::vector<InstanceTerms> terms(static_cast<size_t>(X.rows));
  for (int i = 0; i < X.rows; ++i) {
    InstanceTerms& t = terms[static_cast<size_t>(i)];
    t.label = one_hot(m.cfg.K, given[static_cast<size_t>(i)]);
    t.confidence = 1.0;
    t.weight = 1.0;
  }
  double d = real_hinge_from_terms(m, X, terms, backprop_d) + d_loss_fake(m, Z, Y, backprop_d);
  double g = g_loss(m, Z, Y, backprop_g);
  return {d, g};
}

}  // namespace losses

}  // namespace scgan
