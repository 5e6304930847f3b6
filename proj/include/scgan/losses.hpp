#pragma once

#include "scgan/models.hpp"

namespace scgan {

// Resolved loss behaviour for one training strategy. The trainer fills these
// flags; the defaults are the full soft-curriculum method.
struct LossConfig {
  double lambda_cls = 0.1;  // balance between adversarial and classifier loss
  double q_gce = 0.7;       // generalized cross entropy exponent, 0 = plain CE
  double tau = 0.5;         // hard-curriculum keep threshold

  bool use_classifier = true;  // classifier is trained and drives labels/weights
  bool correct_labels = true;  // labeled condition is (y + yhat)/2, else the given y

  enum class Weighting { confidence, one };
  Weighting weighting = Weighting::confidence;

  enum class UnlabeledLabels { assigned, random_one_hot, constant_uniform, hard_threshold, none };
  UnlabeledLabels unlabeled = UnlabeledLabels::assigned;

  void validate() const;
};

// Per-instance curriculum state for one discriminator step.
struct InstanceTerms {
  Vec prediction;      // classifier softmax output, empty when unused
  double confidence = 0.0;
  Vec label;           // effective conditioning label on the simplex
  double weight = 1.0;
  bool kept = true;
  double score = 0.0;         // filled by loss evaluation
  double contribution = 0.0;  // weight * hinge(-score), filled by loss evaluation
};

struct CurriculumBatchTerms {
  std::vector<InstanceTerms> labeled;
  std::vector<InstanceTerms> unlabeled;
};

namespace losses {

// Discriminator hinge f_D(s) = max(0, 1 + s); the subgradient at the kink is 0.
double hinge_d(double score);
double hinge_d_slope(double score);

// Generalized cross entropy (1 - p^q)/q with p = pred . label. q = 0 is the
// cross-entropy limit -ln p with the probability floored at 1e-12.
double gce(const Vec& pred, const Vec& label, double q);
double gce_from_p(double p, double q);
double gce_grad_p(double p, double q);

// One minus the normalized prediction entropy: 0 at uniform, 1 at one-hot.
double confidence(const Vec& pred);

// Simple average of the given and predicted labels.
Vec correct_label(const Vec& given, const Vec& pred);

// Soft labels are kept as-is; no argmax hardening.
Vec assign_label(const Vec& pred);

// Mean_i weight_i * f_D(-D(x_i, label_i)) over kept instances. Labels and
// weights are constants; gradients flow through the discriminator path only.
double real_hinge_from_terms(ModelSet& m, const Matrix& X, std::vector<InstanceTerms>& terms,
                             bool backprop);

// Adversarial losses on real data with the soft-curriculum annotations
// (classifier outputs detached).
double d_loss_labeled(ModelSet& m, const Matrix& X, const std::vector<int>& given,
                      const LossConfig& cfg, bool backprop,
                      std::vector<InstanceTerms>* terms_out = nullptr);
double d_loss_unlabeled(ModelSet& m, const Matrix& U, const LossConfig& cfg, bool backprop,
                        std::vector<InstanceTerms>* terms_out = nullptr);

// Mean f_D(D(G(z, y), y)); the generator is a constant here.
double d_loss_fake(ModelSet& m, const Matrix& Z, const Matrix& Y, bool backprop);

// Mean GCE on real labeled pairs plus mean GCE on generated pairs. The
// generated samples update the classifier only, never the generator. `scale`
// multiplies the gradient (the lambda of the combined objective).
double cls_loss(ModelSet& m, const Matrix& X, const std::vector<int>& given, const Matrix& Xfake,
                const Matrix& Yfake, double q, bool backprop, double scale = 1.0);

struct DLossParts {
  double lbl = 0.0;
  double unlbl = 0.0;
  double fake = 0.0;
  double cls = 0.0;
  double total = 0.0;
};

double combine_d_loss(double lbl, double unlbl, double fake, double cls, double lambda);

// The combined discriminator objective under the soft-curriculum flags.
DLossParts total_d_loss(ModelSet& m, const Matrix& X, const std::vector<int>& given,
                        const Matrix& U, const Matrix& Z, const Matrix& Y, const LossConfig& cfg,
                        bool backprop);

// Generator objective: mean of -D(G(z, y), y). Discriminator parameters
// receive no gradient.
double g_loss(ModelSet& m, const Matrix& Z, const Matrix& Y, bool backprop);

// Plain supervised baseline: hinge on the given labels plus the fake hinge,
// and the generator loss on the same draws.
std::pair<double, double> supervised_losses(ModelSet& m, const Matrix& X,
                                            const std::vector<int>& given, const Matrix& Z,
                                            const Matrix& Y, bool backprop_d, bool backprop_g);

}  // namespace losses

}  // namespace scgan
