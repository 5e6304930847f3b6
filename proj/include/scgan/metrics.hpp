#pragma once

#include "scgan/corpus.hpp"
#include "scgan/models.hpp"

namespace scgan {

// Symmetric eigendecomposition by cyclic Jacobi rotations. S must be square
// and symmetric; evecs columns hold the eigenvectors.
void sym_eigen(const Matrix& S, Vec& evals, Matrix& evecs);

// Gaussian Frechet distance |mu_A - mu_B|^2 + Tr(Sa + Sb - 2 (Sa Sb)^(1/2)).
// The matrix square root comes from the eigendecomposition of the symmetrized
// product; negative eigenvalues are clamped at zero (warned below -1e-10), and
// a near-singular covariance gets a +1e-6 diagonal ridge, also warned.
double frechet_distance(const Matrix& A, const Matrix& B,
                        std::vector<std::string>* warnings = nullptr);

// Mean per-class Frechet distance over the K closed classes. Classes with
// fewer than d+1 samples on either side are skipped and flagged.
double intra_frechet(const Matrix& real_x, const std::vector<int>& real_y, const Matrix& gen_x,
                     const std::vector<int>& gen_y, int K,
                     std::vector<std::string>* warnings = nullptr);

struct KMeansResult {
  Matrix centers;
  std::vector<int> assign;
  double inertia = 0.0;
};

// Lloyd iterations with k-means++ seeding; `restarts` runs, best inertia kept.
KMeansResult kmeans(const Matrix& X, int k, int restarts, uint64_t seed, int max_iter = 100);

struct PrdScores {
  double f8 = 0.0;
  double f_eighth = 0.0;
};

// Precision-recall curve for a pair of histograms over shared support:
// precision(lambda) = sum_i min(lambda p_i, q_i), recall = sum_i min(p_i,
// q_i / lambda), lambda = tan(theta) swept over num_angles angles. Returns the
// maximal F_8 and F_{1/8} along the curve.
PrdScores prd_from_histograms(const Vec& ref_hist, const Vec& eval_hist, int num_angles = 1001);

// Cluster the union of both sets, build the two cluster-mass histograms, then
// sweep the curve above.
PrdScores prd_f_scores(const Matrix& real_f, const Matrix& gen_f, int num_clusters = 20,
                       int num_angles = 1001, uint64_t seed = 0);

// exp(mean KL(p(y|x) || marginal)) over the rows of a probability matrix.
double is_analogue(const Matrix& probs);

// Mann-Whitney AUC with midrank tie handling; probability that a positive
// scores above a negative.
double roc_auc(const Vec& positives, const Vec& negatives);

// Classifier trained on the clean evaluation split; stands in for the fixed
// feature network when scoring generated samples.
struct Oracle {
  ModelConfig cfg;
  ParamStore params;
  Backbone backbone;
  ClassifierHead head;

  Matrix probs(const Matrix& X) const { return head.probs(params, backbone.forward(params, X, nullptr)); }
  double accuracy(const Matrix& X, const std::vector<int>& labels) const;
};

Oracle train_oracle(const EvalSet& eval, const ModelConfig& arch, uint64_t seed,
                    int steps = 1500, int batch_size = 128, double lr = 1e-3);

struct Diagnostics {
  double cls_accuracy = 0.0;
  double correction_accuracy = 0.0;
  double confidence_auc = 0.0;
};

// Provenance-aware curriculum diagnostics:
//   cls_accuracy        argmax C(x) vs the true class over closed-set samples;
//   correction_accuracy fraction of flipped labeled samples whose corrected
//                       label moves its classifier mass onto the true class
//                       (argmax of yhat equals the true class);
//   confidence_auc      AUC separating closed-set from open-set unlabeled
//                       samples by confidence.
Diagnostics curriculum_diagnostics(const ModelSet& models, const Corpus& corpus);

}  // namespace scgan
