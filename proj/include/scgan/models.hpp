#pragma once

#include "scgan/numerics.hpp"

namespace scgan {

struct ModelConfig {
  int d = 2;          // data dimensionality
  int K = 8;          // closed-set classes
  int d_z = 16;       // latent dimension
  int h_embed = 32;   // generator label-embedding width
  int h_feat = 32;    // shared feature width
  int g_hidden = 64;
  int d_hidden = 64;
  double leaky_slope = 0.2;
};

// G(z, y): the label embedding is mixed linearly by the soft label, so any
// simplex point is a valid condition, then [z | mix] runs through the trunk.
struct Generator {
  std::string embed;  // K x h_embed
  Mlp trunk;          // (d_z + h_embed) -> g_hidden -> g_hidden -> d, rectifier

  struct Cache {
    Matrix input;  // [z | y E]
    Mlp::Cache trunk;
  };

  void init(ParamStore& store, const ModelConfig& cfg, Rng& rng);
  Matrix forward(const ParamStore& store, const Matrix& Z, const Matrix& Y, Cache* cache) const;
  void backward(ParamStore& store, const Cache& cache, const Matrix& Y, const Matrix& dX,
                bool acc_param_grads) const;
};

// Feature extractor shared by the adversarial and classifier heads.
struct Backbone {
  Mlp mlp;  // d -> d_hidden -> d_hidden -> h_feat, leaky units throughout

  void init(ParamStore& store, const ModelConfig& cfg, Rng& rng);
  Matrix forward(const ParamStore& store, const Matrix& X, Mlp::Cache* cache) const {
    return mlp.forward(store, X, cache);
  }
  Matrix backward(ParamStore& store, const Mlp::Cache& cache, const Matrix& dFeat,
                  bool acc_param_grads) const {
    return mlp.backward(store, cache, dFeat, acc_param_grads);
  }
};

// D(x, y) = psi(phi(x)) + y . (V phi(x)): affine in the label, so any simplex
// point conditions it.
struct ProjectionHead {
  Dense psi;      // h_feat -> 1
  std::string v;  // K x h_feat

  void init(ParamStore& store, const ModelConfig& cfg, Rng& rng);
  Vec score(const ParamStore& store, const Matrix& feat, const Matrix& Y) const;
  // Returns dFeat; Y is treated as a constant.
  Matrix backward(ParamStore& store, const Matrix& feat, const Matrix& Y, const Vec& dscore,
                  bool acc_param_grads) const;
};

// Linear map to K logits; the softmax output lives on the open simplex. The
// final layer starts at zero, so a fresh classifier is exactly uniform.
struct ClassifierHead {
  Dense lin;  // h_feat -> K

  void init(ParamStore& store, const ModelConfig& cfg, Rng& rng);
  Matrix logits(const ParamStore& store, const Matrix& feat) const { return lin.forward(store, feat); }
  Matrix probs(const ParamStore& store, const Matrix& feat) const;
  Matrix backward(ParamStore& store, const Matrix& feat, const Matrix& dLogits,
                  bool acc_param_grads) const {
    return lin.backward(store, feat, dLogits, acc_param_grads);
  }
};

// The three networks. Generator parameters live in their own store; backbone,
// projection head and classifier head share the discriminator store and are
// updated together.
struct ModelSet {
  ModelConfig cfg;
  ParamStore gen_params;
  ParamStore disc_params;
  Generator generator;
  Backbone backbone;
  ProjectionHead proj;
  ClassifierHead cls;

  static ModelSet create(const ModelConfig& cfg, uint64_t seed);

  Matrix generate(const Matrix& Z, const Matrix& Y) const;
  Matrix features(const Matrix& X) const;
  // Softmax probabilities; an annotation pass with no gradient bookkeeping.
  Matrix classify(const Matrix& X) const;
  Vec d_score(const Matrix& X, const Matrix& Y) const;
};

// Softmax backward: dLogits from dProbs at the recorded probabilities.
void softmax_backward(const Matrix& probs, const Matrix& dProbs, Matrix& dLogits);

}  // namespace scgan
