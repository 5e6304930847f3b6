#include "scgan/models.hpp"

#include "scgan/kernels.hpp"

namespace scgan {

void Generator::init(ParamStore& store, const ModelConfig& cfg, Rng& rng) {
  embed = "G.embed";
  Matrix& e = store.add(embed, cfg.K, cfg.h_embed);
  orthogonal_init(e, rng);
  trunk.init(store, "G.trunk", {cfg.d_z + cfg.h_embed, cfg.g_hidden, cfg.g_hidden, cfg.d},
             /*slope=*/0.0, /*activate_output=*/false, rng);
}

Matrix Generator::forward(const ParamStore& store, const Matrix& Z, const Matrix& Y,
                          Cache* cache) const {
  const Matrix& E = store.value(embed);
  if (Y.cols != E.rows) throw ContractError("Generator::forward: label width mismatch");
  Matrix mix;
  kernels::matmul(Y, E, mix);
  if (mix.rows != Z.rows) throw ContractError("Generator::forward: batch size mismatch");

  Matrix input(Z.rows, Z.cols + mix.cols);
  for (int i = 0; i < Z.rows; ++i) {
    std::copy(Z.row(i), Z.row(i) + Z.cols, input.row(i));
    std::copy(mix.row(i), mix.row(i) + mix.cols, input.row(i) + Z.cols);
  }
  if (cache) cache->input = input;
  return trunk.forward(store, input, cache ? &cache->trunk : nullptr);
}

void Generator::backward(ParamStore& store, const Cache& cache, const Matrix& Y, const Matrix& dX,
                         bool acc_param_grads) const {
  Matrix dInput = trunk.backward(store, cache.trunk, dX, acc_param_grads);
  if (!acc_param_grads) return;
  const Matrix& E = store.value(embed);
  const int d_z = cache.input.cols - E.cols;
  Matrix dMix(dInput.rows, E.cols);
  for (int i = 0; i < dInput.rows; ++i)
    std::copy(dInput.row(i) + d_z, dInput.row(i) + dInput.cols, dMix.row(i));
  kernels::matmul_at(Y, dMix, store.grad(embed), /*accumulate=*/true);
}

void Backbone::init(ParamStore& store, const ModelConfig& cfg, Rng& rng) {
  mlp.init(store, "D.phi", {cfg.d, cfg.d_hidden, cfg.d_hidden, cfg.h_feat}, cfg.leaky_slope,
           /*activate_output=*/true, rng);
}

void ProjectionHead::init(ParamStore& store, const ModelConfig& cfg, Rng& rng) {
  psi.init(store, "D.psi", cfg.h_feat, 1, rng);
  v = "D.V";
  Matrix& V = store.add(v, cfg.K, cfg.h_feat);
  orthogonal_init(V, rng);
}

Vec ProjectionHead::score(const ParamStore& store, const Matrix& feat, const Matrix& Y) const {
  Matrix base = psi.forward(store, feat);  // n x 1
  Matrix fv;
  kernels::matmul_bt(feat, store.value(v), fv);  // n x K
  if (!fv.same_shape(Y)) throw ContractError("ProjectionHead::score: label shape mismatch");
  Vec proj;
  kernels::row_dots(Y, fv, proj);
  Vec s(static_cast<size_t>(feat.rows));
  for (int i = 0; i < feat.rows; ++i) s[static_cast<size_t>(i)] = base.at(i, 0) + proj[static_cast<size_t>(i)];
  return s;
}

Matrix ProjectionHead::backward(ParamStore& store, const Matrix& feat, const Matrix& Y,
                                const Vec& dscore, bool acc_param_grads) const {
  if (static_cast<int>(dscore.size()) != feat.rows)
    throw ContractError("ProjectionHead::backward: score length mismatch");
  Matrix ds(feat.rows, 1);
  for (int i = 0; i < feat.rows; ++i) ds.at(i, 0) = dscore[static_cast<size_t>(i)];

  Matrix dFeat = psi.backward(store, feat, ds, acc_param_grads);

  Matrix yw;  // rows of Y scaled by dscore
  kernels::scale_rows(Y, dscore, yw);
  Matrix dFromProj;
  kernels::matmul(yw, store.value(v), dFromProj);
  for (size_t i = 0; i < dFeat.data.size(); ++i) dFeat.data[i] += dFromProj.data[i];

  if (acc_param_grads) kernels::matmul_at(yw, feat, store.grad(v), /*accumulate=*/true);
  return dFeat;
}

void ClassifierHead::init(ParamStore& store, const ModelConfig& cfg, Rng& rng) {
  lin.init(store, "D.cls", cfg.h_feat, cfg.K, rng, /*zero_init=*/true);
}

Matrix ClassifierHead::probs(const ParamStore& store, const Matrix& feat) const {
  Matrix p;
  kernels::softmax_rows(logits(store, feat), p);
  return p;
}

ModelSet ModelSet::create(const ModelConfig& cfg, uint64_t seed) {
  ModelSet m;
  m.cfg = cfg;
  Rng gen_rng = Rng::stream(seed, "init.gen");
  Rng disc_rng = Rng::stream(seed, "init.disc");
  m.generator.init(m.gen_params, cfg, gen_rng);
  m.backbone.init(m.disc_params, cfg, disc_rng);
  m.proj.init(m.disc_params, cfg, disc_rng);
  m.cls.init(m.disc_params, cfg, disc_rng);
  return m;
}

Matrix ModelSet::generate(const Matrix& Z, const Matrix& Y) const {
  return generator.forward(gen_params, Z, Y, nullptr);
}

Matrix ModelSet::features(const Matrix& X) const {
  return backbone.forward(disc_params, X, nullptr);
}

Matrix ModelSet::classify(const Matrix& X) const {
  return cls.probs(disc_params, features(X));
}

Vec ModelSet::d_score(const Matrix& X, const Matrix& Y) const {
  return proj.score(disc_params, features(X), Y);
}

void softmax_backward(const Matrix& probs, const Matrix& dProbs, Matrix& dLogits) {
  if (!probs.same_shape(dProbs)) throw ContractError("softmax_backward: shape mismatch");
  dLogits.resize(probs.rows, probs.cols);
  for (int i = 0; i < probs.rows; ++i) {
    const double* p = probs.row(i);
    const double* g = dProbs.row(i);
    double* out = dLogits.row(i);
    double gp = 0.0;
    for (int j = 0; j < probs.cols; ++j) gp += g[j] * p[j];
    for (int j = 0; j < probs.cols; ++j) out[j] = p[j] * (g[j] - gp);
  }
}

}  // namespace scgan
