#include "scgan/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "scgan/kernels.hpp"

namespace scgan {

Matrix& ParamStore::add(const std::string& name, int rows, int cols) {
  if (has(name)) throw ContractError("ParamStore::add: duplicate tensor " + name);
  Tensor t;
  t.name = name;
  t.value.resize(rows, cols);
  t.grad.resize(rows, cols);
  t.m.resize(rows, cols);
  t.v.resize(rows, cols);
  index_[name] = tensors_.size();
  tensors_.push_back(std::move(t));
  return tensors_.back().value;
}

Tensor& ParamStore::tensor(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("ParamStore: unknown tensor " + name);
  return tensors_[it->second];
}

const Tensor& ParamStore::tensor(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("ParamStore: unknown tensor " + name);
  return tensors_[it->second];
}

void ParamStore::zero_grads() {
  for (Tensor& t : tensors_) t.grad.fill(0.0);
}

double ParamStore::grad_sq_norm() const {
  double s = 0.0;
  for (const Tensor& t : tensors_)
    for (double g : t.grad.data) s += g * g;
  return s;
}

bool ParamStore::values_finite() const {
  for (const Tensor& t : tensors_)
    for (double v : t.value.data)
      if (!std::isfinite(v)) return false;
  return true;
}

size_t ParamStore::parameter_count() const {
  size_t n = 0;
  for (const Tensor& t : tensors_) n += t.value.data.size();
  return n;
}

void adam_step(ParamStore& store, const AdamConfig& cfg) {
  store.adam_t += 1;
  const double t = static_cast<double>(store.adam_t);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (Tensor& p : store.tensors()) {
    for (size_t i = 0; i < p.value.data.size(); ++i) {
      const double g = p.grad.data[i];
      p.m.data[i] = cfg.beta1 * p.m.data[i] + (1.0 - cfg.beta1) * g;
      p.v.data[i] = cfg.beta2 * p.v.data[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = p.m.data[i] / bc1;
      const double vhat = p.v.data[i] / bc2;
      p.value.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

void orthogonal_init(Matrix& w, Rng& rng) {
  const bool by_rows = w.rows <= w.cols;
  const int nvec = by_rows ? w.rows : w.cols;
  const int dim = by_rows ? w.cols : w.rows;

  // Gaussian draw, then modified Gram-Schmidt over the smaller side.
  std::vector<Vec> basis(static_cast<size_t>(nvec), Vec(static_cast<size_t>(dim)));
  for (auto& v : basis)
    for (auto& x : v) x = rng.normal();

  for (int i = 0; i < nvec; ++i) {
    Vec& vi = basis[static_cast<size_t>(i)];
    for (int attempt = 0;; ++attempt) {
      for (int j = 0; j < i; ++j) {
        const Vec& vj = basis[static_cast<size_t>(j)];
        double proj = dot(vi, vj);
        for (int k = 0; k < dim; ++k) vi[static_cast<size_t>(k)] -= proj * vj[static_cast<size_t>(k)];
      }
      double norm = std::sqrt(dot(vi, vi));
      if (norm > 1e-10) {
        for (auto& x : vi) x /= norm;
        break;
      }
      if (attempt > 32) throw ContractError("orthogonal_init: degenerate draw");
      for (auto& x : vi) x = rng.normal();
    }
  }

  for (int i = 0; i < nvec; ++i)
    for (int k = 0; k < dim; ++k) {
      if (by_rows) {
        w.at(i, k) = basis[static_cast<size_t>(i)][static_cast<size_t>(k)];
      } else {
        w.at(k, i) = basis[static_cast<size_t>(i)][static_cast<size_t>(k)];
      }
    }
}

void Dense::bind(const std::string& prefix, int in_dim, int out_dim) {
  w = prefix + ".W";
  b = prefix + ".b";
  in = in_dim;
  out = out_dim;
}

void Dense::init(ParamStore& store, const std::string& prefix, int in_dim, int out_dim, Rng& rng,
                 bool zero_init) {
  bind(prefix, in_dim, out_dim);
  Matrix& W = store.add(w, out_dim, in_dim);
  store.add(b, 1, out_dim);
  if (!zero_init) orthogonal_init(W, rng);
}

Matrix Dense::forward(const ParamStore& store, const Matrix& X) const {
  if (X.cols != in) throw ContractError("Dense::forward: input width " + std::to_string(X.cols) +
                                        " != " + std::to_string(in) + " for " + w);
  // X W^T via an explicit transpose: the row-accumulation matmul form
  // vectorizes, the row-dot form does not. The transpose itself is cheap
  // next to the multiply.
  const Matrix& W = store.value(w);
  Matrix wt(W.cols, W.rows);
  for (int i = 0; i < W.rows; ++i)
    for (int j = 0; j < W.cols; ++j) wt.at(j, i) = W.at(i, j);
  Matrix Y;
  kernels::matmul(X, wt, Y);
  kernels::add_bias(Y, store.value(b));
  return Y;
}

Matrix Dense::backward(ParamStore& store, const Matrix& X, const Matrix& dY,
                       bool acc_param_grads) const {
  if (dY.cols != out || dY.rows != X.rows)
    throw ContractError("Dense::backward: upstream shape mismatch for " + w);
  if (acc_param_grads) {
    kernels::matmul_at(dY, X, store.grad(w), /*accumulate=*/true);
    kernels::col_sums(dY, store.grad(b), /*accumulate=*/true);
  }
  Matrix dX;
  kernels::matmul(dY, store.value(w), dX);
  return dX;
}

void Mlp::bind(const std::string& prefix, const std::vector<int>& dims, double slope_,
               bool activate_output_) {
  slope = slope_;
  activate_output = activate_output_;
  layers.clear();
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    Dense d;
    d.bind(prefix + ".l" + std::to_string(l), dims[l], dims[l + 1]);
    layers.push_back(d);
  }
}

void Mlp::init(ParamStore& store, const std::string& prefix, const std::vector<int>& dims,
               double slope_, bool activate_output_, Rng& rng) {
  slope = slope_;
  activate_output = activate_output_;
  layers.clear();
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    Dense d;
    d.init(store, prefix + ".l" + std::to_string(l), dims[l], dims[l + 1], rng);
    layers.push_back(d);
  }
}

Matrix Mlp::forward(const ParamStore& store, const Matrix& X, Cache* cache) const {
  if (cache) {
    cache->inputs.clear();
    cache->preacts.clear();
  }
  Matrix cur = X;
  for (size_t l = 0; l < layers.size(); ++l) {
    if (cache) cache->inputs.push_back(cur);
    Matrix pre = layers[l].forward(store, cur);
    const bool act = l + 1 < layers.size() || activate_output;
    if (act) {
      Matrix post;
      kernels::leaky_relu(pre, slope, post);
      if (cache) cache->preacts.push_back(std::move(pre));
      cur = std::move(post);
    } else {
      if (cache) cache->preacts.push_back(pre);
      cur = std::move(pre);
    }
  }
  return cur;
}

Matrix Mlp::backward(ParamStore& store, const Cache& cache, const Matrix& dOut,
                     bool acc_param_grads) const {
  if (cache.inputs.size() != layers.size())
    throw ContractError("Mlp::backward: cache does not match forward");
  Matrix d = dOut;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const bool act = l + 1 < static_cast<int>(layers.size()) || activate_output;
    if (act) {
      Matrix tmp;
      kernels::leaky_relu_grad(cache.preacts[static_cast<size_t>(l)], d, slope, tmp);
      d = std::move(tmp);
    }
    d = layers[static_cast<size_t>(l)].backward(store, cache.inputs[static_cast<size_t>(l)], d,
                                                acc_param_grads);
  }
  return d;
}

GradCheckReport check_gradients(ParamStore& params, const std::function<double(bool)>& loss,
                                double step, double tolerance) {
  params.zero_grads();
  (void)loss(true);

  // Snapshot analytic gradients; the probe evaluations must not disturb them.
  std::vector<Matrix> analytic;
  analytic.reserve(params.tensors().size());
  for (const Tensor& t : params.tensors()) analytic.push_back(t.grad);

  GradCheckReport report;
  for (size_t bi = 0; bi < params.tensors().size(); ++bi) {
    Tensor& t = params.tensors()[bi];
    GradCheckReport::Block block;
    block.name = t.name;
    for (size_t i = 0; i < t.value.data.size(); ++i) {
      const double saved = t.value.data[i];
      t.value.data[i] = saved + step;
      const double fp = loss(false);
      t.value.data[i] = saved - step;
      const double fm = loss(false);
      t.value.data[i] = saved;
      const double numeric = (fp - fm) / (2.0 * step);
      const double a = analytic[bi].data[i];
      const double abs_err = std::abs(a - numeric);
      const double rel_err = abs_err / std::max({std::abs(a), std::abs(numeric), 1e-6});
      block.max_abs_err = std::max(block.max_abs_err, abs_err);
      block.max_rel_err = std::max(block.max_rel_err, rel_err);
    }
    report.worst_rel_err = std::max(report.worst_rel_err, block.max_rel_err);
    report.blocks.push_back(std::move(block));
  }
  report.pass = report.worst_rel_err < tolerance;

  // Leave the store with the analytic gradients, as loss(true) produced them.
  for (size_t bi = 0; bi < params.tensors().size(); ++bi)
    params.tensors()[bi].grad = analytic[bi];
  return report;
}

}  // namespace scgan
