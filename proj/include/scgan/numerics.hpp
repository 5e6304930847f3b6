#pragma once

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "scgan/matrix.hpp"
#include "scgan/rng.hpp"

namespace scgan {

// One named parameter block with its gradient accumulator and Adam moments.
struct Tensor {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m;
  Matrix v;
};

class ParamStore {
 public:
  Matrix& add(const std::string& name, int rows, int cols);
  bool has(const std::string& name) const { return index_.count(name) > 0; }
  Tensor& tensor(const std::string& name);
  const Tensor& tensor(const std::string& name) const;
  Matrix& value(const std::string& name) { return tensor(name).value; }
  const Matrix& value(const std::string& name) const { return tensor(name).value; }
  Matrix& grad(const std::string& name) { return tensor(name).grad; }

  void zero_grads();
  double grad_sq_norm() const;
  bool values_finite() const;
  size_t parameter_count() const;

  std::deque<Tensor>& tensors() { return tensors_; }
  const std::deque<Tensor>& tensors() const { return tensors_; }

  // Number of adam_step calls applied to this store; drives bias correction.
  long adam_t = 0;

 private:
  std::deque<Tensor> tensors_;  // insertion order; deque keeps references stable
  std::map<std::string, size_t> index_;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.0;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected adaptive-moment update over every block in the store.
// Blocks are independent, so the result does not depend on iteration order.
void adam_step(ParamStore& store, const AdamConfig& cfg);

// Orthogonal rows (or columns, whichever is the smaller side) from a Gaussian
// draw followed by modified Gram-Schmidt.
void orthogonal_init(Matrix& w, Rng& rng);

// Fully connected layer: Y = X W^T + b, with W stored out x in.
struct Dense {
  std::string w, b;
  int in = 0, out = 0;

  void init(ParamStore& store, const std::string& prefix, int in_dim, int out_dim, Rng& rng,
            bool zero_init = false);
  void bind(const std::string& prefix, int in_dim, int out_dim);  // names only, no allocation

  Matrix forward(const ParamStore& store, const Matrix& X) const;
  // Accumulates dW/db when acc_param_grads is set; always returns dX.
  Matrix backward(ParamStore& store, const Matrix& X, const Matrix& dY,
                  bool acc_param_grads) const;
};

// Stack of Dense layers with a leaky-rectifier between them (slope 0 gives the
// plain rectifier). The output is linear unless activate_output is set.
struct Mlp {
  std::vector<Dense> layers;
  double slope = 0.2;
  bool activate_output = false;

  struct Cache {
    std::vector<Matrix> inputs;   // input to each layer
    std::vector<Matrix> preacts;  // linear output of each layer
  };

  void init(ParamStore& store, const std::string& prefix, const std::vector<int>& dims,
            double slope_, bool activate_output_, Rng& rng);
  void bind(const std::string& prefix, const std::vector<int>& dims, double slope_,
            bool activate_output_);

  Matrix forward(const ParamStore& store, const Matrix& X, Cache* cache) const;
  Matrix backward(ParamStore& store, const Cache& cache, const Matrix& dOut,
                  bool acc_param_grads) const;
};

// Central-difference gradient verification. `loss(true)` must accumulate
// analytic gradients into the store; `loss(false)` must only evaluate.
struct GradCheckReport {
  struct Block {
    std::string name;
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
  };
  std::vector<Block> blocks;
  double worst_rel_err = 0.0;
  bool pass = false;
};

GradCheckReport check_gradients(ParamStore& params, const std::function<double(bool)>& loss,
                                double step = 1e-5, double tolerance = 1e-4);

}  // namespace scgan
