#pragma once

#include <cstddef>
#include <vector>

#include "scgan/errors.hpp"

namespace scgan {

// Dense row-major matrix of doubles. All training math runs in 64-bit.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  void resize(int r, int c) {
    rows = r;
    cols = c;
    data.assign(static_cast<size_t>(r) * c, 0.0);
  }

  double* row(int i) { return data.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<size_t>(i) * cols; }

  double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }
  bool empty() const { return rows == 0 || cols == 0; }
};

using Vec = std::vector<double>;

inline Vec one_hot(int k, int index) {
  if (index < 0 || index >= k) throw ContractError("one_hot: index out of range");
  Vec v(static_cast<size_t>(k), 0.0);
  v[static_cast<size_t>(index)] = 1.0;
  return v;
}

inline Vec uniform_simplex(int k) {
  return Vec(static_cast<size_t>(k), 1.0 / k);
}

inline double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ContractError("dot: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline int argmax(const Vec& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[static_cast<size_t>(i)] > v[static_cast<size_t>(best)]) best = i;
  return best;
}

inline Vec get_row(const Matrix& m, int i) {
  return Vec(m.row(i), m.row(i) + m.cols);
}

inline void set_row(Matrix& m, int i, const Vec& v) {
  if (static_cast<int>(v.size()) != m.cols) throw ContractError("set_row: size mismatch");
  std::copy(v.begin(), v.end(), m.row(i));
}

}  // namespace scgan
