#include "scgan/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scgan::kernels {

namespace {

Backend g_backend = openmp_available() ? Backend::openmp : Backend::serial;

int read_thread_cap() {
  const char* env = std::getenv("SC_GAN_THREADS");
  if (!env) return 0;
  int v = std::atoi(env);
  return v > 0 ? v : 0;
}

void check(bool cond, const char* what) {
  if (!cond) throw ContractError(what);
}

}  // namespace

Backend backend() { return g_backend; }
void set_backend(Backend b) { g_backend = b; }

bool openmp_available() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

int thread_count() {
#ifdef _OPENMP
  static const int cap = read_thread_cap();
  int n = omp_get_max_threads();
  if (cap > 0 && cap < n) n = cap;
  return n;
#else
  return 1;
#endif
}

// ---------------------------------------------------------------------------
// Serial reference. Plain loops, no tricks; kept as the ground truth the
// OpenMP kernels are tested against.
// ---------------------------------------------------------------------------

namespace serial_ref {

void matmul(const Matrix& A, const Matrix& B, Matrix& C) {
  check(A.cols == B.rows, "matmul: inner dimensions differ");
  C.resize(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < B.cols; ++j) {
      double s = 0.0;
      for (int k = 0; k < A.cols; ++k) s += A.at(i, k) * B.at(k, j);
      C.at(i, j) = s;
    }
  }
}

void matmul_bt(const Matrix& A, const Matrix& B, Matrix& C) {
  check(A.cols == B.cols, "matmul_bt: inner dimensions differ");
  C.resize(A.rows, B.rows);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < B.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < A.cols; ++k) s += A.at(i, k) * B.at(j, k);
      C.at(i, j) = s;
    }
  }
}

void matmul_at(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate) {
  check(A.rows == B.rows, "matmul_at: outer dimensions differ");
  if (!accumulate) {
    C.resize(A.cols, B.cols);
  } else {
    check(C.rows == A.cols && C.cols == B.cols, "matmul_at: accumulator shape");
  }
  for (int j = 0; j < A.cols; ++j) {
    for (int k = 0; k < B.cols; ++k) {
      double s = 0.0;
      for (int i = 0; i < A.rows; ++i) s += A.at(i, j) * B.at(i, k);
      if (accumulate) {
        C.at(j, k) += s;
      } else {
        C.at(j, k) = s;
      }
    }
  }
}

void add_bias(Matrix& X, const Matrix& b) {
  check(b.rows == 1 && b.cols == X.cols, "add_bias: bias shape");
  for (int i = 0; i < X.rows; ++i)
    for (int j = 0; j < X.cols; ++j) X.at(i, j) += b.at(0, j);
}

void col_sums(const Matrix& X, Matrix& out, bool accumulate) {
  if (!accumulate) {
    out.resize(1, X.cols);
  } else {
    check(out.rows == 1 && out.cols == X.cols, "col_sums: accumulator shape");
  }
  for (int j = 0; j < X.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < X.rows; ++i) s += X.at(i, j);
    if (accumulate) {
      out.at(0, j) += s;
    } else {
      out.at(0, j) = s;
    }
  }
}

void leaky_relu(const Matrix& X, double slope, Matrix& Y) {
  Y.resize(X.rows, X.cols);
  for (size_t i = 0; i < X.data.size(); ++i) {
    double x = X.data[i];
    Y.data[i] = x > 0.0 ? x : slope * x;
  }
}

void leaky_relu_grad(const Matrix& preact, const Matrix& dY, double slope, Matrix& dX) {
  check(preact.same_shape(dY), "leaky_relu_grad: shape mismatch");
  dX.resize(preact.rows, preact.cols);
  for (size_t i = 0; i < preact.data.size(); ++i)
    dX.data[i] = dY.data[i] * (preact.data[i] > 0.0 ? 1.0 : slope);
}

void softmax_rows(const Matrix& logits, Matrix& probs) {
  probs.resize(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    const double* z = logits.row(i);
    double* p = probs.row(i);
    double mx = z[0];
    for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, z[j]);
    double sum = 0.0;
    for (int j = 0; j < logits.cols; ++j) {
      p[j] = std::exp(z[j] - mx);
      sum += p[j];
    }
    for (int j = 0; j < logits.cols; ++j)
      p[j] = std::min(std::max(p[j] / sum, 1e-300), 0x1.fffffffffffffp-1);
  }
}

void scale_rows(const Matrix& X, const Vec& s, Matrix& Y) {
  check(static_cast<int>(s.size()) == X.rows, "scale_rows: scale length");
  Y.resize(X.rows, X.cols);
  for (int i = 0; i < X.rows; ++i)
    for (int j = 0; j < X.cols; ++j) Y.at(i, j) = s[static_cast<size_t>(i)] * X.at(i, j);
}

void row_dots(const Matrix& A, const Matrix& B, Vec& out) {
  check(A.same_shape(B), "row_dots: shape mismatch");
  out.assign(static_cast<size_t>(A.rows), 0.0);
  for (int i = 0; i < A.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += A.at(i, j) * B.at(i, j);
    out[static_cast<size_t>(i)] = s;
  }
}

void mean_rows(const Matrix& X, Vec& mu) {
  check(X.rows > 0, "mean_rows: empty input");
  mu.assign(static_cast<size_t>(X.cols), 0.0);
  for (int j = 0; j < X.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < X.rows; ++i) s += X.at(i, j);
    mu[static_cast<size_t>(j)] = s / X.rows;
  }
}

void covariance(const Matrix& X, const Vec& mu, Matrix& cov) {
  check(X.rows >= 2, "covariance: need at least two rows");
  check(static_cast<int>(mu.size()) == X.cols, "covariance: mean length");
  cov.resize(X.cols, X.cols);
  for (int a = 0; a < X.cols; ++a) {
    for (int b = 0; b < X.cols; ++b) {
      double s = 0.0;
      for (int i = 0; i < X.rows; ++i)
        s += (X.at(i, a) - mu[static_cast<size_t>(a)]) * (X.at(i, b) - mu[static_cast<size_t>(b)]);
      cov.at(a, b) = s / (X.rows - 1);
    }
  }
}

void pairwise_sq_dists(const Matrix& A, const Matrix& B, Matrix& D) {
  check(A.cols == B.cols, "pairwise_sq_dists: dimension mismatch");
  D.resize(A.rows, B.rows);
  for (int i = 0; i < A.rows; ++i) {
    for (int j = 0; j < B.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < A.cols; ++k) {
        double diff = A.at(i, k) - B.at(j, k);
        s += diff * diff;
      }
      D.at(i, j) = s;
    }
  }
}

}  // namespace serial_ref

// ---------------------------------------------------------------------------
// OpenMP kernels. Work is split by output row only; the reduction order per
// output element matches the serial reference, so results are bit-identical
// for any thread count.
// ---------------------------------------------------------------------------

namespace par {

// Tiny launches lose to the fork/join overhead; below this many inner
// operations the loop runs on the calling thread.
constexpr long kParallelCutoff = 32768;

void matmul(const Matrix& A, const Matrix& B, Matrix& C) {
  check(A.cols == B.rows, "matmul: inner dimensions differ");
  C.resize(A.rows, B.cols);
  const int m = A.rows, kk = A.cols, n = B.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * kk * n >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    double* c = C.row(i);
    const double* a = A.row(i);
    for (int k = 0; k < kk; ++k) {
      const double aik = a[k];
      const double* b = B.row(k);
      for (int j = 0; j < n; ++j) c[j] += aik * b[j];
    }
  }
}

void matmul_bt(const Matrix& A, const Matrix& B, Matrix& C) {
  check(A.cols == B.cols, "matmul_bt: inner dimensions differ");
  C.resize(A.rows, B.rows);
  const int m = A.rows, n = B.rows, kk = A.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n * kk >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    const double* a = A.row(i);
    double* c = C.row(i);
    for (int j = 0; j < n; ++j) {
      const double* b = B.row(j);
      double s = 0.0;
      for (int k = 0; k < kk; ++k) s += a[k] * b[k];
      c[j] = s;
    }
  }
}

void matmul_at(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate) {
  check(A.rows == B.rows, "matmul_at: outer dimensions differ");
  if (!accumulate) {
    C.resize(A.cols, B.cols);
  } else {
    check(C.rows == A.cols && C.cols == B.cols, "matmul_at: accumulator shape");
  }
  const int m = A.rows, ka = A.cols, n = B.cols;
  // The row contribution is built in a scratch buffer and folded in with one
  // add per element, matching the reference's summation order when
  // accumulating into a non-zero C.
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * ka * n >= kParallelCutoff)
  for (int j = 0; j < ka; ++j) {
    std::vector<double> contrib(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < m; ++i) {
      const double aij = A.at(i, j);
      const double* b = B.row(i);
      for (int k = 0; k < n; ++k) contrib[static_cast<size_t>(k)] += aij * b[k];
    }
    double* c = C.row(j);
    if (accumulate) {
      for (int k = 0; k < n; ++k) c[k] += contrib[static_cast<size_t>(k)];
    } else {
      for (int k = 0; k < n; ++k) c[k] = contrib[static_cast<size_t>(k)];
    }
  }
}

void add_bias(Matrix& X, const Matrix& b) {
  check(b.rows == 1 && b.cols == X.cols, "add_bias: bias shape");
  const int m = X.rows, n = X.cols;
  const double* bias = b.row(0);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    double* x = X.row(i);
    for (int j = 0; j < n; ++j) x[j] += bias[j];
  }
}

void col_sums(const Matrix& X, Matrix& out, bool accumulate) {
  if (!accumulate) {
    out.resize(1, X.cols);
  } else {
    check(out.rows == 1 && out.cols == X.cols, "col_sums: accumulator shape");
  }
  const int m = X.rows, n = X.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n >= kParallelCutoff)
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += X.at(i, j);
    if (accumulate) {
      out.at(0, j) += s;
    } else {
      out.at(0, j) = s;
    }
  }
}

void leaky_relu(const Matrix& X, double slope, Matrix& Y) {
  Y.resize(X.rows, X.cols);
  const int m = X.rows, n = X.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    const double* x = X.row(i);
    double* y = Y.row(i);
    for (int j = 0; j < n; ++j) y[j] = x[j] > 0.0 ? x[j] : slope * x[j];
  }
}

void leaky_relu_grad(const Matrix& preact, const Matrix& dY, double slope, Matrix& dX) {
  check(preact.same_shape(dY), "leaky_relu_grad: shape mismatch");
  dX.resize(preact.rows, preact.cols);
  const int m = preact.rows, n = preact.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    const double* z = preact.row(i);
    const double* g = dY.row(i);
    double* d = dX.row(i);
    for (int j = 0; j < n; ++j) d[j] = g[j] * (z[j] > 0.0 ? 1.0 : slope);
  }
}

void softmax_rows(const Matrix& logits, Matrix& probs) {
  probs.resize(logits.rows, logits.cols);
  const int m = logits.rows, n = logits.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    const double* z = logits.row(i);
    double* p = probs.row(i);
    double mx = z[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, z[j]);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      p[j] = std::exp(z[j] - mx);
      sum += p[j];
    }
    for (int j = 0; j < n; ++j)
      p[j] = std::min(std::max(p[j] / sum, 1e-300), 0x1.fffffffffffffp-1);
  }
}

void scale_rows(const Matrix& X, const Vec& s, Matrix& Y) {
  check(static_cast<int>(s.size()) == X.rows, "scale_rows: scale length");
  Y.resize(X.rows, X.cols);
  const int m = X.rows, n = X.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    const double si = s[static_cast<size_t>(i)];
    const double* x = X.row(i);
    double* y = Y.row(i);
    for (int j = 0; j < n; ++j) y[j] = si * x[j];
  }
}

void row_dots(const Matrix& A, const Matrix& B, Vec& out) {
  check(A.same_shape(B), "row_dots: shape mismatch");
  out.assign(static_cast<size_t>(A.rows), 0.0);
  const int m = A.rows, n = A.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    const double* a = A.row(i);
    const double* b = B.row(i);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += a[j] * b[j];
    out[static_cast<size_t>(i)] = s;
  }
}

void mean_rows(const Matrix& X, Vec& mu) {
  check(X.rows > 0, "mean_rows: empty input");
  mu.assign(static_cast<size_t>(X.cols), 0.0);
  const int m = X.rows, n = X.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n >= kParallelCutoff)
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += X.at(i, j);
    mu[static_cast<size_t>(j)] = s / m;
  }
}

void covariance(const Matrix& X, const Vec& mu, Matrix& cov) {
  check(X.rows >= 2, "covariance: need at least two rows");
  check(static_cast<int>(mu.size()) == X.cols, "covariance: mean length");
  cov.resize(X.cols, X.cols);
  const int m = X.rows, n = X.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n * n >= kParallelCutoff)
  for (int a = 0; a < n; ++a) {
    const double mua = mu[static_cast<size_t>(a)];
    for (int b = 0; b < n; ++b) {
      const double mub = mu[static_cast<size_t>(b)];
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += (X.at(i, a) - mua) * (X.at(i, b) - mub);
      cov.at(a, b) = s / (m - 1);
    }
  }
}

void pairwise_sq_dists(const Matrix& A, const Matrix& B, Matrix& D) {
  check(A.cols == B.cols, "pairwise_sq_dists: dimension mismatch");
  D.resize(A.rows, B.rows);
  const int m = A.rows, n = B.rows, kk = A.cols;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (1L * m * n * kk >= kParallelCutoff)
  for (int i = 0; i < m; ++i) {
    const double* a = A.row(i);
    double* d = D.row(i);
    for (int j = 0; j < n; ++j) {
      const double* b = B.row(j);
      double s = 0.0;
      for (int k = 0; k < kk; ++k) {
        double diff = a[k] - b[k];
        s += diff * diff;
      }
      d[j] = s;
    }
  }
}

}  // namespace par

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

#define SCGAN_DISPATCH(fn, ...)                \
  if (g_backend == Backend::openmp) {          \
    par::fn(__VA_ARGS__);                      \
  } else {                                     \
    serial_ref::fn(__VA_ARGS__);               \
  }

void matmul(const Matrix& A, const Matrix& B, Matrix& C) {
  check(&C != &A && &C != &B, "matmul: output aliases an input");
  SCGAN_DISPATCH(matmul, A, B, C)
}
void matmul_bt(const Matrix& A, const Matrix& B, Matrix& C) {
  check(&C != &A && &C != &B, "matmul_bt: output aliases an input");
  SCGAN_DISPATCH(matmul_bt, A, B, C)
}
void matmul_at(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate) {
  check(&C != &A && &C != &B, "matmul_at: output aliases an input");
  SCGAN_DISPATCH(matmul_at, A, B, C, accumulate)
}
void add_bias(Matrix& X, const Matrix& b) { SCGAN_DISPATCH(add_bias, X, b) }
void col_sums(const Matrix& X, Matrix& out, bool accumulate) {
  SCGAN_DISPATCH(col_sums, X, out, accumulate)
}
void leaky_relu(const Matrix& X, double slope, Matrix& Y) { SCGAN_DISPATCH(leaky_relu, X, slope, Y) }
void leaky_relu_grad(const Matrix& preact, const Matrix& dY, double slope, Matrix& dX) {
  SCGAN_DISPATCH(leaky_relu_grad, preact, dY, slope, dX)
}
void softmax_rows(const Matrix& logits, Matrix& probs) { SCGAN_DISPATCH(softmax_rows, logits, probs) }
void scale_rows(const Matrix& X, const Vec& s, Matrix& Y) { SCGAN_DISPATCH(scale_rows, X, s, Y) }
void row_dots(const Matrix& A, const Matrix& B, Vec& out) { SCGAN_DISPATCH(row_dots, A, B, out) }
void mean_rows(const Matrix& X, Vec& mu) { SCGAN_DISPATCH(mean_rows, X, mu) }
void covariance(const Matrix& X, const Vec& mu, Matrix& cov) { SCGAN_DISPATCH(covariance, X, mu, cov) }
void pairwise_sq_dists(const Matrix& A, const Matrix& B, Matrix& D) {
  SCGAN_DISPATCH(pairwise_sq_dists, A, B, D)
}

#undef SCGAN_DISPATCH

}  // namespace scgan::kernels
