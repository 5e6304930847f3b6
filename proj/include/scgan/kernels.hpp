#pragma once

#include "scgan/matrix.hpp"

namespace scgan::kernels {

enum class Backend { serial, openmp };

Backend backend();
void set_backend(Backend b);
bool openmp_available();

// Number of threads the openmp variants will use. SC_GAN_THREADS caps it.
int thread_count();

// Batched kernels. Every kernel exists twice: kernels::serial_ref holds the
// plain reference loops, kernels::par the OpenMP versions. The two produce
// bit-identical output for every input: each output element is reduced in the
// same fixed index order, and the parallel variants only split work across
// output rows. The dispatch functions below pick the active backend.
//
// Shapes: outputs are resized by the kernel; inputs must conform or a
// ContractError is thrown.

// C = A (m x k) * B (k x n)
void matmul(const Matrix& A, const Matrix& B, Matrix& C);
// C = A (m x k) * B(n x k)^T
void matmul_bt(const Matrix& A, const Matrix& B, Matrix& C);
// C (+)= A(m x k)^T * B (m x n), C is k x n
void matmul_at(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate);
// X[i,:] += b[0,:]
void add_bias(Matrix& X, const Matrix& b);
// out (+)= column sums of X, out is 1 x cols
void col_sums(const Matrix& X, Matrix& out, bool accumulate);
// Y = max(X, slope * X) elementwise; slope 0 is the plain rectifier
void leaky_relu(const Matrix& X, double slope, Matrix& Y);
// dX = dY * (preact > 0 ? 1 : slope)
void leaky_relu_grad(const Matrix& preact, const Matrix& dY, double slope, Matrix& dX);
// Row softmax with max subtraction. Entries are floored at 1e-300 so
// downstream entropies never see an exact zero.
void softmax_rows(const Matrix& logits, Matrix& probs);
// Y[i,:] = s[i] * X[i,:]
void scale_rows(const Matrix& X, const Vec& s, Matrix& Y);
// out[i] = A[i,:] . B[i,:]
void row_dots(const Matrix& A, const Matrix& B, Vec& out);
// mu[j] = mean of column j
void mean_rows(const Matrix& X, Vec& mu);
// Unbiased sample covariance about mu (divides by n-1).
void covariance(const Matrix& X, const Vec& mu, Matrix& cov);
// D[i,j] = squared euclidean distance between A row i and B row j
void pairwise_sq_dists(const Matrix& A, const Matrix& B, Matrix& D);

namespace serial_ref {
void matmul(const Matrix& A, const Matrix& B, Matrix& C);
void matmul_bt(const Matrix& A, const Matrix& B, Matrix& C);
void matmul_at(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate);
void add_bias(Matrix& X, const Matrix& b);
void col_sums(const Matrix& X, Matrix& out, bool accumulate);
void leaky_relu(const Matrix& X, double slope, Matrix& Y);
void leaky_relu_grad(const Matrix& preact, const Matrix& dY, double slope, Matrix& dX);
void softmax_rows(const Matrix& logits, Matrix& probs);
void scale_rows(const Matrix& X, const Vec& s, Matrix& Y);
void row_dots(const Matrix& A, const Matrix& B, Vec& out);
void mean_rows(const Matrix& X, Vec& mu);
void covariance(const Matrix& X, const Vec& mu, Matrix& cov);
void pairwise_sq_dists(const Matrix& A, const Matrix& B, Matrix& D);
}  // namespace serial_ref

namespace par {
void matmul(const Matrix& A, const Matrix& B, Matrix& C);
void matmul_bt(const Matrix& A, const Matrix& B, Matrix& C);
void matmul_at(const Matrix& A, const Matrix& B, Matrix& C, bool accumulate);
void add_bias(Matrix& X, const Matrix& b);
void col_sums(const Matrix& X, Matrix& out, bool accumulate);
void leaky_relu(const Matrix& X, double slope, Matrix& Y);
void leaky_relu_grad(const Matrix& preact, const Matrix& dY, double slope, Matrix& dX);
void softmax_rows(const Matrix& logits, Matrix& probs);
void scale_rows(const Matrix& X, const Vec& s, Matrix& Y);
void row_dots(const Matrix& A, const Matrix& B, Vec& out);
void mean_rows(const Matrix& X, Vec& mu);
void covariance(const Matrix& X, const Vec& mu, Matrix& cov);
void pairwise_sq_dists(const Matrix& A, const Matrix& B, Matrix& D);
}  // namespace par

}  // namespace scgan::kernels
