#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they are used to check.

#include "accessmfs/types.hpp"

#include <random>

namespace accessmfs::oracle {

/// Euclidean projection onto the probability simplex (sort-based).
Vector project_to_simplex(const Vector& v);

/// Projected-gradient minimizer of  sum_j costs_j s_j + alpha ||s||^2  over
/// the simplex. Positions with non-finite cost are excluded (weight 0).
Vector simplex_qp(const Vector& costs, double alpha, int max_iters = 10000, double tol = 1e-14);

/// Dense Kronecker-system solve of Q F + mu F Lp = C.
Matrix kron_sylvester(const Matrix& q, const Matrix& lp, const Matrix& rhs, double mu);

/// Brute-force metric definitions (scalar loops, average-rank ties).
double ap_brute(const Matrix& scores, const Matrix& truth);
double rl_brute(const Matrix& scores, const Matrix& truth);
double oe_brute(const Matrix& scores, const Matrix& truth);
double maf_brute(const Matrix& predictions, const Matrix& truth);

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
  return m;
}

/// Random row-stochastic matrix with zero diagonal.
inline Matrix random_row_stochastic(std::mt19937_64& rng, Index n) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Index j = 0; j < n; ++j) {
      a(i, j) = i == j ? 0.0 : uni(rng);
      sum += a(i, j);
    }
    if (sum > 0.0) a.row(i) /= sum;
  }
  return a;
}

/// Random symmetric positive-definite matrix.
inline Matrix random_spd(std::mt19937_64& rng, Index n, double ridge = 0.5) {
  Matrix a = random_matrix(rng, n, n);
  Matrix s = a * a.transpose() / static_cast<double>(n);
  s.diagonal().array() += ridge;
  return s;
}

}  // namespace accessmfs::oracle
