#pragma once

#include "accessmfs/types.hpp"

namespace accessmfs {

/// The linear system defining the optimal predicted labels:
///   Q F + mu F L_p = C,  Q = theta L_s + H + U,  C = H X^T W + U Y.
/// Q is symmetric PSD and strictly PD as soon as one instance is labeled.
struct SylvesterSystem {
  Matrix q;    // n x n
  Matrix lp;   // c x c, symmetric PSD
  Matrix rhs;  // n x c
  double mu = 0.0;
};

SylvesterSystem assemble_system(const Matrix& features, const Matrix& projection,
                                const Matrix& labels, const Matrix& laplacian_s,
                                const Matrix& laplacian_p, const Vector& labeled_indicator,
                                double theta, double mu);

/// Solves the system exactly: eigendecompose L_p = V diag(lam) V^T, transform
/// the right-hand side, solve the shifted systems (Q + mu*lam_j I) column by
/// column with a symmetric factorization (reused across equal shifts), and
/// transform back. Throws NumericalError when the system is singular, which
/// happens exactly when no instance is labeled.
Matrix solve_predicted(const SylvesterSystem& sys);

/// Residual ||Q F + mu F L_p - C||_F of a candidate solution.
double sylvester_residual(const SylvesterSystem& sys, const Matrix& f);

}  // namespace accessmfs
