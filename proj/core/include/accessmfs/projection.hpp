#pragma once

#include "accessmfs/types.hpp"

#include <vector>

namespace accessmfs {

/// The constraint matrix R = X H X^T + lambda D + theta X L_s X^T together
/// with its symmetric inverse square root, computed by eigendecomposition.
struct ConstraintMatrix {
  Matrix r;
  Matrix inv_sqrt;  // inv_sqrt * r * inv_sqrt == I
};

struct ProcrustesResult {
  Matrix matrix;  // orthonormal columns, maximizes Tr(A^T B)
  Index rank = 0;
};

/// Result of one full projection update.
struct ProjectionUpdate {
  Matrix projection;                 // accepted W
  Vector l21_weights;                // reweighting diagonal for the accepted W
  double constraint_residual = 0.0;  // ||W^T R W - I||_F for the R that generated W
  double block_value = 0.0;          // subproblem value of the accepted W
  // Subproblem value of the accepted state after each inner step. The
  // reweighted proposals are filtered through monotone acceptance, so this
  // trace never increases.
  std::vector<double> inner_objective;
  int iterations = 0;
  int rank_deficient_steps = 0;
  bool kept_incoming = false;  // no proposal improved on the warm start
};

/// Assembles R from a precomputed data part (X H X^T + theta X L_s X^T) plus
/// lambda * diag(weights), and computes R^(-1/2).
ConstraintMatrix build_constraint_from_base(const Matrix& data_part, const Vector& l21_weights,
                                            double lambda);

/// Spec-shaped convenience: forms the data part from scratch.
ConstraintMatrix build_constraint(const Matrix& features, const Vector& l21_weights,
                                  const Matrix& laplacian_s, double lambda, double theta);

/// D(i,i) = 1 / (2 sqrt(||w_i.||^2 + epsilon)), returned as the diagonal.
Vector update_l21_weights(const Matrix& projection, double epsilon);

/// Maximizes Tr(A^T B) over A^T A = I via the compact SVD of B. Singular
/// directions below 1e-10 * sigma_max are completed with a deterministic
/// orthonormal basis (Gram-Schmidt of canonical vectors against the kept
/// columns, largest-residual first).
ProcrustesResult procrustes(const Matrix& b);

/// Inputs shared across inner iterations of the projection update.
struct ProjectionProblem {
  Matrix centered_features;   // X H, d x n
  Matrix centered_predicted;  // H F, n x c
  Matrix xhx;                 // (X H)(X H)^T, d x d
  Matrix xlx;                 // X L_s X^T, d x d (ignored when theta == 0)
};

ProjectionProblem make_projection_problem(const Matrix& features, const Matrix& predicted,
                                          const Matrix& laplacian_s, double theta);

/// Subproblem value ||H X^T W - H F||^2 + lambda ||W||_{2,1}
///   + theta Tr(W^T X L_s X^T W), the quantity the update minimizes.
double projection_block_value(const ProjectionProblem& problem, const Matrix& w, double lambda,
                              double theta);

/// Warm start for the projection update: the previous W together with the
/// constraint residual recorded when it was produced.
struct ProjectionWarmStart {
  const Matrix* projection = nullptr;
  double constraint_residual = 0.0;
};

/// Generates reweighted proposals (constraint rebuild, inverse square root,
/// trace maximization, reweighting) and keeps the best proposal by subproblem
/// value. The reweighting moves the constraint set between steps, so raw
/// proposals can score worse than their predecessor; monotone acceptance
/// keeps the returned value from ever exceeding the warm start's.
ProjectionUpdate update_projection(const ProjectionProblem& problem, double lambda, double theta,
                                   int max_w_iters, double epsilon, double tol_rel_obj,
                                   const ProjectionWarmStart& warm = {});

/// Spec-shaped convenience building the problem internally.
ProjectionUpdate update_projection(const Matrix& features, const Matrix& predicted,
                                   const Matrix& laplacian_s, double lambda, double theta,
                                   int max_w_iters, double epsilon, double tol_rel_obj);

}  // namespace accessmfs
