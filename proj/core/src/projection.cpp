#include "accessmfs/projection.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace accessmfs {

ConstraintMatrix build_constraint_from_base(const Matrix& data_part, const Vector& l21_weights,
                                            double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("build_constraint: lambda must be > 0");
  if (l21_weights.minCoeff() <= 0.0)
    throw ConfigError("build_constraint: reweighting diagonal must be positive");
  ConstraintMatrix out;
  out.r = data_part;
  out.r.diagonal() += lambda * l21_weights;
  out.r = 0.5 * (out.r + out.r.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(out.r);
  if (eig.info() != Eigen::Success)
    throw NumericalError("build_constraint: eigendecomposition of R failed");
  const Vector& ev = eig.eigenvalues();
  const double max_ev = ev.maxCoeff();
  if (ev.minCoeff() <= 1e-12 * max_ev)
    throw NumericalError(
        "build_constraint: R is numerically singular; increase lambda to regularize it");
  Vector inv_sqrt_ev = ev.array().sqrt().inverse();
  out.inv_sqrt = eig.eigenvectors() * inv_sqrt_ev.asDiagonal() * eig.eigenvectors().transpose();
  return out;
}

ConstraintMatrix build_constraint(const Matrix& features, const Vector& l21_weights,
                                  const Matrix& laplacian_s, double lambda, double theta) {
  Matrix xc = features.colwise() - features.rowwise().mean();
  Matrix base = xc * xc.transpose();
  if (theta != 0.0) base += theta * features * laplacian_s * features.transpose();
  return build_constraint_from_base(base, l21_weights, lambda);
}

Vector update_l21_weights(const Matrix& projection, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("update_l21_weights: epsilon must be > 0");
  return 0.5 * (projection.rowwise().squaredNorm().array() + epsilon).sqrt().inverse();
}

ProcrustesResult procrustes(const Matrix& b) {
  const Index d = b.rows();
  const Index c = b.cols();
  if (d < c) throw ConfigError("procrustes: need at least as many rows as columns");

  Eigen::JacobiSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma[0] : 0.0;

  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] > 1e-10 * sigma_max && sigma[i] > 0.0) ++rank;

  Matrix u = svd.matrixU();
  if (rank < c) {
    // Deterministic completion: for each deficient direction pick the
    // canonical basis vector with the largest residual against the columns
    // kept so far, Gram-Schmidt it in, and append.
    for (Index j = rank; j < c; ++j) {
      Index best = -1;
      double best_sq = -1.0;
      Vector best_res;
      for (Index t = 0; t < d; ++t) {
        Vector res = Vector::Zero(d);
        res[t] = 1.0;
        res -= u.leftCols(j) * (u.leftCols(j).transpose() * res);
        const double sq = res.squaredNorm();
        if (sq > best_sq + 1e-12) {
          best_sq = sq;
          best = t;
          best_res = res;
        }
      }
      if (best < 0 || best_sq <= 0.0)
        throw NumericalError("procrustes: cannot complete orthonormal basis");
      u.col(j) = best_res / std::sqrt(best_sq);
    }
  }
  ProcrustesResult out;
  out.matrix = u * svd.matrixV().transpose();
  out.rank = rank;
  return out;
}

ProjectionProblem make_projection_problem(const Matrix& features, const Matrix& predicted,
                                          const Matrix& laplacian_s, double theta) {
  ProjectionProblem p;
  p.centered_features = features.colwise() - features.rowwise().mean();
  p.centered_predicted = apply_centering(predicted);
  p.xhx = p.centered_features * p.centered_features.transpose();
  if (theta != 0.0)
    p.xlx = features * laplacian_s * features.transpose();
  else
    p.xlx = Matrix::Zero(features.rows(), features.rows());
  return p;
}

double projection_block_value(const ProjectionProblem& problem, const Matrix& w, double lambda,
                              double theta) {
  double loss = (problem.centered_features.transpose() * w - problem.centered_predicted)
                    .squaredNorm();
  double reg = lambda * l21_norm(w);
  double graph = theta == 0.0 ? 0.0 : theta * (w.cwiseProduct(problem.xlx * w)).sum();
  return loss + reg + graph;
}

ProjectionUpdate update_projection(const ProjectionProblem& problem, double lambda, double theta,
                                   int max_w_iters, double epsilon, double tol_rel_obj,
                                   const ProjectionWarmStart& warm) {
  const Index d = problem.centered_features.rows();
  const Index c = problem.centered_predicted.cols();
  Matrix base = problem.xhx;
  if (theta != 0.0) base += theta * problem.xlx;
  Matrix xhf = problem.centered_features * problem.centered_predicted;  // X H F

  ProjectionUpdate out;
  out.kept_incoming = warm.projection != nullptr;
  double best_value = std::numeric_limits<double>::infinity();
  if (warm.projection) {
    best_value = projection_block_value(problem, *warm.projection, lambda, theta);
    out.projection = *warm.projection;
    out.constraint_residual = warm.constraint_residual;
  }

  Vector weights = Vector::Constant(d, 1.0);  // D = I
  Matrix proposal(d, c);
  double prev_proposal_value = std::numeric_limits<double>::infinity();
  for (int t = 0; t < max_w_iters; ++t) {
    ConstraintMatrix cm = build_constraint_from_base(base, weights, lambda);
    Matrix b = cm.inv_sqrt * xhf;
    ProcrustesResult pr = procrustes(b);
    if (pr.rank < c) ++out.rank_deficient_steps;
    proposal = cm.inv_sqrt * pr.matrix;

    const double value = projection_block_value(problem, proposal, lambda, theta);
    if (value <= best_value) {
      best_value = value;
      out.projection = proposal;
      out.constraint_residual = (proposal.transpose() * cm.r * proposal -
                                 Matrix::Identity(c, c)).norm();
      out.kept_incoming = false;
    }
    out.inner_objective.push_back(best_value);
    ++out.iterations;

    weights = update_l21_weights(proposal, epsilon);
    if (std::abs(prev_proposal_value - value) <=
        tol_rel_obj * std::max(1.0, std::abs(prev_proposal_value)))
      break;
    prev_proposal_value = value;
  }
  out.block_value = best_value;
  out.l21_weights = update_l21_weights(out.projection, epsilon);
  return out;
}

ProjectionUpdate update_projection(const Matrix& features, const Matrix& predicted,
                                   const Matrix& laplacian_s, double lambda, double theta,
                                   int max_w_iters, double epsilon, double tol_rel_obj) {
  ProjectionProblem p = make_projection_problem(features, predicted, laplacian_s, theta);
  return update_projection(p, lambda, theta, max_w_iters, epsilon, tol_rel_obj);
}

}  // namespace accessmfs
