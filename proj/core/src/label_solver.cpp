#include "accessmfs/label_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace accessmfs {

SylvesterSystem assemble_system(const Matrix& features, const Matrix& projection,
                                const Matrix& labels, const Matrix& laplacian_s,
                                const Matrix& laplacian_p, const Vector& labeled_indicator,
                                double theta, double mu) {
  const Index n = features.cols();
  if (labels.rows() != n || labeled_indicator.size() != n)
    throw ConfigError("assemble_system: instance count mismatch");
  if (laplacian_s.rows() != n)
    throw ConfigError("assemble_system: instance Laplacian has wrong size");
  if (laplacian_p.rows() != labels.cols())
    throw ConfigError("assemble_system: label Laplacian has wrong size");

  SylvesterSystem sys;
  sys.q = centering_matrix(n);
  if (theta != 0.0) sys.q += theta * laplacian_s;
  sys.q.diagonal() += labeled_indicator;
  sys.q = 0.5 * (sys.q + sys.q.transpose()).eval();

  Matrix xtw = features.transpose() * projection;       // n x c
  sys.rhs = apply_centering(xtw);                       // H X^T W
  sys.rhs += labeled_indicator.asDiagonal() * labels;   // + U Y
  sys.lp = laplacian_p;
  sys.mu = mu;
  return sys;
}

Matrix solve_predicted(const SylvesterSystem& sys) {
  const Index n = sys.q.rows();
  const Index c = sys.rhs.cols();

  // Q 1 equals the labeled indicator (H and the Laplacian both annihilate the
  // ones vector), and L_p 1 = 0 always, so the shifted operator is singular
  // exactly when nothing is labeled. The solve may still look consistent in
  // that case, so detect it up front.
  if ((sys.q * Vector::Ones(n)).norm() <= 1e-12 * static_cast<double>(n))
    throw NumericalError(
        "solve_predicted: singular system; at least one instance must be labeled");

  // mu == 0 decouples the columns entirely.
  if (sys.mu == 0.0) {
    Eigen::LDLT<Matrix> fact(sys.q);
    Matrix f = fact.solve(sys.rhs);
    const double res = sylvester_residual(sys, f);
    if (!std::isfinite(res) || res > 1e-8 * (sys.rhs.norm() + 1.0))
      throw NumericalError(
          "solve_predicted: singular system; at least one instance must be labeled");
    return f;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sys.lp);
  if (eig.info() != Eigen::Success)
    throw NumericalError("solve_predicted: eigendecomposition of L_p failed");
  const Vector& lam = eig.eigenvalues();
  const Matrix& v = eig.eigenvectors();

  Matrix rhs_t = sys.rhs * v;  // rotate into the eigenbasis of L_p
  Matrix f_t(n, c);
  Eigen::LDLT<Matrix> fact;
  double current_shift = std::numeric_limits<double>::quiet_NaN();
  for (Index j = 0; j < c; ++j) {
    const double shift = sys.mu * lam[j];
    if (j == 0 || shift != current_shift) {
      Matrix shifted = sys.q;
      shifted.diagonal().array() += shift;
      fact.compute(shifted);
      current_shift = shift;
    }
    f_t.col(j) = fact.solve(rhs_t.col(j));
  }
  Matrix f = f_t * v.transpose();

  const double res = sylvester_residual(sys, f);
  if (!std::isfinite(res) || res > 1e-8 * (sys.rhs.norm() + 1.0))
    throw NumericalError(
        "solve_predicted: singular system; at least one instance must be labeled");
  return f;
}

double sylvester_residual(const SylvesterSystem& sys, const Matrix& f) {
  return (sys.q * f + sys.mu * f * sys.lp - sys.rhs).norm();
}

}  // namespace accessmfs
