#include "oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace accessmfs::oracle {

Vector project_to_simplex(const Vector& v) {
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double tau = 0.0;
  int rho = 0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[static_cast<std::size_t>(j)];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[static_cast<std::size_t>(j)] - t > 0.0) {
      rho = static_cast<int>(j + 1);
      tau = t;
    }
  }
  (void)rho;
  return (v.array() - tau).max(0.0);
}

Vector simplex_qp(const Vector& costs, double alpha, int max_iters, double tol) {
  const Index n = costs.size();
  std::vector<Index> cand;
  for (Index j = 0; j < n; ++j)
    if (std::isfinite(costs[j])) cand.push_back(j);
  const Index m = static_cast<Index>(cand.size());

  Vector c(m);
  for (Index j = 0; j < m; ++j) c[j] = costs[cand[static_cast<std::size_t>(j)]];

  Vector s = Vector::Constant(m, 1.0 / static_cast<double>(m));
  const double step = 1.0 / (2.0 * alpha);
  for (int it = 0; it < max_iters; ++it) {
    Vector grad = c + 2.0 * alpha * s;
    Vector next = project_to_simplex(s - step * grad);
    const double delta = (next - s).lpNorm<Eigen::Infinity>();
    s = next;
    if (delta < tol) break;
  }
  Vector out = Vector::Zero(n);
  for (Index j = 0; j < m; ++j) out[cand[static_cast<std::size_t>(j)]] = s[j];
  return out;
}

Matrix kron_sylvester(const Matrix& q, const Matrix& lp, const Matrix& rhs, double mu) {
  const Index n = q.rows();
  const Index c = lp.rows();
  Matrix big = Matrix::Zero(n * c, n * c);
  for (Index j = 0; j < c; ++j) {
    big.block(j * n, j * n, n, n) = q;
    for (Index k = 0; k < c; ++k) big.block(j * n, k * n, n, n).diagonal().array() += mu * lp(k, j);
  }
  Vector vec(n * c);
  for (Index j = 0; j < c; ++j) vec.segment(j * n, n) = rhs.col(j);
  Vector sol = big.fullPivLu().solve(vec);
  Matrix f(n, c);
  for (Index j = 0; j < c; ++j) f.col(j) = sol.segment(j * n, n);
  return f;
}

namespace {

// Average rank (1-based) of label y within one score row: strictly better
// labels push it down, ties share the average position.
double avg_rank(const Eigen::RowVectorXd& s, Index y) {
  int greater = 0, ties = 0;
  for (Index j = 0; j < s.size(); ++j) {
    if (s[j] > s[y]) ++greater;
    if (s[j] == s[y]) ++ties;  // includes y itself
  }
  return static_cast<double>(greater) + (static_cast<double>(ties) + 1.0) / 2.0;
}

}  // namespace

double ap_brute(const Matrix& scores, const Matrix& truth) {
  double total = 0.0;
  int counted = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    std::vector<Index> rel;
    for (Index j = 0; j < scores.cols(); ++j)
      if (truth(i, j) == 1.0) rel.push_back(j);
    if (rel.empty()) continue;
    double sum = 0.0;
    for (Index y : rel) {
      const double ry = avg_rank(scores.row(i), y);
      double rel_le = 0.0;
      for (Index z : rel)
        if (avg_rank(scores.row(i), z) <= ry) rel_le += 1.0;
      sum += rel_le / ry;
    }
    total += sum / static_cast<double>(rel.size());
    ++counted;
  }
  return total / static_cast<double>(counted);
}

double rl_brute(const Matrix& scores, const Matrix& truth) {
  double total = 0.0;
  int counted = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    double mis = 0.0, nrel = 0.0, nirr = 0.0;
    for (Index a = 0; a < scores.cols(); ++a) {
      if (truth(i, a) == 1.0) {
        nrel += 1.0;
        for (Index b = 0; b < scores.cols(); ++b) {
          if (truth(i, b) == 1.0) continue;
          if (scores(i, a) < scores(i, b)) mis += 1.0;
          else if (scores(i, a) == scores(i, b)) mis += 0.5;
        }
      } else {
        nirr += 1.0;
      }
    }
    if (nrel == 0.0 || nirr == 0.0) continue;
    total += mis / (nrel * nirr);
    ++counted;
  }
  return total / static_cast<double>(counted);
}

double oe_brute(const Matrix& scores, const Matrix& truth) {
  double total = 0.0;
  int counted = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    bool any = false;
    for (Index j = 0; j < scores.cols(); ++j)
      if (truth(i, j) == 1.0) any = true;
    if (!any) continue;
    double top = scores(i, 0);
    for (Index j = 1; j < scores.cols(); ++j) top = std::max(top, scores(i, j));
    double tied = 0.0, tied_rel = 0.0;
    for (Index j = 0; j < scores.cols(); ++j)
      if (scores(i, j) == top) {
        tied += 1.0;
        if (truth(i, j) == 1.0) tied_rel += 1.0;
      }
    total += 1.0 - tied_rel / tied;
    ++counted;
  }
  return total / static_cast<double>(counted);
}

double maf_brute(const Matrix& predictions, const Matrix& truth) {
  double sum = 0.0;
  for (Index j = 0; j < predictions.cols(); ++j) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (Index i = 0; i < predictions.rows(); ++i) {
      if (predictions(i, j) == 1.0 && truth(i, j) == 1.0) tp += 1.0;
      if (predictions(i, j) == 1.0 && truth(i, j) == 0.0) fp += 1.0;
      if (predictions(i, j) == 0.0 && truth(i, j) == 1.0) fn += 1.0;
    }
    sum += (2.0 * tp + fp + fn) > 0.0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
  }
  return sum / static_cast<double>(predictions.cols());
}

}  // namespace accessmfs::oracle
