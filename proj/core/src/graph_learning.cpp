#include "accessmfs/graph_learning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace accessmfs {

namespace {

// Pairwise squared distances of the columns of Z via the Gram trick, halved.
// Output is clamped nonnegative, symmetrized and has an exact zero diagonal.
Matrix half_sq_dist_cols(const Matrix& z) {
  Vector sq = z.colwise().squaredNorm();
  Matrix m = -(z.transpose() * z);
  m.rowwise() += 0.5 * sq.transpose();
  m.colwise() += 0.5 * sq;
  m = 0.5 * (m + m.transpose()).eval();
  m = m.cwiseMax(0.0);
  m.diagonal().setZero();
  return m;
}

GraphUpdate update_graph(const Matrix& costs, int k) {
  const Index m = costs.rows();
  GraphUpdate out;
  out.weights = Matrix::Zero(m, m);
  out.row_regularizers = Vector::Zero(m);
  Vector row(m);
  for (Index i = 0; i < m; ++i) {
    row = costs.row(i).transpose();
    row[i] = std::numeric_limits<double>::infinity();
    SimplexRow sol = sparse_simplex_row(row, k);
    out.weights.row(i) = sol.weights.transpose();
    out.row_regularizers[i] = sol.regularizer;
    if (sol.degenerate) ++out.degenerate_rows;
  }
  return out;
}

}  // namespace

PairwiseCost instance_cost(const Matrix& features, const Matrix& projection,
                           const Matrix& predicted) {
  if (features.rows() != projection.rows())
    throw ConfigError("instance_cost: feature dimension mismatch between X and W");
  if (features.cols() != predicted.rows())
    throw ConfigError("instance_cost: instance count mismatch between X and F");
  if (projection.cols() != predicted.cols())
    throw ConfigError("instance_cost: label dimension mismatch between W and F");
  Matrix z = projection.transpose() * features;  // projected instances, c x n
  Matrix m = half_sq_dist_cols(z) + half_sq_dist_cols(predicted.transpose());
  return PairwiseCost{std::move(m), PairwiseCost::Kind::instance};
}

PairwiseCost label_cost(const Matrix& predicted) {
  return PairwiseCost{half_sq_dist_cols(predicted), PairwiseCost::Kind::label};
}

SimplexRow sparse_simplex_row(const Vector& costs, int k) {
  if (k < 1) throw ConfigError("sparse_simplex_row: k must be >= 1");
  const Index m = costs.size();
  std::vector<Index> cand;
  cand.reserve(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j)
    if (std::isfinite(costs[j])) cand.push_back(j);

  SimplexRow out;
  out.weights = Vector::Zero(m);
  if (cand.empty()) throw ConfigError("sparse_simplex_row: no finite costs");
  if (cand.size() == 1) {
    // Forced by the simplex constraint.
    out.weights[cand[0]] = 1.0;
    return out;
  }

  const int keff = std::min<int>(k, static_cast<int>(cand.size()) - 1);
  auto by_cost_then_index = [&](Index a, Index b) {
    return costs[a] < costs[b] || (costs[a] == costs[b] && a < b);
  };
  std::partial_sort(cand.begin(), cand.begin() + keff + 1, cand.end(), by_cost_then_index);

  const double edge = costs[cand[static_cast<std::size_t>(keff)]];  // (k+1)-th smallest
  double sum_k = 0.0;
  for (int h = 0; h < keff; ++h) sum_k += costs[cand[static_cast<std::size_t>(h)]];
  const double denom = static_cast<double>(keff) * edge - sum_k;

  if (!(denom > 1e-13 * static_cast<double>(keff) * edge)) {
    // The k+1 cheapest costs coincide; the closed form is undefined.
    for (int h = 0; h < keff; ++h)
      out.weights[cand[static_cast<std::size_t>(h)]] = 1.0 / static_cast<double>(keff);
    out.degenerate = true;
    return out;
  }
  for (int h = 0; h < keff; ++h) {
    const Index j = cand[static_cast<std::size_t>(h)];
    out.weights[j] = (edge - costs[j]) / denom;
  }
  out.regularizer = 0.5 * denom;
  return out;
}

GraphUpdate update_instance_graph(const PairwiseCost& cost, int k_s) {
  if (cost.kind != PairwiseCost::Kind::instance)
    throw ConfigError("update_instance_graph: cost matrix is not an instance cost");
  if (k_s > cost.values.rows() - 2)
    throw ConfigError("update_instance_graph: k_s must be <= n-2");
  return update_graph(cost.values, k_s);
}

GraphUpdate update_label_graph(const PairwiseCost& cost, int k_p) {
  if (cost.kind != PairwiseCost::Kind::label)
    throw ConfigError("update_label_graph: cost matrix is not a label cost");
  if (k_p > cost.values.rows() - 1)
    throw ConfigError("update_label_graph: k_p must be <= c-1");
  return update_graph(cost.values, k_p);
}

}  // namespace accessmfs
