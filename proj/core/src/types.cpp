#include "accessmfs/types.hpp"

#include <algorithm>
#include <cmath>

namespace accessmfs {

Dataset Dataset::make(Matrix features, Matrix labels, std::vector<bool> labeled_mask) {
  const Index d = features.rows();
  const Index n = features.cols();
  const Index c = labels.cols();
  if (d < 1) throw ConfigError("dataset needs at least one feature");
  if (n < 2) throw ConfigError("dataset needs at least two instances");
  if (c < 1) throw ConfigError("dataset needs at least one label");
  if (labels.rows() != n)
    throw ConfigError("label matrix has " + std::to_string(labels.rows()) +
                      " rows but there are " + std::to_string(n) + " instances");
  if (static_cast<Index>(labeled_mask.size()) != n)
    throw ConfigError("labeled mask length does not match instance count");
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < c; ++j) {
      const double y = labels(i, j);
      if (y != 0.0 && y != 1.0)
        throw ConfigError("label entry (" + std::to_string(i) + "," + std::to_string(j) +
                          ") = " + std::to_string(y) + " is not in {0,1}");
    }

  Dataset out;
  out.features_ = std::move(features);
  out.labels_ = std::move(labels);
  // Working label matrix: unlabeled rows are zero.
  for (Index i = 0; i < n; ++i)
    if (!labeled_mask[static_cast<std::size_t>(i)]) out.labels_.row(i).setZero();
  out.labeled_mask_ = std::move(labeled_mask);
  return out;
}

Dataset Dataset::make_labeled(Matrix features, Matrix labels) {
  std::vector<bool> mask(static_cast<std::size_t>(features.cols()), true);
  return make(std::move(features), std::move(labels), std::move(mask));
}

Index Dataset::num_labeled() const {
  return static_cast<Index>(std::count(labeled_mask_.begin(), labeled_mask_.end(), true));
}

Dataset Dataset::with_mask(const Matrix& full_labels, std::vector<bool> labeled_mask) const {
  return make(features_, full_labels, std::move(labeled_mask));
}

void Hyperparameters::validate(Index n, Index c) const {
  if (!(lambda > 0.0)) throw ConfigError("lambda must be > 0");
  if (theta < 0.0) throw ConfigError("theta must be >= 0");
  if (mu < 0.0) throw ConfigError("mu must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (k_s < 1 || k_s > n - 2)
    throw ConfigError("k_s = " + std::to_string(k_s) + " outside [1, n-2] with n = " +
                      std::to_string(n));
  if (k_p < 1 || k_p > c - 1)
    throw ConfigError("k_p = " + std::to_string(k_p) + " outside [1, c-1] with c = " +
                      std::to_string(c));
  if (max_outer_iters < 1) throw ConfigError("max_outer_iters must be >= 1");
  if (max_w_iters < 1) throw ConfigError("max_w_iters must be >= 1");
  if (!(tol_rel_obj > 0.0)) throw ConfigError("tol_rel_obj must be > 0");
}

Matrix centering_matrix(Index n) {
  Matrix h = Matrix::Identity(n, n);
  h.array() -= 1.0 / static_cast<double>(n);
  return h;
}

Matrix apply_centering(const Matrix& m) {
  return m.rowwise() - m.colwise().mean();
}

Matrix laplacian(const Matrix& weights) {
  Matrix sym = 0.5 * (weights + weights.transpose());
  Matrix lap = -sym;
  lap.diagonal() += sym.rowwise().sum();
  return lap;
}

double l21_norm(const Matrix& m) {
  return m.rowwise().norm().sum();
}

Vector label_indicator(const std::vector<bool>& mask) {
  Vector u(static_cast<Index>(mask.size()));
  for (std::size_t i = 0; i < mask.size(); ++i) u[static_cast<Index>(i)] = mask[i] ? 1.0 : 0.0;
  return u;
}

GraphPair make_graph_pair(const Matrix& instance_graph, const Matrix& label_graph) {
  return GraphPair{laplacian(instance_graph), laplacian(label_graph)};
}

}  // namespace accessmfs
