#pragma once

#include "accessmfs/types.hpp"

namespace accessmfs {

/// Pairwise squared-distance costs driving a similarity-graph update.
/// `instance` costs are n x n over projected instances and predicted-label
/// rows; `label` costs are c x c over predicted-label columns.
struct PairwiseCost {
  enum class Kind { instance, label };
  Matrix values;  // symmetric, nonnegative, zero diagonal
  Kind kind = Kind::instance;
};

/// Per-row regularization strengths recovered by the closed-form graph
/// updates. alpha_rows has one entry per instance, beta_rows one per label;
/// both are needed to evaluate the full objective.
struct RowRegularizer {
  Vector alpha_rows;
  Vector beta_rows;
};

/// One row of a graph update: weights on the simplex, the regularizer that
/// produced them, and whether the degenerate uniform fallback fired.
struct SimplexRow {
  Vector weights;
  double regularizer = 0.0;
  bool degenerate = false;
};

/// Result of updating a whole similarity graph row by row.
struct GraphUpdate {
  Matrix weights;            // row-stochastic, zero diagonal, <= k nonzeros per row
  Vector row_regularizers;   // one regularizer per row
  int degenerate_rows = 0;   // rows that fell back to uniform weights
};

/// m_ij = 1/2 ||W^T x_i - W^T x_j||^2 + 1/2 ||f_i. - f_j.||^2.
PairwiseCost instance_cost(const Matrix& features, const Matrix& projection,
                           const Matrix& predicted);

/// g_ij = 1/2 ||f_.i - f_.j||^2 over predicted-label columns.
PairwiseCost label_cost(const Matrix& predicted);

/// Closed-form minimizer of  sum_j costs_j * s_j + reg * ||s||^2  over the
/// probability simplex, with the regularizer chosen so that exactly the k
/// cheapest positions carry weight.
///
/// Positions holding +inf (or NaN) are excluded from the candidate set and
/// always receive weight zero; update_S/update_P mark the self entry this
/// way. Given the k+1 smallest finite costs m_(1) <= ... <= m_(k+1), the
/// weight on the h-th cheapest position is (m_(k+1) - m_(h)) / denom with
/// denom = k*m_(k+1) - sum_{h<=k} m_(h); this is the unique affine-in-cost
/// form whose k weights sum to one. The returned regularizer is denom/2.
///
/// If the k+1 smallest costs are all equal the denominator vanishes; the row
/// falls back to uniform 1/k weights over the k cheapest (regularizer 0) and
/// is flagged degenerate. Ties are broken toward lower indices. k larger than
/// candidates-1 is clamped; a single-candidate row gets its full weight.
SimplexRow sparse_simplex_row(const Vector& costs, int k);

/// Row-wise rebuild of the instance similarity graph S (n x n).
GraphUpdate update_instance_graph(const PairwiseCost& cost, int k_s);

/// Row-wise rebuild of the label similarity graph P (c x c).
GraphUpdate update_label_graph(const PairwiseCost& cost, int k_p);

}  // namespace accessmfs
