#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace accessmfs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy shared by all modules: configuration problems (bad shapes,
// bad hyperparameters), file/parse problems, and numerical breakdowns.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Default tolerances. Validation helpers take these as defaulted arguments so
// tests can tighten or relax them.
inline constexpr double kConstraintTol = 1e-6;   // ||W^T R W - I||_F after a projection update
inline constexpr double kSimplexTol = 1e-10;     // row sums of similarity graphs
inline constexpr double kIdentityTol = 1e-8;     // algebraic identity checks
inline constexpr double kSymmetryTol = 1e-12;    // Laplacian symmetry

/// Semi-supervised multi-label dataset.
///
/// Features are stored one instance per column (d x n); labels one instance
/// per row (n x c) with entries in {0,1}. Rows of `labels` whose mask entry is
/// false are forced to zero at construction: the solver never sees ground
/// truth for unlabeled instances.
class Dataset {
public:
  static Dataset make(Matrix features, Matrix labels, std::vector<bool> labeled_mask);

  // Fully labeled convenience factory (mask all true).
  static Dataset make_labeled(Matrix features, Matrix labels);

  const Matrix& features() const { return features_; }
  const Matrix& labels() const { return labels_; }
  const std::vector<bool>& labeled_mask() const { return labeled_mask_; }

  Index num_features() const { return features_.rows(); }
  Index num_instances() const { return features_.cols(); }
  Index num_labels() const { return labels_.cols(); }
  Index num_labeled() const;

  /// Copy with a different mask; rows of the working label matrix that become
  /// unlabeled are zeroed from the given full label matrix.
  Dataset with_mask(const Matrix& full_labels, std::vector<bool> labeled_mask) const;

private:
  Dataset() = default;
  Matrix features_;  // d x n
  Matrix labels_;    // n x c, zero rows for unlabeled instances
  std::vector<bool> labeled_mask_;
};

struct Hyperparameters {
  double lambda = 0.1;     // l2,1 regularization, must be > 0
  double theta = 1.0;      // instance-graph weight, >= 0
  double mu = 1.0;         // label-graph weight, >= 0
  int k_s = 5;             // instance-graph neighbors, 1 <= k_s <= n-2
  int k_p = 3;             // label-graph neighbors, 1 <= k_p <= c-1
  double epsilon = 1e-8;   // floor inside the row-norm reweighting
  int max_outer_iters = 50;
  int max_w_iters = 20;
  double tol_rel_obj = 1e-5;
  std::uint64_t seed = 1;

  /// Throws ConfigError if any value is out of range for a dataset with n
  /// instances and c labels.
  void validate(Index n, Index c) const;
};

/// All iterates of the alternating solver.
struct ModelState {
  Matrix projection;      // W, d x c; row norms score features
  Vector bias;            // b, length c
  Matrix predicted;       // F, n x c predicted label scores
  Matrix instance_graph;  // S, n x n row-stochastic, k_s-sparse, zero diagonal
  Matrix label_graph;     // P, c x c row-stochastic, k_p-sparse, zero diagonal
  Vector l21_weights;     // diagonal of D, d entries, 1/(2 sqrt(||w_i.||^2 + eps))
  double objective = 0.0;
};

/// Symmetrized Laplacians of the two similarity graphs.
///
/// The learned graphs are row-stochastic and not symmetric; the Laplacian here
/// is built from the symmetrized weights (A + A^T)/2, which equals the
/// symmetric part of the row-sum Laplacian and leaves every trace term
/// Tr(F^T L F) unchanged.
struct GraphPair {
  Matrix laplacian_s;  // n x n, symmetric PSD, zero row sums
  Matrix laplacian_p;  // c x c, symmetric PSD, zero row sums
};

/// H = I - (1/n) 1 1^T. Symmetric, idempotent, annihilates the ones vector.
Matrix centering_matrix(Index n);

/// Applies the centering matrix from the left without forming it: subtracts
/// the column mean from every column of M (M is n x k, instances as rows).
Matrix apply_centering(const Matrix& m);

/// Symmetrized graph Laplacian D~ - A~ with A~ = (A + A^T)/2 and D~ the
/// diagonal of A~'s row sums. Input must be nonnegative with zero diagonal.
Matrix laplacian(const Matrix& weights);

/// Sum of row-wise Euclidean norms.
double l21_norm(const Matrix& m);

/// Diagonal 0/1 indicator of labeled instances (U). Returned as a vector of
/// diagonal entries.
Vector label_indicator(const std::vector<bool>& mask);

GraphPair make_graph_pair(const Matrix& instance_graph, const Matrix& label_graph);

}  // namespace accessmfs
