#pragma once

#include "accessmfs/graph_learning.hpp"
#include "accessmfs/types.hpp"

#include <string>
#include <vector>

namespace accessmfs {

/// Which graph-learning blocks participate. The ablation variants drop the
/// corresponding objective terms entirely, so the dropped graph is frozen at
/// its initial value and its weight (theta or mu) is treated as zero
/// everywhere, including inside the constraint matrix R.
enum class SolverVariant { full, instance_graph_only, label_graph_only, no_graphs };

std::string to_string(SolverVariant v);
SolverVariant variant_from_string(const std::string& name);
bool uses_instance_graph(SolverVariant v);
bool uses_label_graph(SolverVariant v);

struct ConvergenceTrace {
  double initial_objective = 0.0;               // value at the (infeasible) initialization
  std::vector<double> objective_values;         // one value per outer iteration
  std::vector<double> constraint_residuals;     // max ||W^T R W - I||_F per outer iteration
  std::vector<int> w_inner_iterations;          // inner reweighting steps per outer iteration
  int iterations_run = 0;
  bool converged = false;
  int s_updates = 0;
  int p_updates = 0;
  int degenerate_s_rows = 0;  // cumulative over all updates
  int degenerate_p_rows = 0;
  int rank_deficient_steps = 0;
};

struct FeatureRanking {
  Vector scores;              // l2 norm of each projection row
  std::vector<Index> order;   // descending score, ties toward lower index
};

struct FitResult {
  ModelState state;
  ConvergenceTrace trace;
  FeatureRanking ranking;
  RowRegularizer regularizers;  // alpha/beta rows from the last graph updates
};

/// b = (1/n)(F^T 1 - W^T X 1); eliminated analytically in the solver and
/// materialized for reporting.
Vector compute_bias(const Matrix& predicted, const Matrix& projection, const Matrix& features);

/// The full objective: residual + lambda * l2,1 + labeled fit + graph terms,
/// with the adaptive regularizers entering as sum_i alpha_i ||s_i.||^2 and
/// sum_i beta_i ||p_i.||^2 inside the theta / mu groups.
double objective_value(const ModelState& state, const Dataset& data, const Hyperparameters& hp,
                       const RowRegularizer& regs);

/// F = Y, W seeded Gaussian with orthonormalized columns, S and P from the
/// closed-form graph updates, reweighting diagonal consistent with W.
/// If regs_out is non-null it receives the initial alpha/beta rows.
ModelState initialize(const Dataset& data, const Hyperparameters& hp,
                      RowRegularizer* regs_out = nullptr);

/// Runs the alternating loop until the relative objective change drops below
/// hp.tol_rel_obj or hp.max_outer_iters is reached.
FitResult fit(const Dataset& data, const Hyperparameters& hp,
              SolverVariant variant = SolverVariant::full);

FeatureRanking rank_features(const Matrix& projection);

/// First k entries of the ranking order. Throws ConfigError when k is outside
/// [1, d].
std::vector<Index> select_features(const FeatureRanking& ranking, int k);

}  // namespace accessmfs
