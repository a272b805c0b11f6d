#include "accessmfs/solver.hpp"

#include "accessmfs/label_solver.hpp"
#include "accessmfs/projection.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace accessmfs {

std::string to_string(SolverVariant v) {
  switch (v) {
    case SolverVariant::full: return "full";
    case SolverVariant::instance_graph_only: return "instance_graph_only";
    case SolverVariant::label_graph_only: return "label_graph_only";
    case SolverVariant::no_graphs: return "no_graphs";
  }
  return "unknown";
}

SolverVariant variant_from_string(const std::string& name) {
  if (name == "full") return SolverVariant::full;
  if (name == "instance_graph_only" || name == "variant1") return SolverVariant::instance_graph_only;
  if (name == "label_graph_only" || name == "variant2") return SolverVariant::label_graph_only;
  if (name == "no_graphs" || name == "variant3") return SolverVariant::no_graphs;
  throw ConfigError("unknown solver variant '" + name + "'");
}

bool uses_instance_graph(SolverVariant v) {
  return v == SolverVariant::full || v == SolverVariant::instance_graph_only;
}

bool uses_label_graph(SolverVariant v) {
  return v == SolverVariant::full || v == SolverVariant::label_graph_only;
}

Vector compute_bias(const Matrix& predicted, const Matrix& projection, const Matrix& features) {
  const double n = static_cast<double>(features.cols());
  Vector col_sums = predicted.colwise().sum().transpose();
  Vector x_sums = features.rowwise().sum();
  return (col_sums - projection.transpose() * x_sums) / n;
}

double objective_value(const ModelState& state, const Dataset& data, const Hyperparameters& hp,
                       const RowRegularizer& regs) {
  const Matrix& x = data.features();
  const Matrix& w = state.projection;
  const Matrix& f = state.predicted;

  Matrix xc = x.colwise() - x.rowwise().mean();
  double value = (xc.transpose() * w - apply_centering(f)).squaredNorm();
  value += hp.lambda * l21_norm(w);

  const auto& mask = data.labeled_mask();
  for (Index i = 0; i < f.rows(); ++i)
    if (mask[static_cast<std::size_t>(i)])
      value += (f.row(i) - data.labels().row(i)).squaredNorm();

  if (hp.theta != 0.0) {
    Matrix ls = laplacian(state.instance_graph);
    double t = (f.cwiseProduct(ls * f)).sum();
    Matrix z = w.transpose() * x;  // c x n
    t += (z.cwiseProduct(z * ls)).sum();
    t += (regs.alpha_rows.array() * state.instance_graph.rowwise().squaredNorm().array()).sum();
    value += hp.theta * t;
  }
  if (hp.mu != 0.0) {
    Matrix lp = laplacian(state.label_graph);
    double t = ((f * lp).cwiseProduct(f)).sum();
    t += (regs.beta_rows.array() * state.label_graph.rowwise().squaredNorm().array()).sum();
    value += hp.mu * t;
  }
  return value;
}

ModelState initialize(const Dataset& data, const Hyperparameters& hp, RowRegularizer* regs_out) {
  const Index d = data.num_features();
  const Index n = data.num_instances();
  const Index c = data.num_labels();
  hp.validate(n, c);

  ModelState state;
  state.predicted = data.labels();

  std::mt19937_64 rng(hp.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix w(d, c);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < c; ++j) w(i, j) = gauss(rng);
  if (d >= c) {
    Eigen::HouseholderQR<Matrix> qr(w);
    state.projection = qr.householderQ() * Matrix::Identity(d, c);
  } else {
    // Fewer features than labels: orthonormal columns are impossible, fall
    // back to unit-norm columns. fit() rejects this case anyway.
    state.projection = w;
    for (Index j = 0; j < c; ++j) state.projection.col(j).normalize();
  }
  state.l21_weights = update_l21_weights(state.projection, hp.epsilon);

  RowRegularizer regs;
  GraphUpdate s = update_instance_graph(instance_cost(data.features(), state.projection,
                                                      state.predicted), hp.k_s);
  state.instance_graph = std::move(s.weights);
  regs.alpha_rows = std::move(s.row_regularizers);
  GraphUpdate p = update_label_graph(label_cost(state.predicted), hp.k_p);
  state.label_graph = std::move(p.weights);
  regs.beta_rows = std::move(p.row_regularizers);

  state.bias = compute_bias(state.predicted, state.projection, data.features());
  state.objective = objective_value(state, data, hp, regs);
  if (regs_out) *regs_out = std::move(regs);
  return state;
}

namespace {

// Accepts a freshly updated graph row only when it does not increase the
// row's objective contribution  costs_i . s_i + reg_i ||s_i||^2  under the
// current costs; rejected rows keep the previous weights and regularizer.
// The closed form minimizes its contribution for the *new* regularizer, but
// the regularizer itself moves between iterations, so an unguarded swap can
// raise the overall objective.
int accept_graph_rows(const Matrix& costs, const GraphUpdate& update, Matrix& graph,
                      Vector& regs) {
  int accepted = 0;
  for (Index i = 0; i < graph.rows(); ++i) {
    const double fresh = costs.row(i).dot(update.weights.row(i)) +
                         update.row_regularizers[i] * update.weights.row(i).squaredNorm();
    const double kept =
        costs.row(i).dot(graph.row(i)) + regs[i] * graph.row(i).squaredNorm();
    if (fresh <= kept) {
      graph.row(i) = update.weights.row(i);
      regs[i] = update.row_regularizers[i];
      ++accepted;
    }
  }
  return accepted;
}

}  // namespace

FitResult fit(const Dataset& data, const Hyperparameters& hp, SolverVariant variant) {
  const Index n = data.num_instances();
  const Index c = data.num_labels();
  const Index d = data.num_features();
  hp.validate(n, c);
  if (d < c)
    throw ConfigError("fit: the uncorrelated constraint needs at least as many features as labels");
  const Index labeled = data.num_labeled();
  if (labeled < 1) throw ConfigError("fit: at least one labeled instance is required");
  if (labeled >= n) throw ConfigError("fit: at least one unlabeled instance is required");

  // Dropped graph terms vanish everywhere, including inside R.
  Hyperparameters eff = hp;
  if (!uses_instance_graph(variant)) eff.theta = 0.0;
  if (!uses_label_graph(variant)) eff.mu = 0.0;

  FitResult out;
  out.state = initialize(data, eff, &out.regularizers);
  out.trace.initial_objective = out.state.objective;

  const Matrix& x = data.features();
  Vector u = label_indicator(data.labeled_mask());
  Matrix ls = laplacian(out.state.instance_graph);
  Matrix lp = laplacian(out.state.label_graph);

  ProjectionProblem problem;
  problem.centered_features = x.colwise() - x.rowwise().mean();
  problem.xhx = problem.centered_features * problem.centered_features.transpose();
  problem.xlx = Matrix::Zero(d, d);
  bool xlx_stale = true;
  double w_residual = 0.0;

  double prev = out.state.objective;
  for (int it = 0; it < eff.max_outer_iters; ++it) {
    if (eff.theta != 0.0 && xlx_stale) {
      problem.xlx = x * ls * x.transpose();
      xlx_stale = false;
    }
    problem.centered_predicted = apply_centering(out.state.predicted);

    // The initialization W is not feasible for any constraint matrix, so the
    // first iteration must take a proposal; afterwards the previous W seeds
    // the monotone acceptance.
    ProjectionWarmStart warm;
    if (it > 0) {
      warm.projection = &out.state.projection;
      warm.constraint_residual = w_residual;
    }
    ProjectionUpdate wres = update_projection(problem, eff.lambda, eff.theta, eff.max_w_iters,
                                              eff.epsilon, eff.tol_rel_obj, warm);
    out.state.projection = std::move(wres.projection);
    out.state.l21_weights = std::move(wres.l21_weights);
    w_residual = wres.constraint_residual;
    out.trace.constraint_residuals.push_back(wres.constraint_residual);
    out.trace.w_inner_iterations.push_back(wres.iterations);
    out.trace.rank_deficient_steps += wres.rank_deficient_steps;

    SylvesterSystem sys = assemble_system(x, out.state.projection, data.labels(), ls, lp, u,
                                          eff.theta, eff.mu);
    out.state.predicted = solve_predicted(sys);

    if (uses_instance_graph(variant)) {
      PairwiseCost cost = instance_cost(x, out.state.projection, out.state.predicted);
      GraphUpdate s = update_instance_graph(cost, eff.k_s);
      out.trace.degenerate_s_rows += s.degenerate_rows;
      const int accepted =
          accept_graph_rows(cost.values, s, out.state.instance_graph, out.regularizers.alpha_rows);
      ++out.trace.s_updates;
      if (accepted > 0) {
        ls = laplacian(out.state.instance_graph);
        xlx_stale = true;
      }
    }
    if (uses_label_graph(variant)) {
      PairwiseCost cost = label_cost(out.state.predicted);
      GraphUpdate p = update_label_graph(cost, eff.k_p);
      out.trace.degenerate_p_rows += p.degenerate_rows;
      const int accepted =
          accept_graph_rows(cost.values, p, out.state.label_graph, out.regularizers.beta_rows);
      ++out.trace.p_updates;
      if (accepted > 0) lp = laplacian(out.state.label_graph);
    }

    out.state.bias = compute_bias(out.state.predicted, out.state.projection, x);
    const double value = objective_value(out.state, data, eff, out.regularizers);
    out.state.objective = value;
    out.trace.objective_values.push_back(value);
    out.trace.iterations_run = it + 1;

    // The initialization point is not feasible for the constraint, so the
    // convergence test only compares constrained iterates.
    if (it > 0 && std::abs(prev - value) < eff.tol_rel_obj * std::max(std::abs(prev), 1e-12)) {
      out.trace.converged = true;
      break;
    }
    prev = value;
  }

  out.ranking = rank_features(out.state.projection);
  return out;
}

FeatureRanking rank_features(const Matrix& projection) {
  FeatureRanking out;
  out.scores = projection.rowwise().norm();
  out.order.resize(static_cast<std::size_t>(projection.rows()));
  for (std::size_t i = 0; i < out.order.size(); ++i) out.order[i] = static_cast<Index>(i);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](Index a, Index b) { return out.scores[a] > out.scores[b]; });
  return out;
}

std::vector<Index> select_features(const FeatureRanking& ranking, int k) {
  const int d = static_cast<int>(ranking.order.size());
  if (k < 1 || k > d)
    throw ConfigError("select_features: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(d) + "]");
  return std::vector<Index>(ranking.order.begin(), ranking.order.begin() + k);
}

}  // namespace accessmfs
