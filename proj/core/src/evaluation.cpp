#include "accessmfs/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace accessmfs {

namespace {

// Indices of the k nearest training columns to `query` by Euclidean distance,
// ties broken toward lower index. `exclude` skips one column (leave-one-out
// during training).
std::vector<Index> nearest_neighbors(const Matrix& train, const Vector& query, int k,
                                     Index exclude) {
  const Index n = train.cols();
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    if (i != exclude) idx.push_back(i);
  Vector dist = (train.colwise() - query).colwise().squaredNorm();
  auto cmp = [&](Index a, Index b) {
    return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), cmp);
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

// Sorted tie groups of one score row, best score first.
struct TieGroup {
  double avg_rank;  // 1-based average rank shared by the group
  std::vector<Index> labels;
};

std::vector<TieGroup> rank_groups(const Eigen::RowVectorXd& scores) {
  const Index c = scores.size();
  std::vector<Index> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores[a] > scores[b]; });
  std::vector<TieGroup> groups;
  std::size_t pos = 0;
  while (pos < order.size()) {
    std::size_t end = pos;
    while (end < order.size() && scores[order[end]] == scores[order[pos]]) ++end;
    TieGroup g;
    const double first = static_cast<double>(pos) + 1.0;
    const double count = static_cast<double>(end - pos);
    g.avg_rank = first + (count - 1.0) / 2.0;
    g.labels.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                    order.begin() + static_cast<std::ptrdiff_t>(end));
    groups.push_back(std::move(g));
    pos = end;
  }
  return groups;
}

void check_shapes(const Matrix& scores, const Matrix& truth, const char* who) {
  if (scores.rows() != truth.rows() || scores.cols() != truth.cols())
    throw ConfigError(std::string(who) + ": score and truth shapes differ");
}

}  // namespace

MlknnModel mlknn_train(const Matrix& features, const Matrix& labels, int k_neighbors,
                       double smoothing) {
  const Index n = features.cols();
  const Index c = labels.cols();
  if (labels.rows() != n) throw ConfigError("mlknn_train: label rows must match instance count");
  if (k_neighbors < 1) throw ConfigError("mlknn_train: k_neighbors must be >= 1");
  if (k_neighbors >= n)
    throw ConfigError("mlknn_train: k_neighbors must be smaller than the training-set size");
  if (!(smoothing > 0.0)) throw ConfigError("mlknn_train: smoothing must be > 0");

  MlknnModel model;
  model.k_neighbors = k_neighbors;
  model.smoothing = smoothing;
  model.train_features = features;
  model.train_labels = labels;

  const double s = smoothing;
  model.prior_pos =
      (labels.colwise().sum().transpose().array() + s) / (2.0 * s + static_cast<double>(n));

  // Histogram of positive-neighbor counts, split by label presence.
  Matrix count_pos = Matrix::Zero(c, k_neighbors + 1);
  Matrix count_neg = Matrix::Zero(c, k_neighbors + 1);
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> nb = nearest_neighbors(features, features.col(i), k_neighbors, i);
    for (Index j = 0; j < c; ++j) {
      int delta = 0;
      for (Index t : nb) delta += labels(t, j) == 1.0 ? 1 : 0;
      if (labels(i, j) == 1.0)
        count_pos(j, delta) += 1.0;
      else
        count_neg(j, delta) += 1.0;
    }
  }
  const double bins = static_cast<double>(k_neighbors + 1);
  model.cond_pos.resize(c, k_neighbors + 1);
  model.cond_neg.resize(c, k_neighbors + 1);
  for (Index j = 0; j < c; ++j) {
    const double pos_total = count_pos.row(j).sum();
    const double neg_total = count_neg.row(j).sum();
    model.cond_pos.row(j) = (count_pos.row(j).array() + s) / (s * bins + pos_total);
    model.cond_neg.row(j) = (count_neg.row(j).array() + s) / (s * bins + neg_total);
  }
  return model;
}

MlknnPrediction mlknn_predict(const MlknnModel& model, const Matrix& features) {
  if (features.rows() != model.train_features.rows())
    throw ConfigError("mlknn_predict: feature dimension does not match the trained model");
  const Index n = features.cols();
  const Index c = model.prior_pos.size();

  MlknnPrediction out;
  out.scores.resize(n, c);
  out.predictions.resize(n, c);
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> nb =
        nearest_neighbors(model.train_features, features.col(i), model.k_neighbors, -1);
    for (Index j = 0; j < c; ++j) {
      int delta = 0;
      for (Index t : nb) delta += model.train_labels(t, j) == 1.0 ? 1 : 0;
      const double pos = model.prior_pos[j] * model.cond_pos(j, delta);
      const double neg = (1.0 - model.prior_pos[j]) * model.cond_neg(j, delta);
      out.scores(i, j) = pos / (pos + neg);
      out.predictions(i, j) = pos > neg ? 1.0 : 0.0;
    }
  }
  return out;
}

MetricResult average_precision(const Matrix& scores, const Matrix& truth) {
  check_shapes(scores, truth, "average_precision");
  const Index n = scores.rows();
  double total = 0.0;
  int counted = 0;
  MetricResult out;
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> relevant;
    for (Index j = 0; j < scores.cols(); ++j)
      if (truth(i, j) == 1.0) relevant.push_back(j);
    if (relevant.empty()) {
      ++out.skipped;
      continue;
    }
    auto groups = rank_groups(scores.row(i));
    // Per label: its group's average rank and the relevant-at-or-above count.
    Vector rank(scores.cols());
    Vector rel_le(scores.cols());
    double rel_before = 0.0;
    for (const TieGroup& g : groups) {
      double rel_in = 0.0;
      for (Index j : g.labels)
        if (truth(i, j) == 1.0) rel_in += 1.0;
      for (Index j : g.labels) {
        rank[j] = g.avg_rank;
        rel_le[j] = rel_before + rel_in;
      }
      rel_before += rel_in;
    }
    double sum = 0.0;
    for (Index j : relevant) sum += rel_le[j] / rank[j];
    total += sum / static_cast<double>(relevant.size());
    ++counted;
  }
  if (counted == 0)
    throw NumericalError("average_precision undefined: no instance has a relevant label");
  out.value = total / static_cast<double>(counted);
  return out;
}

MetricResult ranking_loss(const Matrix& scores, const Matrix& truth) {
  check_shapes(scores, truth, "ranking_loss");
  const Index n = scores.rows();
  double total = 0.0;
  int counted = 0;
  MetricResult out;
  for (Index i = 0; i < n; ++i) {
    double nrel = 0.0, nirr = 0.0;
    for (Index j = 0; j < scores.cols(); ++j)
      (truth(i, j) == 1.0 ? nrel : nirr) += 1.0;
    if (nrel == 0.0 || nirr == 0.0) {
      ++out.skipped;
      continue;
    }
    auto groups = rank_groups(scores.row(i));
    // Pairs (relevant, irrelevant) scored in the wrong order; ties count 1/2.
    // All addends are multiples of 1/2, so the sum is exact.
    double rel_after = nrel;
    double misordered = 0.0;
    for (const TieGroup& g : groups) {
      double rel_in = 0.0, irr_in = 0.0;
      for (Index j : g.labels) (truth(i, j) == 1.0 ? rel_in : irr_in) += 1.0;
      rel_after -= rel_in;
      misordered += irr_in * rel_after + 0.5 * rel_in * irr_in;
    }
    total += misordered / (nrel * nirr);
    ++counted;
  }
  if (counted == 0)
    throw NumericalError("ranking_loss undefined: no instance has both label kinds");
  out.value = total / static_cast<double>(counted);
  return out;
}

MetricResult one_error(const Matrix& scores, const Matrix& truth) {
  check_shapes(scores, truth, "one_error");
  const Index n = scores.rows();
  double total = 0.0;
  int counted = 0;
  MetricResult out;
  for (Index i = 0; i < n; ++i) {
    bool any_relevant = false;
    for (Index j = 0; j < scores.cols(); ++j)
      if (truth(i, j) == 1.0) any_relevant = true;
    if (!any_relevant) {
      ++out.skipped;
      continue;
    }
    const double top = scores.row(i).maxCoeff();
    double tied = 0.0, tied_rel = 0.0;
    for (Index j = 0; j < scores.cols(); ++j) {
      if (scores(i, j) == top) {
        tied += 1.0;
        if (truth(i, j) == 1.0) tied_rel += 1.0;
      }
    }
    total += 1.0 - tied_rel / tied;
    ++counted;
  }
  if (counted == 0) throw NumericalError("one_error undefined: no instance has a relevant label");
  out.value = total / static_cast<double>(counted);
  return out;
}

double macro_f1(const Matrix& predictions, const Matrix& truth) {
  check_shapes(predictions, truth, "macro_f1");
  const Index c = predictions.cols();
  double sum = 0.0;
  for (Index j = 0; j < c; ++j) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (Index i = 0; i < predictions.rows(); ++i) {
      const bool pred = predictions(i, j) == 1.0;
      const bool real = truth(i, j) == 1.0;
      if (pred && real) tp += 1.0;
      else if (pred && !real) fp += 1.0;
      else if (!pred && real) fn += 1.0;
    }
    const double denom = 2.0 * tp + fp + fn;
    sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
  }
  return sum / static_cast<double>(c);
}

EvaluationReport evaluate_all(const Matrix& scores, const Matrix& predictions,
                              const Matrix& truth) {
  EvaluationReport r;
  MetricResult ap = average_precision(scores, truth);
  MetricResult rl = ranking_loss(scores, truth);
  MetricResult oe = one_error(scores, truth);
  r.ap = ap.value;
  r.rl = rl.value;
  r.oe = oe.value;
  r.maf = macro_f1(predictions, truth);
  r.ap_skipped = ap.skipped;
  r.rl_skipped = rl.skipped;
  r.oe_skipped = oe.skipped;
  return r;
}

}  // namespace accessmfs
