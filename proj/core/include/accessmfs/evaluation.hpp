#pragma once

#include "accessmfs/types.hpp"

namespace accessmfs {

/// Multi-label k-nearest-neighbor classifier: per-label Bayesian posteriors
/// over the number of positive neighbors, with Laplace smoothing.
struct MlknnModel {
  int k_neighbors = 10;
  double smoothing = 1.0;
  Matrix train_features;  // sel x n_train, kept for neighbor queries
  Matrix train_labels;    // n_train x c, needed to count positive neighbors
  Vector prior_pos;       // c, P(label present)
  Matrix cond_pos;        // c x (k+1), P(j positive neighbors | label present)
  Matrix cond_neg;        // c x (k+1), P(j positive neighbors | label absent)
};

struct MlknnPrediction {
  Matrix scores;       // n_test x c posterior of label presence
  Matrix predictions;  // n_test x c in {0,1}, MAP rule
};

MlknnModel mlknn_train(const Matrix& features, const Matrix& labels, int k_neighbors,
                       double smoothing);

MlknnPrediction mlknn_predict(const MlknnModel& model, const Matrix& features);

/// A rank-based metric value plus the number of instances that had to be
/// skipped (no relevant label, or for ranking loss no relevant/irrelevant
/// pair). Throws NumericalError when every instance is skipped.
struct MetricResult {
  double value = 0.0;
  int skipped = 0;
};

/// Ranks use the average-rank convention for ties; per-instance values are
/// accumulated in ascending instance order and relevant labels in ascending
/// label order, so independent reimplementations of the definitions match
/// bit for bit.
MetricResult average_precision(const Matrix& scores, const Matrix& truth);
MetricResult ranking_loss(const Matrix& scores, const Matrix& truth);
MetricResult one_error(const Matrix& scores, const Matrix& truth);

/// Unweighted mean over labels of per-label F1; a label with empty predicted
/// and true positive sets contributes 0.
double macro_f1(const Matrix& predictions, const Matrix& truth);

/// The four headline metrics of one evaluation cell.
struct EvaluationReport {
  double ap = 0.0;
  double maf = 0.0;
  double rl = 0.0;
  double oe = 0.0;
  int ap_skipped = 0;
  int rl_skipped = 0;
  int oe_skipped = 0;
};

EvaluationReport evaluate_all(const Matrix& scores, const Matrix& predictions,
                              const Matrix& truth);

}  // namespace accessmfs
