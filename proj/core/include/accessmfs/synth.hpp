#pragma once

#include "accessmfs/types.hpp"

#include <cstdint>
#include <vector>

namespace accessmfs {

/// Planted-structure generator: a random subset of features drives the labels
/// through a random linear map; all other features are pure noise. The
/// informative block is a Gaussian mixture, so instances form clusters whose
/// structure is visible only through the informative features. Each label is
/// the (noisy) logit thresholded at its own quantile: rates are spread around
/// positive_rate, giving the frequent-and-rare label mix typical of
/// multi-label data. With zero noise the labels are an exact function of the
/// informative block and the calibrated affine probe (logit minus threshold)
/// ranks perfectly.
struct PlantedConfig {
  Index num_features = 50;
  Index num_informative = 10;
  Index num_instances = 300;
  Index num_labels = 5;
  Index num_clusters = 4;          // mixture components in the informative block
  double cluster_separation = 3.0; // center stddev relative to unit within-cluster spread
  Index label_rank = 2;            // rank of the feature-to-label map; < num_labels
                                   // makes the label columns correlated
  double noise = 0.05;             // stddev of logit noise
  double label_flip_rate = 0.0;    // per-entry probability of flipping a label
  double positive_rate = 0.3;      // mean fraction of positive (instance,label) pairs
  std::uint64_t seed = 1;
};

struct PlantedDataset {
  Dataset data;                     // fully labeled
  std::vector<Index> informative;   // ground-truth informative feature indices, ascending
  Matrix label_map;                 // num_informative x num_labels
  Vector thresholds;                // per-label logit thresholds
};

PlantedDataset generate_planted(const PlantedConfig& config);

/// Calibrated scores of the planted probe (noiseless logit minus per-label
/// threshold), n x c, for oracle checks.
Matrix planted_logits(const PlantedDataset& planted);

}  // namespace accessmfs
