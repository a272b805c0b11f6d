#include "accessmfs/synth.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace accessmfs {

PlantedDataset generate_planted(const PlantedConfig& config) {
  const Index d = config.num_features;
  const Index n = config.num_instances;
  const Index c = config.num_labels;
  const Index inf = config.num_informative;
  if (inf < 1 || inf > d)
    throw ConfigError("generate_planted: informative count outside [1, num_features]");
  if (n < 4) throw ConfigError("generate_planted: need at least 4 instances");
  if (c < 2) throw ConfigError("generate_planted: need at least 2 labels");
  if (!(config.positive_rate > 0.0 && config.positive_rate < 1.0))
    throw ConfigError("generate_planted: positive rate must be in (0,1)");
  if (config.noise < 0.0) throw ConfigError("generate_planted: noise must be >= 0");

  if (config.num_clusters < 1)
    throw ConfigError("generate_planted: need at least one cluster");
  if (config.cluster_separation < 0.0)
    throw ConfigError("generate_planted: cluster separation must be >= 0");

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix x(d, n);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < n; ++j) x(i, j) = gauss(rng);

  std::vector<Index> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), Index{0});
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<Index> informative(all.begin(), all.begin() + inf);
  std::sort(informative.begin(), informative.end());

  // Shift the informative block by per-cluster centers; distractor features
  // stay plain noise, so the cluster geometry is only visible through the
  // planted subspace.
  {
    Matrix centers(inf, config.num_clusters);
    for (Index i = 0; i < inf; ++i)
      for (Index k = 0; k < config.num_clusters; ++k)
        centers(i, k) = config.cluster_separation * gauss(rng);
    std::uniform_int_distribution<Index> pick(0, config.num_clusters - 1);
    for (Index j = 0; j < n; ++j) {
      const Index k = pick(rng);
      for (Index i = 0; i < inf; ++i)
        x(informative[static_cast<std::size_t>(i)], j) += centers(i, k);
    }
  }

  // A low-rank map makes the label columns linear mixtures of a few latent
  // directions, i.e. correlated labels.
  const Index rank = std::min(std::max<Index>(1, config.label_rank), c);
  Matrix latent(inf, rank);
  for (Index i = 0; i < inf; ++i)
    for (Index j = 0; j < rank; ++j) latent(i, j) = gauss(rng);
  Matrix mix(rank, c);
  for (Index i = 0; i < rank; ++i)
    for (Index j = 0; j < c; ++j) mix(i, j) = gauss(rng);
  Matrix label_map = latent * mix;

  Matrix x_inf(inf, n);
  for (Index i = 0; i < inf; ++i) x_inf.row(i) = x.row(informative[static_cast<std::size_t>(i)]);
  Matrix logits = (label_map.transpose() * x_inf).transpose();  // n x c
  if (config.noise > 0.0)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < c; ++j) logits(i, j) += config.noise * gauss(rng);

  // Per-label positive rates spread linearly around the configured mean, then
  // each label thresholded at its own quantile.
  Vector thresholds(c);
  Matrix labels(n, c);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Index j = 0; j < c; ++j) {
    double rate = config.positive_rate;
    if (c > 1) {
      const double t = static_cast<double>(j) / static_cast<double>(c - 1);  // 0..1
      rate = config.positive_rate * (0.25 + 1.5 * t);
    }
    rate = std::min(0.9, std::max(2.0 / static_cast<double>(n), rate));
    for (Index i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = logits(i, j);
    std::sort(column.begin(), column.end());
    const std::size_t cut =
        static_cast<std::size_t>((1.0 - rate) * static_cast<double>(column.size()));
    thresholds[j] = column[std::min(cut, column.size() - 1)];
    for (Index i = 0; i < n; ++i) labels(i, j) = logits(i, j) > thresholds[j] ? 1.0 : 0.0;
  }

  if (config.label_flip_rate > 0.0) {
    std::bernoulli_distribution flip(std::min(config.label_flip_rate, 1.0));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < c; ++j)
        if (flip(rng)) labels(i, j) = 1.0 - labels(i, j);
  }

  return PlantedDataset{Dataset::make_labeled(std::move(x), std::move(labels)),
                        std::move(informative), std::move(label_map), std::move(thresholds)};
}

Matrix planted_logits(const PlantedDataset& planted) {
  const Index inf = static_cast<Index>(planted.informative.size());
  Matrix x_inf(inf, planted.data.num_instances());
  for (Index i = 0; i < inf; ++i)
    x_inf.row(i) = planted.data.features().row(planted.informative[static_cast<std::size_t>(i)]);
  Matrix logits = (planted.label_map.transpose() * x_inf).transpose();
  logits.rowwise() -= planted.thresholds.transpose();
  return logits;
}

}  // namespace accessmfs
