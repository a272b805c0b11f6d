#include "accessmfs/evaluation.hpp"

#include <doctest.h>

#include <random>

#include "oracles.hpp"

using namespace accessmfs;

namespace {

// Two well-separated clusters with opposite labels.
struct SeparableData {
  Matrix features;  // 2 x n
  Matrix labels;    // n x 2
};

SeparableData separable(Index per_cluster, std::mt19937_64& rng) {
  SeparableData out;
  const Index n = 2 * per_cluster;
  out.features.resize(2, n);
  out.labels = Matrix::Zero(n, 2);
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (Index i = 0; i < n; ++i) {
    const bool second = i >= per_cluster;
    out.features(0, i) = (second ? 10.0 : 0.0) + jitter(rng);
    out.features(1, i) = (second ? -3.0 : 3.0) + jitter(rng);
    out.labels(i, second ? 1 : 0) = 1.0;
  }
  return out;
}

}  // namespace

TEST_CASE("mlknn training validates inputs and probabilities") {
  std::mt19937_64 rng(179);
  SeparableData data = separable(6, rng);

  SUBCASE("argument errors") {
    CHECK_THROWS_AS(mlknn_train(data.features, data.labels, 12, 1.0), ConfigError);
    CHECK_THROWS_AS(mlknn_train(data.features, data.labels, 3, 0.0), ConfigError);
  }
  SUBCASE("priors") {
    // all-positive single label with s = 1, n = 3: prior = (1+3)/(2+3)
    Matrix f(1, 3);
    f << 0, 1, 2;
    Matrix y = Matrix::Ones(3, 1);
    MlknnModel m = mlknn_train(f, y, 1, 1.0);
    CHECK(m.prior_pos[0] == doctest::Approx(4.0 / 5.0));
    // no positives: smoothing floor s/(2s+n)
    MlknnModel m0 = mlknn_train(f, Matrix::Zero(3, 1), 1, 1.0);
    CHECK(m0.prior_pos[0] == doctest::Approx(1.0 / 5.0));
  }
  SUBCASE("probabilities lie in (0,1) and count histograms sum to the training size") {
    MlknnModel m = mlknn_train(data.features, data.labels, 3, 1.0);
    CHECK(m.prior_pos.minCoeff() > 0.0);
    CHECK(m.prior_pos.maxCoeff() < 1.0);
    CHECK(m.cond_pos.minCoeff() > 0.0);
    CHECK(m.cond_neg.minCoeff() > 0.0);
    CHECK(m.cond_pos.maxCoeff() < 1.0);
    CHECK(m.cond_neg.maxCoeff() < 1.0);
    // each conditional row is a distribution
    for (Index j = 0; j < 2; ++j) {
      CHECK(m.cond_pos.row(j).sum() == doctest::Approx(1.0));
      CHECK(m.cond_neg.row(j).sum() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("mlknn predicts separable clusters") {
  std::mt19937_64 rng(181);
  SeparableData data = separable(8, rng);
  MlknnModel model = mlknn_train(data.features, data.labels, 3, 1.0);

  SUBCASE("training points classify correctly") {
    MlknnPrediction pred = mlknn_predict(model, data.features);
    CHECK((pred.predictions - data.labels).norm() == 0.0);
    for (Index i = 0; i < data.features.cols(); ++i) {
      const Index truth_label = data.labels(i, 0) == 1.0 ? 0 : 1;
      const Index other = 1 - truth_label;
      CHECK(pred.scores(i, truth_label) > pred.scores(i, other));
    }
  }
  SUBCASE("test points near a cluster inherit its labels") {
    Matrix probe(2, 2);
    probe << 0.1, 9.9, 2.9, -3.1;
    MlknnPrediction pred = mlknn_predict(model, probe);
    CHECK(pred.predictions(0, 0) == 1.0);
    CHECK(pred.predictions(0, 1) == 0.0);
    CHECK(pred.predictions(1, 1) == 1.0);
  }
  SUBCASE("shuffling test instances permutes rows identically") {
    Matrix probe(2, 3);
    probe << 0.0, 10.0, 5.0, 3.0, -3.0, 0.0;
    MlknnPrediction a = mlknn_predict(model, probe);
    Matrix shuffled(2, 3);
    shuffled.col(0) = probe.col(2);
    shuffled.col(1) = probe.col(0);
    shuffled.col(2) = probe.col(1);
    MlknnPrediction b = mlknn_predict(model, shuffled);
    CHECK((a.scores.row(0) - b.scores.row(1)).norm() == 0.0);
    CHECK((a.scores.row(1) - b.scores.row(2)).norm() == 0.0);
    CHECK((a.scores.row(2) - b.scores.row(0)).norm() == 0.0);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(mlknn_predict(model, Matrix::Zero(3, 2)), ConfigError);
  }
}

TEST_CASE("metric hand cases") {
  SUBCASE("perfect ranking") {
    Matrix scores(2, 4);
    scores << 4, 3, 2, 1, 9, 8, 7, 6;
    Matrix truth(2, 4);
    truth << 1, 1, 0, 0, 1, 0, 0, 0;
    CHECK(average_precision(scores, truth).value == doctest::Approx(1.0));
    CHECK(ranking_loss(scores, truth).value == doctest::Approx(0.0));
    CHECK(one_error(scores, truth).value == doctest::Approx(0.0));
  }
  SUBCASE("single instance, relevant label ranked second") {
    Matrix scores(1, 3);
    scores << 5, 9, 1;
    Matrix truth(1, 3);
    truth << 1, 0, 0;
    CHECK(average_precision(scores, truth).value == doctest::Approx(0.5));
  }
  SUBCASE("single relevant label in last place gives 1/c") {
    Matrix scores(1, 5);
    scores << 5, 4, 3, 2, 1;
    Matrix truth(1, 5);
    truth << 0, 0, 0, 0, 1;
    CHECK(average_precision(scores, truth).value == doctest::Approx(1.0 / 5.0));
  }
  SUBCASE("fully inverted ranking loses every pair") {
    Matrix scores(1, 4);
    scores << 1, 2, 3, 4;
    Matrix truth(1, 4);
    truth << 1, 1, 0, 0;
    CHECK(ranking_loss(scores, truth).value == doctest::Approx(1.0));
  }
  SUBCASE("one miss in three instances") {
    Matrix scores(3, 3);
    scores << 9, 1, 0, 9, 1, 0, 1, 9, 0;
    Matrix truth(3, 3);
    truth << 1, 0, 0, 1, 0, 0, 1, 0, 0;
    CHECK(one_error(scores, truth).value == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("macro F1 trivial values") {
    Matrix truth(3, 2);
    truth << 1, 0, 0, 1, 1, 0;
    CHECK(macro_f1(truth, truth) == doctest::Approx(1.0));
    CHECK(macro_f1(Matrix::Zero(3, 2), truth) == doctest::Approx(0.0));
  }
  SUBCASE("macro F1 hand-built confusion counts") {
    // label 0: tp=2, fp=1, fn=1 -> F1 = 4/6; label 1 perfect -> 1.
    Matrix truth(4, 2);
    truth << 1, 1, 1, 0, 1, 1, 0, 0;
    Matrix pred(4, 2);
    pred << 1, 1, 1, 0, 0, 1, 1, 0;
    CHECK(macro_f1(pred, truth) == doctest::Approx(0.5 * (2.0 / 3.0 + 1.0)));
  }
  SUBCASE("instances without relevant labels are skipped and counted") {
    Matrix scores(2, 3);
    scores << 3, 2, 1, 3, 2, 1;
    Matrix truth(2, 3);
    truth << 0, 0, 0, 1, 0, 0;
    MetricResult ap = average_precision(scores, truth);
    CHECK(ap.skipped == 1);
    CHECK(ap.value == doctest::Approx(1.0));
    CHECK_THROWS_AS(average_precision(scores, Matrix::Zero(2, 3)), NumericalError);
  }
}

TEST_CASE("metrics match brute-force oracles exactly on random data") {
  std::mt19937_64 rng(191);
  std::uniform_int_distribution<int> ndist(1, 20), cdist(2, 10);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::bernoulli_distribution coin(0.35);
  int checked = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const Index n = ndist(rng), c = cdist(rng);
    Matrix scores(n, c), truth(n, c), pred(n, c);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < c; ++j) {
        scores(i, j) = uni(rng);
        truth(i, j) = coin(rng) ? 1.0 : 0.0;
        pred(i, j) = coin(rng) ? 1.0 : 0.0;
      }
    // inject score ties in a third of the cases
    if (rep % 3 == 0)
      for (Index i = 0; i < n; ++i)
        for (Index j = 1; j < c; j += 2) scores(i, j) = scores(i, j - 1);

    const bool any_rel = truth.sum() > 0.0;
    bool any_pair = false;
    for (Index i = 0; i < n; ++i) {
      const double row = truth.row(i).sum();
      if (row > 0.0 && row < static_cast<double>(c)) any_pair = true;
    }
    if (!any_rel || !any_pair) continue;
    ++checked;
    CHECK(average_precision(scores, truth).value == oracle::ap_brute(scores, truth));
    CHECK(ranking_loss(scores, truth).value == oracle::rl_brute(scores, truth));
    CHECK(one_error(scores, truth).value == oracle::oe_brute(scores, truth));
    CHECK(macro_f1(pred, truth) == oracle::maf_brute(pred, truth));
  }
  CHECK(checked > 200);
}

TEST_CASE("metrics are invariant to strictly monotone score transforms") {
  std::mt19937_64 rng(193);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::bernoulli_distribution coin(0.4);
  const Index n = 12, c = 6;
  Matrix scores(n, c), truth(n, c);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < c; ++j) {
      scores(i, j) = uni(rng);
      truth(i, j) = coin(rng) ? 1.0 : 0.0;
    }
  truth(0, 0) = 1.0;  // ensure at least one relevant label
  truth(0, 1) = 0.0;
  auto mapped = [&](auto f) {
    Matrix out = scores;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < c; ++j) out(i, j) = f(out(i, j));
    return out;
  };
  Matrix exp_scores = mapped([](double v) { return std::exp(3.0 * v); });
  Matrix affine_scores = mapped([](double v) { return 7.0 * v - 2.0; });
  for (const Matrix& alt : {exp_scores, affine_scores}) {
    CHECK(average_precision(alt, truth).value ==
          doctest::Approx(average_precision(scores, truth).value).epsilon(1e-12));
    CHECK(ranking_loss(alt, truth).value ==
          doctest::Approx(ranking_loss(scores, truth).value).epsilon(1e-12));
    CHECK(one_error(alt, truth).value ==
          doctest::Approx(one_error(scores, truth).value).epsilon(1e-12));
  }
}

TEST_CASE("perfect ranking implies AP=1, RL=0, OE=0 simultaneously") {
  std::mt19937_64 rng(197);
  std::bernoulli_distribution coin(0.5);
  const Index n = 10, c = 5;
  Matrix truth(n, c);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < c; ++j) truth(i, j) = coin(rng) ? 1.0 : 0.0;
    if (truth.row(i).sum() == 0.0) truth(i, 0) = 1.0;
    if (truth.row(i).sum() == static_cast<double>(c)) truth(i, c - 1) = 0.0;
  }
  // scores = truth + small per-label jitter keeps relevant above irrelevant
  Matrix scores = truth;
  std::uniform_real_distribution<double> jitter(0.0, 0.4);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < c; ++j) scores(i, j) += jitter(rng);
  CHECK(average_precision(scores, truth).value == doctest::Approx(1.0));
  CHECK(ranking_loss(scores, truth).value == doctest::Approx(0.0));
  CHECK(one_error(scores, truth).value == doctest::Approx(0.0));
  EvaluationReport rep = evaluate_all(scores, truth, truth);
  CHECK(rep.maf == doctest::Approx(1.0));
}
