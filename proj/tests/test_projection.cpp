#include "accessmfs/projection.hpp"

#include <doctest.h>

#include <random>

#include "oracles.hpp"

using namespace accessmfs;

TEST_CASE("build constraint trivial cases") {
  SUBCASE("identity") {
    // X = 0, D = I, lambda = 1 -> R = I.
    ConstraintMatrix cm = build_constraint(Matrix::Zero(3, 4), Vector::Ones(3),
                                           Matrix::Zero(4, 4), 1.0, 0.0);
    CHECK((cm.r - Matrix::Identity(3, 3)).norm() < 1e-12);
    CHECK((cm.inv_sqrt - Matrix::Identity(3, 3)).norm() < 1e-12);
  }
  SUBCASE("diagonal scaling") {
    Vector d(2);
    d << 4, 1;
    ConstraintMatrix cm = build_constraint(Matrix::Zero(2, 4), d, Matrix::Zero(4, 4), 1.0, 0.0);
    CHECK(cm.inv_sqrt(0, 0) == doctest::Approx(0.5));
    CHECK(cm.inv_sqrt(1, 1) == doctest::Approx(1.0));
  }
  SUBCASE("random SPD assembly satisfies the inverse-sqrt identity") {
    std::mt19937_64 rng(83);
    const Index d = 8, n = 12;
    Matrix x = oracle::random_matrix(rng, d, n);
    Matrix s = oracle::random_row_stochastic(rng, n);
    Vector weights = Vector::Random(d).array().abs() + 0.1;
    ConstraintMatrix cm = build_constraint(x, weights, laplacian(s), 0.7, 0.3);
    CHECK((cm.inv_sqrt * cm.r * cm.inv_sqrt - Matrix::Identity(d, d)).norm() < 1e-8);
  }
  SUBCASE("nonpositive weights rejected") {
    CHECK_THROWS_AS(build_constraint(Matrix::Zero(2, 3), Vector::Zero(2), Matrix::Zero(3, 3),
                                     1.0, 0.0),
                    ConfigError);
  }
}

TEST_CASE("l21 reweighting diagonal") {
  SUBCASE("zero matrix") {
    Vector d = update_l21_weights(Matrix::Zero(3, 2), 1.0);
    CHECK((d - Vector::Constant(3, 0.5)).norm() < 1e-15);
  }
  SUBCASE("row norm sqrt(3), eps 1 gives quarter") {
    Matrix w(1, 3);
    w << 1, 1, 1;
    CHECK(update_l21_weights(w, 1.0)[0] == doctest::Approx(0.25));
  }
  SUBCASE("random rows match the scalar formula and decrease with row norm") {
    std::mt19937_64 rng(89);
    Matrix w = oracle::random_matrix(rng, 6, 4);
    Vector d = update_l21_weights(w, 1e-8);
    for (Index i = 0; i < 6; ++i) {
      const double expect = 0.5 / std::sqrt(w.row(i).squaredNorm() + 1e-8);
      CHECK(d[i] == doctest::Approx(expect).epsilon(1e-14));
    }
    Matrix scaled = 2.0 * w;
    Vector d2 = update_l21_weights(scaled, 1e-8);
    for (Index i = 0; i < 6; ++i) CHECK(d2[i] < d[i]);
  }
}

TEST_CASE("procrustes") {
  SUBCASE("orthonormal input is a fixed point") {
    std::mt19937_64 rng(97);
    Matrix g = oracle::random_matrix(rng, 6, 3);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(6, 3);
    ProcrustesResult res = procrustes(q);
    CHECK((res.matrix - q).norm() < 1e-10);
  }
  SUBCASE("axis scaling is removed") {
    Matrix b(3, 2);
    b << 2, 0, 0, 3, 0, 0;
    Matrix expect(3, 2);
    expect << 1, 0, 0, 1, 0, 0;
    CHECK((procrustes(b).matrix - expect).norm() < 1e-12);
  }
  SUBCASE("beats random orthonormal candidates") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 10; ++rep) {
      Matrix b = oracle::random_matrix(rng, 6, 3);
      Matrix a = procrustes(b).matrix;
      CHECK((a.transpose() * a - Matrix::Identity(3, 3)).norm() < 1e-10);
      const double best = (a.transpose() * b).trace();
      for (int cand = 0; cand < 200; ++cand) {
        Matrix g = oracle::random_matrix(rng, 6, 3);
        Eigen::HouseholderQR<Matrix> qr(g);
        Matrix q = qr.householderQ() * Matrix::Identity(6, 3);
        CHECK((q.transpose() * b).trace() <= best + 1e-9);
      }
    }
  }
  SUBCASE("zero matrix completes deterministically") {
    ProcrustesResult res = procrustes(Matrix::Zero(5, 2));
    CHECK(res.rank == 0);
    CHECK((res.matrix.transpose() * res.matrix - Matrix::Identity(2, 2)).norm() < 1e-12);
    ProcrustesResult again = procrustes(Matrix::Zero(5, 2));
    CHECK((res.matrix - again.matrix).norm() == 0.0);
  }
  SUBCASE("column scaling of an orthogonal-column input does not change the result") {
    std::mt19937_64 rng(103);
    Matrix g = oracle::random_matrix(rng, 7, 3);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(7, 3);
    Matrix scaled = q;
    scaled.col(0) *= 2.0;
    scaled.col(1) *= 0.5;
    scaled.col(2) *= 7.0;
    CHECK((procrustes(q).matrix - procrustes(scaled).matrix).norm() < 1e-10);
  }
}

TEST_CASE("projection update") {
  std::mt19937_64 rng(107);
  const Index d = 10, n = 20, c = 3;
  Matrix x = oracle::random_matrix(rng, d, n);
  Matrix f = oracle::random_matrix(rng, n, c);
  Matrix ls = laplacian(oracle::random_row_stochastic(rng, n));

  SUBCASE("constraint satisfied and the accepted value never increases") {
    ProjectionUpdate up = update_projection(x, f, ls, 0.5, 0.4, 10, 1e-8, 0.0);
    CHECK(up.constraint_residual < kConstraintTol);
    REQUIRE(!up.inner_objective.empty());
    for (std::size_t t = 1; t < up.inner_objective.size(); ++t)
      CHECK(up.inner_objective[t] <= up.inner_objective[t - 1]);
    CHECK(up.block_value == up.inner_objective.back());
    // the returned value is reproducible from the returned W
    ProjectionProblem prob = make_projection_problem(x, f, ls, 0.4);
    CHECK(projection_block_value(prob, up.projection, 0.5, 0.4) ==
          doctest::Approx(up.block_value));
  }
  SUBCASE("warm start is never made worse") {
    ProjectionProblem prob = make_projection_problem(x, f, ls, 0.4);
    ProjectionUpdate first = update_projection(prob, 0.5, 0.4, 6, 1e-8, 1e-5);
    ProjectionWarmStart warm{&first.projection, first.constraint_residual};
    ProjectionUpdate second = update_projection(prob, 0.5, 0.4, 6, 1e-8, 1e-5, warm);
    CHECK(second.block_value <= first.block_value);
    CHECK(second.constraint_residual < kConstraintTol);
  }
  SUBCASE("single-column case matches the closed form") {
    // c = 1: the maximizer of w^T X H f with w^T R w = 1 is parallel to
    // R^{-1} X H f.
    Matrix f1 = oracle::random_matrix(rng, n, 1);
    ProjectionUpdate up = update_projection(x, f1, ls, 0.5, 0.4, 1, 1e-8, 0.0);
    ConstraintMatrix cm = build_constraint(x, Vector::Ones(d), ls, 0.5, 0.4);
    Matrix xc = x.colwise() - x.rowwise().mean();
    Vector target = cm.r.ldlt().solve(xc * apply_centering(f1)).col(0);
    Vector w = up.projection.col(0);
    const double cosine = std::abs(w.dot(target)) / (w.norm() * target.norm());
    CHECK(cosine == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("zero target exercises the rank-deficient path") {
    ProjectionUpdate up = update_projection(x, Matrix::Zero(n, c), ls, 0.5, 0.0, 3, 1e-8, 0.0);
    CHECK(up.rank_deficient_steps > 0);
    CHECK(up.constraint_residual < kConstraintTol);
  }
}
