#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "sdelap/error.hpp"
#include "sdelap/linalg/block_tridiagonal.hpp"
#include "sdelap/linalg/small.hpp"
#include "test_util.hpp"

using namespace sdelap;
using linalg::BlockCholesky;
using linalg::BlockTridiagonal;

TEST_CASE("log-determinant of identity and scaled identity") {
  BlockTridiagonal id({1, 1, 1, 1});
  id.add_to_diagonal(1.0);
  CHECK(linalg::logdet_and_solve(id).log_det == doctest::Approx(0.0));
  CHECK(linalg::marginal_variances(id).isApprox(Eigen::VectorXd::Ones(4)));

  BlockTridiagonal two({3});
  two.add_to_diagonal(2.0);
  CHECK(linalg::logdet_and_solve(two).log_det == doctest::Approx(3.0 * std::log(2.0)));
}

TEST_CASE("marginal variances of a diagonal matrix") {
  BlockTridiagonal h({1, 1});
  h.diag(0)(0, 0) = 4.0;
  h.diag(1)(0, 0) = 9.0;
  const Eigen::VectorXd v = linalg::marginal_variances(h);
  CHECK(v[0] == doctest::Approx(0.25));
  CHECK(v[1] == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("random SPD block-tridiagonal matrices match dense factorization") {
  std::mt19937_64 rng(11);
  for (int blocks : {1, 2, 7, 50, 200}) {
    for (int bs : {1, 2, 3}) {
      const BlockTridiagonal h = testutil::random_spd(blocks, bs, rng);
      const Eigen::MatrixXd dense = h.to_dense();
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(dense);
      const double ref = ldlt.vectorD().array().log().sum();
      const auto chol = BlockCholesky::factor(h);
      CHECK(std::abs(chol.log_det() - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));

      const Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(dense.rows(), -1.0, 2.0);
      CHECK((chol.solve(rhs) - ldlt.solve(rhs)).lpNorm<Eigen::Infinity>() <= 1e-9);

      const Eigen::VectorXd var = chol.marginal_variances();
      const Eigen::VectorXd ref_var = ldlt.solve(Eigen::MatrixXd::Identity(dense.rows(), dense.cols())).diagonal();
      CHECK((var - ref_var).lpNorm<Eigen::Infinity>() <= 1e-9 * ref_var.lpNorm<Eigen::Infinity>());
    }
  }
}

TEST_CASE("variable and empty blocks") {
  std::mt19937_64 rng(3);
  const BlockTridiagonal h = testutil::random_spd(std::vector<int>{0, 2, 1, 3, 0}, rng);
  const Eigen::MatrixXd dense = h.to_dense();
  const auto chol = BlockCholesky::factor(h);
  CHECK(chol.log_det() == doctest::Approx(std::log(dense.determinant())).epsilon(1e-12));
  const Eigen::VectorXd ref = dense.inverse().diagonal();
  CHECK((chol.marginal_variances() - ref).lpNorm<Eigen::Infinity>() <= 1e-12 * ref.lpNorm<Eigen::Infinity>());
}

TEST_CASE("entries outside the band are rejected") {
  BlockTridiagonal h({1, 1, 1});
  CHECK_NOTHROW(h.add(0, 1, 1.0));
  CHECK_NOTHROW(h.add(1, 0, 1.0));
  try {
    h.add(0, 2, 1.0);
    FAIL("expected StructureViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StructureViolation);
  }
}

TEST_CASE("indefinite input is reported") {
  BlockTridiagonal h({1, 1});
  h.diag(0)(0, 0) = 1.0;
  h.diag(1)(0, 0) = 1.0;
  h.lower(1)(0, 0) = 2.0;
  CHECK_FALSE(BlockCholesky::try_factor(h).has_value());
  try {
    BlockCholesky::factor(h);
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
  }
}

TEST_CASE("small generic LU agrees with Eigen") {
  Mat<double, 3> a;
  a << 2, 1, 0.5, -1, 3, 0.2, 0.4, -0.7, 1.5;
  const Vec<double, 3> b(1, 2, 3);
  CHECK((linalg::solve<double, 3>(a, b) - a.lu().solve(b)).norm() < 1e-13);
  CHECK(linalg::log_abs_det<double, 3>(a) == doctest::Approx(std::log(std::abs(a.determinant()))));
}

TEST_CASE("factorization cost grows linearly in the block count") {
  std::mt19937_64 rng(5);
  auto best_time = [&](int blocks) {
    const BlockTridiagonal h = testutil::random_spd(blocks, 2, rng);
    double best = 1e300;
    for (int rep = 0; rep < 7; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto chol = BlockCholesky::factor(h);
      const Eigen::VectorXd v = chol.marginal_variances();
      const auto t1 = std::chrono::steady_clock::now();
      CHECK(v.size() == 2 * blocks);
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
  };
  const double t1 = best_time(4096);
  const double t2 = best_time(8192);
  MESSAGE("time ratio for doubled block count: " << t2 / t1);
  CHECK(t2 / t1 <= 2.0 * 1.15);
}
