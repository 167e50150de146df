#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>

#include "sdelap/linalg/block_tridiagonal.hpp"

namespace testutil {

/// H = L L^T with L lower block-bidiagonal and a dominant diagonal.
inline sdelap::linalg::BlockTridiagonal random_spd(const std::vector<int>& sizes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int m = static_cast<int>(sizes.size());
  std::vector<Eigen::MatrixXd> d(m), l(m);
  for (int i = 0; i < m; ++i) {
    d[i] = Eigen::MatrixXd::NullaryExpr(sizes[i], sizes[i], [&] { return u(rng); });
    d[i].diagonal().array() += 2.5;
    if (i > 0) l[i] = Eigen::MatrixXd::NullaryExpr(sizes[i], sizes[i - 1], [&] { return u(rng); });
  }
  sdelap::linalg::BlockTridiagonal h(sizes);
  for (int i = 0; i < m; ++i) {
    h.diag(i) = d[i] * d[i].transpose();
    if (i > 0) {
      h.diag(i) += l[i] * l[i].transpose();
      h.lower(i) = l[i] * d[i - 1].transpose();
    }
  }
  return h;
}

inline sdelap::linalg::BlockTridiagonal random_spd(int blocks, int size, std::mt19937_64& rng) {
  return random_spd(std::vector<int>(blocks, size), rng);
}

}  // namespace testutil
