#include "sdelap/linalg/block_tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "sdelap/error.hpp"

namespace sdelap::linalg {

BlockTridiagonal::BlockTridiagonal(std::vector<int> block_sizes) : sizes_(std::move(block_sizes)) {
  offsets_.assign(sizes_.size() + 1, 0);
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (sizes_[i] < 0) throw Error(ErrorKind::InvalidArgument, "negative block size");
    offsets_[i + 1] = offsets_[i] + sizes_[i];
  }
  diag_.resize(sizes_.size());
  lower_.resize(sizes_.size());
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    diag_[i] = Eigen::MatrixXd::Zero(sizes_[i], sizes_[i]);
    if (i > 0) lower_[i] = Eigen::MatrixXd::Zero(sizes_[i], sizes_[i - 1]);
  }
}

int BlockTridiagonal::block_of(Eigen::Index index) const {
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
  return static_cast<int>(it - offsets_.begin()) - 1;
}

void BlockTridiagonal::add(Eigen::Index row, Eigen::Index col, double value) {
  int br = block_of(row);
  int bc = block_of(col);
  if (br < bc) {
    std::swap(br, bc);
    std::swap(row, col);
  }
  if (br == bc) {
    diag_[br](row - offsets_[br], col - offsets_[bc]) += value;
  } else if (br == bc + 1) {
    lower_[br](row - offsets_[br], col - offsets_[bc]) += value;
  } else {
    throw Error(ErrorKind::StructureViolation,
                "entry couples blocks " + std::to_string(bc) + " and " + std::to_string(br));
  }
}

void BlockTridiagonal::set_zero() {
  for (auto& d : diag_) d.setZero();
  for (auto& l : lower_) l.setZero();
}

void BlockTridiagonal::add_to_diagonal(double mu) {
  for (auto& d : diag_) d.diagonal().array() += mu;
}

Eigen::MatrixXd BlockTridiagonal::to_dense() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim(), dim());
  for (int i = 0; i < block_count(); ++i) {
    out.block(offsets_[i], offsets_[i], sizes_[i], sizes_[i]) = diag_[i];
    if (i > 0) {
      out.block(offsets_[i], offsets_[i - 1], sizes_[i], sizes_[i - 1]) = lower_[i];
      out.block(offsets_[i - 1], offsets_[i], sizes_[i - 1], sizes_[i]) = lower_[i].transpose();
    }
  }
  return out;
}

Eigen::VectorXd BlockTridiagonal::multiply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dim());
  for (int i = 0; i < block_count(); ++i) {
    y.segment(offsets_[i], sizes_[i]) += diag_[i] * x.segment(offsets_[i], sizes_[i]);
    if (i > 0) {
      y.segment(offsets_[i], sizes_[i]) += lower_[i] * x.segment(offsets_[i - 1], sizes_[i - 1]);
      y.segment(offsets_[i - 1], sizes_[i - 1]) +=
          lower_[i].transpose() * x.segment(offsets_[i], sizes_[i]);
    }
  }
  return y;
}

double BlockTridiagonal::max_asymmetry() const {
  double worst = 0.0;
  for (const auto& d : diag_)
    if (d.size() > 0) worst = std::max(worst, (d - d.transpose()).cwiseAbs().maxCoeff());
  return worst;
}

double BlockTridiagonal::max_abs() const {
  double worst = 0.0;
  for (const auto& d : diag_)
    if (d.size() > 0) worst = std::max(worst, d.cwiseAbs().maxCoeff());
  for (const auto& l : lower_)
    if (l.size() > 0) worst = std::max(worst, l.cwiseAbs().maxCoeff());
  return worst;
}

std::optional<BlockCholesky> BlockCholesky::try_factor(const BlockTridiagonal& h) {
  BlockCholesky f;
  const int nb = h.block_count();
  f.sizes_ = h.block_sizes();
  f.offsets_.assign(nb + 1, 0);
  for (int i = 0; i < nb; ++i) f.offsets_[i + 1] = f.offsets_[i] + f.sizes_[i];
  f.chol_.resize(nb);
  f.coupling_.resize(nb);
  double log_det = 0.0;
  for (int i = 0; i < nb; ++i) {
    Eigen::MatrixXd schur = h.diag(i);
    if (i > 0) {
      // V_i = C_{i-1}^{-1} L_i^T
      Eigen::MatrixXd v = h.lower(i).transpose();
      if (f.sizes_[i - 1] > 0)
        f.chol_[i - 1].triangularView<Eigen::Lower>().solveInPlace(v);
      f.coupling_[i] = v;
      schur.noalias() -= v.transpose() * v;
    }
    if (f.sizes_[i] == 0) {
      f.chol_[i].resize(0, 0);
      continue;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(schur);
    if (llt.info() != Eigen::Success) return std::nullopt;
    f.chol_[i] = llt.matrixL();
    for (int k = 0; k < f.sizes_[i]; ++k) {
      const double c = f.chol_[i](k, k);
      if (!(c > 0.0) || !std::isfinite(c)) return std::nullopt;
      log_det += 2.0 * std::log(c);
    }
  }
  f.log_det_ = log_det;
  return f;
}

BlockCholesky BlockCholesky::factor(const BlockTridiagonal& h) {
  auto f = try_factor(h);
  if (!f) throw Error(ErrorKind::NotPositiveDefinite, "block Cholesky factorization failed");
  return std::move(*f);
}

Eigen::VectorXd BlockCholesky::solve(const Eigen::VectorXd& rhs) const {
  const int nb = static_cast<int>(sizes_.size());
  Eigen::VectorXd y = rhs;
  for (int i = 0; i < nb; ++i) {
    if (sizes_[i] == 0) continue;
    auto yi = y.segment(offsets_[i], sizes_[i]);
    if (i > 0 && sizes_[i - 1] > 0)
      yi.noalias() -= coupling_[i].transpose() * y.segment(offsets_[i - 1], sizes_[i - 1]);
    chol_[i].triangularView<Eigen::Lower>().solveInPlace(yi);
  }
  for (int i = nb - 1; i >= 0; --i) {
    if (sizes_[i] == 0) continue;
    auto xi = y.segment(offsets_[i], sizes_[i]);
    if (i + 1 < nb && sizes_[i + 1] > 0)
      xi.noalias() -= coupling_[i + 1] * y.segment(offsets_[i + 1], sizes_[i + 1]);
    chol_[i].transpose().triangularView<Eigen::Upper>().solveInPlace(xi);
  }
  return y;
}

std::vector<Eigen::MatrixXd> BlockCholesky::inverse_diagonal_blocks() const {
  const int nb = static_cast<int>(sizes_.size());
  std::vector<Eigen::MatrixXd> sigma(nb);
  for (int i = nb - 1; i >= 0; --i) {
    const int s = sizes_[i];
    if (s == 0) {
      sigma[i].resize(0, 0);
      continue;
    }
    // Sigma_i = C_i^{-T} (I + V_{i+1} Sigma_{i+1} V_{i+1}^T) C_i^{-1}
    Eigen::MatrixXd middle = Eigen::MatrixXd::Identity(s, s);
    if (i + 1 < nb && sizes_[i + 1] > 0)
      middle.noalias() += coupling_[i + 1] * sigma[i + 1] * coupling_[i + 1].transpose();
    Eigen::MatrixXd cinv = Eigen::MatrixXd::Identity(s, s);
    chol_[i].triangularView<Eigen::Lower>().solveInPlace(cinv);
    sigma[i] = cinv.transpose() * middle * cinv;
  }
  return sigma;
}

Eigen::VectorXd BlockCholesky::marginal_variances() const {
  const auto blocks = inverse_diagonal_blocks();
  Eigen::VectorXd out(offsets_.back());
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (sizes_[i] > 0) out.segment(offsets_[i], sizes_[i]) = blocks[i].diagonal();
  return out;
}

LogDetSolve logdet_and_solve(const BlockTridiagonal& h, const Eigen::VectorXd* rhs) {
  const auto f = BlockCholesky::factor(h);
  LogDetSolve out;
  out.log_det = f.log_det();
  if (rhs) out.solution = f.solve(*rhs);
  return out;
}

Eigen::VectorXd marginal_variances(const BlockTridiagonal& h) {
  return BlockCholesky::factor(h).marginal_variances();
}

}  // namespace sdelap::linalg
