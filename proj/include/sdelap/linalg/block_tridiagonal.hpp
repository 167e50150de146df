#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sdelap::linalg {

/// Symmetric block-tridiagonal matrix with variable (possibly zero) block sizes.
/// Only the diagonal blocks and the blocks below the diagonal are stored.
class BlockTridiagonal {
 public:
  BlockTridiagonal() = default;
  explicit BlockTridiagonal(std::vector<int> block_sizes);

  int block_count() const { return static_cast<int>(sizes_.size()); }
  int block_size(int i) const { return sizes_[i]; }
  Eigen::Index offset(int i) const { return offsets_[i]; }
  Eigen::Index dim() const { return offsets_.empty() ? 0 : offsets_.back(); }
  const std::vector<int>& block_sizes() const { return sizes_; }

  Eigen::MatrixXd& diag(int i) { return diag_[i]; }
  const Eigen::MatrixXd& diag(int i) const { return diag_[i]; }
  /// Block (i, i-1), for i >= 1.
  Eigen::MatrixXd& lower(int i) { return lower_[i]; }
  const Eigen::MatrixXd& lower(int i) const { return lower_[i]; }

  /// Adds `value` at global entry (row, col). Throws StructureViolation when the
  /// entry is outside the tridiagonal block band. Entries above the diagonal
  /// band are folded onto their transposed position.
  void add(Eigen::Index row, Eigen::Index col, double value);

  void set_zero();
  void add_to_diagonal(double mu);
  Eigen::MatrixXd to_dense() const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  /// max |B - B^T| over diagonal blocks.
  double max_asymmetry() const;
  double max_abs() const;
  int block_of(Eigen::Index index) const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;  // size block_count()+1
  std::vector<Eigen::MatrixXd> diag_;
  std::vector<Eigen::MatrixXd> lower_;
};

/// Block Cholesky factorization H = L L^T of a block-tridiagonal SPD matrix.
/// Cost is linear in the number of blocks.
class BlockCholesky {
 public:
  /// Returns std::nullopt if the matrix is not numerically positive definite.
  static std::optional<BlockCholesky> try_factor(const BlockTridiagonal& h);
  /// Throws Error(NotPositiveDefinite) on failure.
  static BlockCholesky factor(const BlockTridiagonal& h);

  double log_det() const { return log_det_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  /// Diagonal blocks of H^{-1} via the selected-inversion recursion.
  std::vector<Eigen::MatrixXd> inverse_diagonal_blocks() const;
  Eigen::VectorXd marginal_variances() const;

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> offsets_;
  std::vector<Eigen::MatrixXd> chol_;   // lower-triangular C_i
  std::vector<Eigen::MatrixXd> coupling_;  // V_i = C_{i-1}^{-1} L_i^T, i >= 1
  double log_det_ = 0.0;
};

struct LogDetSolve {
  double log_det = 0.0;
  std::optional<Eigen::VectorXd> solution;
};

LogDetSolve logdet_and_solve(const BlockTridiagonal& h, const Eigen::VectorXd* rhs = nullptr);
Eigen::VectorXd marginal_variances(const BlockTridiagonal& h);

}  // namespace sdelap::linalg
