#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spgp/core.hpp"

namespace spgp {

/// Assignment of the N observations to K non-empty blocks.
struct BlockPartition {
  int k = 1;
  std::vector<int> assignment;

  void validate(Index n) const;
  /// Row indices of each block, ascending within a block.
  std::vector<std::vector<Index>> members() const;
};

/// Seeded shuffle followed by contiguous, near-equal chunks.
BlockPartition make_block_partition(Index n, int k, std::uint64_t seed);

/// Inputs and responses of one likelihood block.
struct DataBlock {
  Matrix x;
  Vector y;
};

/// Dataset plus the modelling choices that define L, R and Gamma.
class Objective {
public:
  explicit Objective(Dataset data, KernelFamily family = KernelFamily::Exponential,
                     double penalty_exponent = 1.0, double jitter_base = 1e-8,
                     std::optional<BlockPartition> partition = std::nullopt);

  const Dataset& data() const noexcept { return data_; }
  KernelFamily family() const noexcept { return family_; }
  double penalty_exponent() const noexcept { return r_; }
  double jitter_base() const noexcept { return jitter_base_; }
  const std::optional<BlockPartition>& partition() const noexcept { return partition_; }
  const std::vector<DataBlock>& blocks() const noexcept { return blocks_; }

private:
  Dataset data_;
  KernelFamily family_;
  double r_;
  double jitter_base_;
  std::optional<BlockPartition> partition_;
  std::vector<DataBlock> blocks_;
};

/// Cholesky factor of sigma^2 I + C with the diagonal jitter that was needed (0 if none).
struct NoisyCovFactor {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;
};

/// Factorizes `m`, retrying with jitter_base * 10^k (k = 0..4) on the diagonal.
NoisyCovFactor factorize_noisy_cov(const Matrix& m, double jitter_base);

/// 1/2 y' M^-1 y + 1/2 log|M| for one block, M = sigma^2 I + C. Accepts a single row.
double block_nll(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                 const Eigen::Ref<const Matrix>& s, const CovParams& cov,
                 double jitter_base = 1e-8);

/// Negative log marginal likelihood summed over the objective's blocks (one block unless
/// the objective was built with a partition).
double nll(const Objective& obj, const Eigen::Ref<const Matrix>& s, const CovParams& cov);
double nll(const Objective& obj, const ProjectionMatrix& s, const CovParams& cov);

/// Sum of independent block likelihoods under an explicit partition.
double nll_blocked(const Objective& obj, const ProjectionMatrix& s, const CovParams& cov,
                   const BlockPartition& part);

/// sum |S_lm|^r, 0 < r <= 1.
double penalty(const Eigen::Ref<const Matrix>& s, double r = 1.0);
double penalty(const ProjectionMatrix& s, double r = 1.0);

/// Penalty of the S block of phi.
double penalty(const ParamVector& phi, double r = 1.0);

/// L(phi) + lambda R(S), with lambda = +inf contributing 0 when S = 0.
double gamma(const Objective& obj, const ParamVector& phi, double lambda);

/// Gradient of L with respect to every coordinate of phi (log scale for theta, sigma^2).
Vector nll_gradient(const Objective& obj, const ParamVector& phi);

/// Gradient of Gamma restricted to support(phi); zero elsewhere.
/// lambda must be finite unless the S block is zero.
Vector support_gradient(const Objective& obj, const ParamVector& phi, double lambda);

}  // namespace spgp
