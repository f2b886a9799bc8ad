#include "spgp/likelihood.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "spgp/errors.hpp"
#include "spgp/kernel.hpp"

namespace spgp {

void BlockPartition::validate(Index n) const {
  if (k < 1) throw ValidationError("block partition: K must be >= 1");
  if (static_cast<Index>(assignment.size()) != n) {
    throw DimensionError("block partition: assignment covers " + std::to_string(assignment.size()) +
                         " points, dataset has " + std::to_string(n));
  }
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (const int id : assignment) {
    if (id < 0 || id >= k) throw ValidationError("block partition: block id out of range");
    ++counts[static_cast<std::size_t>(id)];
  }
  if (std::find(counts.begin(), counts.end(), 0) != counts.end()) {
    throw ValidationError("block partition: empty block");
  }
}

std::vector<std::vector<Index>> BlockPartition::members() const {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    out[static_cast<std::size_t>(assignment[i])].push_back(static_cast<Index>(i));
  }
  return out;
}

BlockPartition make_block_partition(Index n, int k, std::uint64_t seed) {
  if (k < 1 || k > n) throw ValidationError("block partition: need 1 <= K <= N");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit index draw so the order is library independent.
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  BlockPartition part;
  part.k = k;
  part.assignment.assign(static_cast<std::size_t>(n), 0);
  for (Index pos = 0; pos < n; ++pos) {
    part.assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] =
        static_cast<int>(pos * k / n);
  }
  return part;
}

namespace {

std::vector<DataBlock> build_blocks(const Dataset& data, const std::optional<BlockPartition>& part) {
  std::vector<DataBlock> blocks;
  if (!part) {
    blocks.push_back({data.x(), data.y()});
    return blocks;
  }
  for (const auto& rows : part->members()) blocks.push_back({data.x_rows(rows), data.y_rows(rows)});
  return blocks;
}

Matrix noisy_cov(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Matrix>& s,
                 const CovParams& cov) {
  Matrix m = cov_matrix(s, cov, x);
  m.diagonal().array() += cov.sigma2();
  return m;
}

// S = 0 makes C = theta * 11', whose spectrum is known in closed form.
double constant_cov_nll(const Eigen::Ref<const Vector>& y, const CovParams& cov) {
  const double n = static_cast<double>(y.size());
  const double sigma2 = cov.sigma2();
  const double big = sigma2 + n * cov.theta();
  const double mean = y.mean();
  const double centered = (y.array() - mean).square().sum();
  const double sum = y.sum();
  const double quad = centered / sigma2 + sum * sum / (n * big);
  const double logdet = (n - 1.0) * cov.log_sigma2 + std::log(big);
  return 0.5 * (quad + logdet);
}

}  // namespace

Objective::Objective(Dataset data, KernelFamily family, double penalty_exponent, double jitter_base,
                     std::optional<BlockPartition> partition)
    : data_(std::move(data)),
      family_(family),
      r_(penalty_exponent),
      jitter_base_(jitter_base),
      partition_(std::move(partition)) {
  if (!(r_ > 0.0 && r_ <= 1.0)) throw ValidationError("objective: penalty exponent must be in (0, 1]");
  if (!(jitter_base_ > 0.0)) throw ValidationError("objective: jitter must be positive");
  if (partition_) partition_->validate(data_.n());
  blocks_ = build_blocks(data_, partition_);
}

NoisyCovFactor factorize_noisy_cov(const Matrix& m, double jitter_base) {
  NoisyCovFactor f;
  f.llt.compute(m);
  if (f.llt.info() == Eigen::Success) return f;
  double jitter = jitter_base;
  for (int k = 0; k <= 4; ++k, jitter *= 10.0) {
    Matrix shifted = m;
    shifted.diagonal().array() += jitter;
    f.llt.compute(shifted);
    if (f.llt.info() == Eigen::Success) {
      f.jitter = jitter;
      return f;
    }
  }
  std::ostringstream msg;
  msg << "Cholesky factorization failed after jitter escalation (last jitter " << jitter / 10.0
      << ")";
  throw NumericalError(msg.str());
}

double block_nll(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
                 const Eigen::Ref<const Matrix>& s, const CovParams& cov, double jitter_base) {
  if (x.rows() != y.size()) throw DimensionError("block_nll: X rows and y length differ");
  if (!std::isnormal(cov.theta()) || !std::isnormal(cov.sigma2())) {
    throw NumericalError("theta or sigma^2 underflows or overflows at the given log values");
  }
  if (s.isZero(0.0)) return constant_cov_nll(y, cov);
  const auto f = factorize_noisy_cov(noisy_cov(x, s, cov), jitter_base);
  const Matrix& l = f.llt.matrixLLT();
  const Vector half = f.llt.matrixL().solve(y);
  const double logdet = 2.0 * l.diagonal().array().log().sum();
  const double value = 0.5 * (half.squaredNorm() + logdet);
  if (!std::isfinite(value)) throw NumericalError("negative log likelihood is not finite");
  return value;
}

double nll(const Objective& obj, const Eigen::Ref<const Matrix>& s, const CovParams& cov) {
  if (s.cols() != obj.data().p()) throw DimensionError("nll: S width does not match inputs");
  CovParams c = cov;
  c.family = obj.family();
  double total = 0.0;
  for (const auto& b : obj.blocks()) total += block_nll(b.x, b.y, s, c, obj.jitter_base());
  return total;
}

double nll(const Objective& obj, const ProjectionMatrix& s, const CovParams& cov) {
  return nll(obj, s.matrix(), cov);
}

double nll_blocked(const Objective& obj, const ProjectionMatrix& s, const CovParams& cov,
                   const BlockPartition& part) {
  part.validate(obj.data().n());
  CovParams c = cov;
  c.family = obj.family();
  double total = 0.0;
  for (const auto& rows : part.members()) {
    total += block_nll(obj.data().x_rows(rows), obj.data().y_rows(rows), s.matrix(), c,
                       obj.jitter_base());
  }
  return total;
}

double penalty(const Eigen::Ref<const Matrix>& s, double r) {
  if (r == 1.0) return s.cwiseAbs().sum();
  return s.cwiseAbs().array().pow(r).sum();
}

double penalty(const ProjectionMatrix& s, double r) { return penalty(s.matrix(), r); }

double penalty(const ParamVector& phi, double r) {
  double total = 0.0;
  for (Index j = 0; j < phi.s_size(); ++j) {
    const double a = std::abs(phi[j]);
    total += (r == 1.0) ? a : std::pow(a, r);
  }
  return total;
}

double gamma(const Objective& obj, const ParamVector& phi, double lambda) {
  const double r = penalty(phi, obj.penalty_exponent());
  const double pen = scaled_penalty(lambda, r);
  if (std::isinf(pen)) return kInfinity;
  const CovParams cov{phi[phi.log_theta_index()], phi[phi.log_sigma2_index()], obj.family()};
  return nll(obj, phi.s_matrix(), cov) + pen;
}

Vector nll_gradient(const Objective& obj, const ParamVector& phi) {
  const Index q = phi.q();
  const Index p = phi.p();
  if (p != obj.data().p()) throw DimensionError("nll_gradient: parameter width does not match inputs");
  const Matrix s = phi.s_matrix();
  const CovParams cov{phi[phi.log_theta_index()], phi[phi.log_sigma2_index()], obj.family()};
  const double theta = cov.theta();
  Vector grad = Vector::Zero(phi.size());

  for (const auto& block : obj.blocks()) {
    const Index n = block.x.rows();
    Matrix c = cov_matrix(s, cov, block.x);
    Matrix m = c;
    m.diagonal().array() += cov.sigma2();
    const auto f = factorize_noisy_cov(m, obj.jitter_base());
    const Vector alpha = f.llt.solve(block.y);
    // dL/dphi_j = 1/2 sum_ik G_ik dM_ik with G = M^-1 - alpha alpha'.
    Matrix g = f.llt.solve(Matrix::Identity(n, n));
    g.noalias() -= alpha * alpha.transpose();

    grad(phi.log_theta_index()) += 0.5 * g.cwiseProduct(c).sum();
    grad(phi.log_sigma2_index()) += 0.5 * cov.sigma2() * g.trace();

    if (s.isZero(0.0)) continue;
    const Matrix z = block.x * s.transpose();
    // Pair weights w_ik = G_ik c'(d_ik) / d_ik, zero on the diagonal and where d = 0.
    Matrix w = Matrix::Zero(n, n);
    for (Index k = 0; k < n; ++k) {
      for (Index i = k + 1; i < n; ++i) {
        const double d = (z.row(i) - z.row(k)).norm();
        if (d == 0.0) continue;
        const double v = g(i, k) * kernel_slope(cov.family, d, theta) / d;
        w(i, k) = v;
        w(k, i) = v;
      }
    }
    // sum_{i>k} w_ik (z_il - z_kl)(x_im - x_km) = [Z' (diag(rowsum w) - W) X]_lm
    Matrix lap = -w;
    lap.diagonal() = w.rowwise().sum();
    const Matrix gs = z.transpose() * lap * block.x;
    for (Index l = 0; l < q; ++l)
      for (Index mm = 0; mm < p; ++mm) grad(l * p + mm) += gs(l, mm);
  }
  return grad;
}

Vector support_gradient(const Objective& obj, const ParamVector& phi, double lambda) {
  const bool s_zero = phi.s_is_zero();
  if (std::isinf(lambda) && !s_zero) {
    throw ValidationError("support_gradient: lambda must be finite when S is nonzero");
  }
  if (lambda < 0.0 || std::isnan(lambda)) throw ValidationError("support_gradient: lambda must be >= 0");
  const Vector full = nll_gradient(obj, phi);
  Vector out = Vector::Zero(phi.size());
  const double r = obj.penalty_exponent();
  for (const Index j : support(phi)) {
    out(j) = full(j);
    if (phi.is_s_coordinate(j)) {
      const double v = phi[j];
      const double sign = v > 0.0 ? 1.0 : -1.0;
      const double dr = (r == 1.0) ? sign : r * sign * std::pow(std::abs(v), r - 1.0);
      out(j) += lambda * dr;
    }
  }
  return out;
}

}  // namespace spgp
