#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace spgp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Observed inputs (N x p) and responses (N).
class Dataset {
public:
  Dataset(Matrix x, Vector y);

  const Matrix& x() const noexcept { return x_; }
  const Vector& y() const noexcept { return y_; }
  Index n() const noexcept { return x_.rows(); }
  Index p() const noexcept { return x_.cols(); }

  /// Rows selected by `rows`, in the given order. May produce fewer than two rows.
  Matrix x_rows(const std::vector<Index>& rows) const;
  Vector y_rows(const std::vector<Index>& rows) const;

private:
  Matrix x_;
  Vector y_;
};

/// q x p projection defining d_S(x, x') = ||S (x - x')||.
class ProjectionMatrix {
public:
  explicit ProjectionMatrix(Matrix s);
  static ProjectionMatrix zeros(Index q, Index p);

  const Matrix& matrix() const noexcept { return s_; }
  Index q() const noexcept { return s_.rows(); }
  Index p() const noexcept { return s_.cols(); }
  double operator()(Index l, Index m) const { return s_(l, m); }

private:
  Matrix s_;
};

enum class KernelFamily { Exponential, SquaredExponential };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Kernel variance and noise variance, both stored as logs.
struct CovParams {
  double log_theta = 0.0;
  double log_sigma2 = 0.0;
  KernelFamily family = KernelFamily::Exponential;

  double theta() const { return std::exp(log_theta); }
  double sigma2() const { return std::exp(log_sigma2); }
};

/// Flattened optimizer state: S in row-major order, then log theta, then log sigma^2.
class ParamVector {
public:
  ParamVector(Vector values, Index q, Index p);
  ParamVector(const ProjectionMatrix& s, const CovParams& cov);

  const Vector& values() const noexcept { return values_; }
  Vector& values() noexcept { return values_; }
  double operator[](Index j) const { return values_(j); }
  double& operator[](Index j) { return values_(j); }

  Index q() const noexcept { return q_; }
  Index p() const noexcept { return p_; }
  Index size() const noexcept { return values_.size(); }
  Index s_size() const noexcept { return q_ * p_; }
  Index log_theta_index() const noexcept { return q_ * p_; }
  Index log_sigma2_index() const noexcept { return q_ * p_ + 1; }
  bool is_s_coordinate(Index j) const noexcept { return j >= 0 && j < q_ * p_; }

  /// Row-major view of the S block.
  Matrix s_matrix() const;
  bool s_is_zero() const;

private:
  Vector values_;
  Index q_;
  Index p_;
};

ParamVector concat_params(const ProjectionMatrix& s, const CovParams& cov);
std::pair<ProjectionMatrix, CovParams> split_params(const ParamVector& phi, Index q, Index p,
                                                    KernelFamily family = KernelFamily::Exponential);

/// Nonzero S coordinates plus both covariance coordinates, ascending.
std::vector<Index> support(const ParamVector& phi);

enum class StepKind { Init, Backward, Gradient, Forward };
std::string_view to_string(StepKind kind);

struct PathEntry {
  ParamVector phi;
  double lambda = kInfinity;
  double gamma = 0.0;
  double nll = 0.0;
  StepKind step_kind = StepKind::Init;
  int t = 0;
};

/// lambda * R with infinity times zero taken as zero.
double scaled_penalty(double lambda, double penalty_value);

}  // namespace spgp
