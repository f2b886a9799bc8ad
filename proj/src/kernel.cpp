#include "spgp/kernel.hpp"

#include <string>

#include "spgp/errors.hpp"

namespace spgp {

double kernel_value(KernelFamily family, double d, double theta) {
  switch (family) {
    case KernelFamily::Exponential: return theta * std::exp(-d);
    case KernelFamily::SquaredExponential: return theta * std::exp(-d * d);
  }
  return 0.0;
}

double kernel_slope(KernelFamily family, double d, double theta) {
  switch (family) {
    case KernelFamily::Exponential: return -theta * std::exp(-d);
    case KernelFamily::SquaredExponential: return -2.0 * d * theta * std::exp(-d * d);
  }
  return 0.0;
}

double proj_distance(const ProjectionMatrix& s, const Eigen::Ref<const Vector>& x1,
                     const Eigen::Ref<const Vector>& x2) {
  if (x1.size() != s.p() || x2.size() != s.p()) {
    throw DimensionError("proj_distance: expected vectors of length " + std::to_string(s.p()));
  }
  return (s.matrix() * (x1 - x2)).norm();
}

Matrix proj_distance_matrix(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Matrix>& a,
                            const Eigen::Ref<const Matrix>& b) {
  if (a.cols() != s.cols() || b.cols() != s.cols()) {
    throw DimensionError("proj_distance_matrix: input width does not match S");
  }
  const Matrix za = a * s.transpose();
  const Matrix zb = b * s.transpose();
  Matrix d(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j)
    for (Index i = 0; i < a.rows(); ++i) d(i, j) = (za.row(i) - zb.row(j)).norm();
  return d;
}

Matrix cov_matrix(const Eigen::Ref<const Matrix>& s, const CovParams& cov,
                  const Eigen::Ref<const Matrix>& x) {
  if (x.cols() != s.cols()) throw DimensionError("cov_matrix: input width does not match S");
  const double theta = cov.theta();
  const Index n = x.rows();
  const Matrix z = x * s.transpose();
  Matrix c(n, n);
  for (Index j = 0; j < n; ++j) {
    c(j, j) = theta;
    for (Index i = j + 1; i < n; ++i) {
      const double v = kernel_value(cov.family, (z.row(i) - z.row(j)).norm(), theta);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

Matrix cov_matrix(const ProjectionMatrix& s, const CovParams& cov,
                  const Eigen::Ref<const Matrix>& x) {
  return cov_matrix(s.matrix(), cov, x);
}

Matrix cross_cov_matrix(const Eigen::Ref<const Matrix>& s, const CovParams& cov,
                        const Eigen::Ref<const Matrix>& x_test,
                        const Eigen::Ref<const Matrix>& x_train) {
  Matrix k = proj_distance_matrix(s, x_test, x_train);
  const double theta = cov.theta();
  for (Index j = 0; j < k.cols(); ++j)
    for (Index i = 0; i < k.rows(); ++i) k(i, j) = kernel_value(cov.family, k(i, j), theta);
  return k;
}

Matrix cov_matrix_partial(const ProjectionMatrix& s, const CovParams& cov,
                          const Eigen::Ref<const Matrix>& x, Index j) {
  const Index q = s.q();
  const Index p = s.p();
  if (x.cols() != p) throw DimensionError("cov_matrix_partial: input width does not match S");
  if (j < 0 || j >= q * p + 2) {
    throw DimensionError("cov_matrix_partial: coordinate " + std::to_string(j) +
                         " out of range [0, " + std::to_string(q * p + 2) + ")");
  }
  const Index n = x.rows();
  if (j == q * p) return cov_matrix(s, cov, x);
  if (j == q * p + 1) return cov.sigma2() * Matrix::Identity(n, n);

  const Index l = j / p;
  const Index m = j % p;
  const double theta = cov.theta();
  const Matrix z = x * s.matrix().transpose();
  Matrix out = Matrix::Zero(n, n);
  for (Index b = 0; b < n; ++b) {
    for (Index a = b + 1; a < n; ++a) {
      const double d = (z.row(a) - z.row(b)).norm();
      if (d == 0.0) continue;
      const double v = kernel_slope(cov.family, d, theta) * (z(a, l) - z(b, l)) *
                       (x(a, m) - x(b, m)) / d;
      out(a, b) = v;
      out(b, a) = v;
    }
  }
  return out;
}

}  // namespace spgp
