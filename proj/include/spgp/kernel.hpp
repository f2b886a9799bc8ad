#pragma once

#include "spgp/core.hpp"

namespace spgp {

/// c(d; theta) for a stationary family. Exponential: theta*exp(-d). Squared exponential: theta*exp(-d^2).
double kernel_value(KernelFamily family, double d, double theta);

/// dc/dd at d.
double kernel_slope(KernelFamily family, double d, double theta);

/// ||S (x1 - x2)||_2
double proj_distance(const ProjectionMatrix& s, const Eigen::Ref<const Vector>& x1,
                     const Eigen::Ref<const Vector>& x2);

/// Pairwise projected distances between the rows of `a` and `b` under S.
Matrix proj_distance_matrix(const Eigen::Ref<const Matrix>& s, const Eigen::Ref<const Matrix>& a,
                            const Eigen::Ref<const Matrix>& b);

/// N x N kernel matrix C_{S,theta} (without the noise term). Exactly symmetric.
Matrix cov_matrix(const Eigen::Ref<const Matrix>& s, const CovParams& cov,
                  const Eigen::Ref<const Matrix>& x);
Matrix cov_matrix(const ProjectionMatrix& s, const CovParams& cov, const Eigen::Ref<const Matrix>& x);

/// Cross covariance between test rows and training rows (T x N).
Matrix cross_cov_matrix(const Eigen::Ref<const Matrix>& s, const CovParams& cov,
                        const Eigen::Ref<const Matrix>& x_test,
                        const Eigen::Ref<const Matrix>& x_train);

/// Derivative of sigma^2 I + C with respect to coordinate j of the parameter vector.
///
/// Coordinates 0..q*p-1 address S(l, m) in row-major order; q*p addresses log theta
/// (result is C itself); q*p+1 addresses log sigma^2 (result is sigma^2 I). Pairs with
/// d_S = 0 get a zero entry for S coordinates.
Matrix cov_matrix_partial(const ProjectionMatrix& s, const CovParams& cov,
                          const Eigen::Ref<const Matrix>& x, Index j);

}  // namespace spgp
