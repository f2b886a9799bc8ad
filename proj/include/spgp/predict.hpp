#pragma once

#include <cstdint>

#include "spgp/core.hpp"
#include "spgp/fseg.hpp"

namespace spgp {

/// Posterior means and noise-inclusive predictive variances at T test inputs.
struct Prediction {
  Vector mu;
  Vector var;
};

Prediction posterior(const ProjectionMatrix& s, const CovParams& cov,
                     const Eigen::Ref<const Matrix>& x_train, const Eigen::Ref<const Vector>& y_train,
                     const Eigen::Ref<const Matrix>& x_test, double jitter_base = 1e-8);

double mse(const Prediction& pred, const Eigen::Ref<const Vector>& y_test);
double nlpd(const Prediction& pred, const Eigen::Ref<const Vector>& y_test);

/// Gradient descent on L (lambda = 0) from `start`. With keep_zeros, zero S entries stay
/// zero and no entry crosses zero; otherwise all of S is free. Stops after `max_steps` or
/// when no step lowers L by xi.
ParamVector refit_likelihood(const Objective& obj, ParamVector start, const FsegConfig& cfg,
                             int max_steps, bool keep_zeros = true);

/// Unpenalized model with every input active: dense S ~ N(0, 1/p) drawn from `seed`,
/// covariance parameters from the S = 0 fit, then a free refit.
ParamVector fit_full_model(const Objective& obj, Index q, const FsegConfig& cfg, std::uint64_t seed,
                           int max_steps);

}  // namespace spgp
