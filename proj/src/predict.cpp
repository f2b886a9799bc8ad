#include "spgp/predict.hpp"

#include <cmath>
#include <numbers>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "spgp/errors.hpp"
#include "spgp/kernel.hpp"
#include "spgp/likelihood.hpp"

namespace spgp {

Prediction posterior(const ProjectionMatrix& s, const CovParams& cov,
                     const Eigen::Ref<const Matrix>& x_train, const Eigen::Ref<const Vector>& y_train,
                     const Eigen::Ref<const Matrix>& x_test, double jitter_base) {
  if (x_train.cols() != s.p() || x_test.cols() != s.p()) {
    throw DimensionError("posterior: input width does not match S");
  }
  if (x_train.rows() != y_train.size()) throw DimensionError("posterior: X rows and y length differ");

  Matrix m = cov_matrix(s, cov, x_train);
  m.diagonal().array() += cov.sigma2();
  const auto f = factorize_noisy_cov(m, jitter_base);
  const Matrix k_star = cross_cov_matrix(s.matrix(), cov, x_test, x_train);  // T x N

  Prediction out;
  out.mu = k_star * f.llt.solve(y_train);
  const Matrix half = f.llt.matrixL().solve(k_star.transpose());  // N x T
  const double prior = cov.theta() + cov.sigma2();
  out.var = (prior - half.colwise().squaredNorm().array()).matrix().transpose();
  // Rounding can push the explained part past the prior; the noise term is a floor.
  out.var = out.var.cwiseMax(cov.sigma2());
  return out;
}

double mse(const Prediction& pred, const Eigen::Ref<const Vector>& y_test) {
  if (pred.mu.size() != y_test.size() || y_test.size() == 0) {
    throw DimensionError("mse: prediction and response lengths differ");
  }
  return (y_test - pred.mu).squaredNorm() / static_cast<double>(y_test.size());
}

double nlpd(const Prediction& pred, const Eigen::Ref<const Vector>& y_test) {
  if (pred.mu.size() != y_test.size() || pred.var.size() != y_test.size() || y_test.size() == 0) {
    throw DimensionError("nlpd: prediction and response lengths differ");
  }
  if (!(pred.var.array() > 0.0).all()) throw ValidationError("nlpd: predictive variance must be > 0");
  const auto resid2 = (y_test - pred.mu).array().square();
  const auto terms =
      resid2 / (2.0 * pred.var.array()) + 0.5 * (2.0 * std::numbers::pi * pred.var.array()).log();
  return terms.sum() / static_cast<double>(y_test.size());
}

ParamVector refit_likelihood(const Objective& obj, ParamVector start, const FsegConfig& cfg,
                             int max_steps, bool keep_zeros) {
  return descend_support(obj, std::move(start), 0.0, cfg, max_steps, keep_zeros);
}

ParamVector fit_full_model(const Objective& obj, Index q, const FsegConfig& cfg, std::uint64_t seed,
                           int max_steps) {
  const Index p = obj.data().p();
  // Starting from a small-noise fit instead can leave the descent with gradients too steep
  // for the line search.
  boost::random::mt19937_64 rng(seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(p)));
  Matrix dense(q, p);
  for (Index l = 0; l < q; ++l)
    for (Index m = 0; m < p; ++m) dense(l, m) = normal(rng);
  return refit_likelihood(obj, ParamVector(ProjectionMatrix(dense), fit_constant_cov(obj, cfg)), cfg,
                          max_steps, false);
}

}  // namespace spgp
