#include "spgp/core.hpp"

#include <string>

#include "spgp/errors.hpp"

namespace spgp {

namespace {

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace

Dataset::Dataset(Matrix x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
  if (x_.rows() != y_.size()) {
    throw DimensionError("dataset: X has " + std::to_string(x_.rows()) + " rows but y has " +
                         std::to_string(y_.size()) + " entries");
  }
  if (x_.rows() < 2) throw ValidationError("dataset: need at least 2 observations");
  if (x_.cols() < 1) throw ValidationError("dataset: need at least 1 input column");
  if (!all_finite(x_) || !y_.allFinite()) throw ValidationError("dataset: non-finite value");
}

Matrix Dataset::x_rows(const std::vector<Index>& rows) const {
  Matrix out(static_cast<Index>(rows.size()), p());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = x_.row(rows[i]);
  return out;
}

Vector Dataset::y_rows(const std::vector<Index>& rows) const {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = y_(rows[i]);
  return out;
}

ProjectionMatrix::ProjectionMatrix(Matrix s) : s_(std::move(s)) {
  if (s_.rows() < 1 || s_.rows() > s_.cols()) {
    throw DimensionError("projection: need 1 <= q <= p, got q=" + std::to_string(s_.rows()) +
                         ", p=" + std::to_string(s_.cols()));
  }
  if (!all_finite(s_)) throw ValidationError("projection: non-finite entry");
}

ProjectionMatrix ProjectionMatrix::zeros(Index q, Index p) {
  return ProjectionMatrix(Matrix::Zero(q, p));
}

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Exponential: return "exponential";
    case KernelFamily::SquaredExponential: return "squared_exponential";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "exponential" || name == "exp") return KernelFamily::Exponential;
  if (name == "squared_exponential" || name == "sqexp" || name == "se") {
    return KernelFamily::SquaredExponential;
  }
  throw ValidationError("unknown kernel family '" + std::string(name) + "'");
}

ParamVector::ParamVector(Vector values, Index q, Index p)
    : values_(std::move(values)), q_(q), p_(p) {
  if (q < 1 || p < 1) throw DimensionError("param vector: q and p must be positive");
  if (values_.size() != q * p + 2) {
    throw DimensionError("param vector: expected length " + std::to_string(q * p + 2) + ", got " +
                         std::to_string(values_.size()));
  }
}

ParamVector::ParamVector(const ProjectionMatrix& s, const CovParams& cov)
    : values_(s.q() * s.p() + 2), q_(s.q()), p_(s.p()) {
  for (Index l = 0; l < q_; ++l)
    for (Index m = 0; m < p_; ++m) values_(l * p_ + m) = s(l, m);
  values_(log_theta_index()) = cov.log_theta;
  values_(log_sigma2_index()) = cov.log_sigma2;
}

Matrix ParamVector::s_matrix() const {
  Matrix s(q_, p_);
  for (Index l = 0; l < q_; ++l)
    for (Index m = 0; m < p_; ++m) s(l, m) = values_(l * p_ + m);
  return s;
}

bool ParamVector::s_is_zero() const {
  for (Index j = 0; j < s_size(); ++j)
    if (values_(j) != 0.0) return false;
  return true;
}

ParamVector concat_params(const ProjectionMatrix& s, const CovParams& cov) {
  return ParamVector(s, cov);
}

std::pair<ProjectionMatrix, CovParams> split_params(const ParamVector& phi, Index q, Index p,
                                                    KernelFamily family) {
  if (phi.size() != q * p + 2 || phi.q() != q || phi.p() != p) {
    throw DimensionError("split_params: length " + std::to_string(phi.size()) +
                         " does not match q*p+2 = " + std::to_string(q * p + 2));
  }
  CovParams cov{phi[phi.log_theta_index()], phi[phi.log_sigma2_index()], family};
  return {ProjectionMatrix(phi.s_matrix()), cov};
}

std::vector<Index> support(const ParamVector& phi) {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(phi.size()));
  for (Index j = 0; j < phi.s_size(); ++j)
    if (phi[j] != 0.0) out.push_back(j);
  out.push_back(phi.log_theta_index());
  out.push_back(phi.log_sigma2_index());
  return out;
}

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Init: return "init";
    case StepKind::Backward: return "backward";
    case StepKind::Gradient: return "gradient";
    case StepKind::Forward: return "forward";
  }
  return "unknown";
}

double scaled_penalty(double lambda, double penalty_value) {
  if (penalty_value == 0.0) return 0.0;
  return lambda * penalty_value;
}

}  // namespace spgp
