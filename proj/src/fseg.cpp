#include "spgp/fseg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include "spgp/errors.hpp"

namespace spgp {

namespace {

constexpr double kLambdaFloor = 1e-12;
constexpr long kMaxInitSweeps = 1'000'000;

// Gamma of a candidate; failures and NaN count as +inf so they never win.
double candidate_gamma(const Objective& obj, const ParamVector& phi, double lambda) {
  try {
    const double g = gamma(obj, phi, lambda);
    return std::isnan(g) ? kInfinity : g;
  } catch (const NumericalError&) {
    return kInfinity;
  }
}

// Evaluates all +-epsilon moves over coordinates [0, n_coords) in parallel, then picks the
// winner by index order so the result does not depend on scheduling.
CoordinateMove best_coordinate_move(const Objective& obj, const ParamVector& phi, double lambda,
                                    Index n_coords, double epsilon) {
  const Index n_cand = 2 * n_coords;
  std::vector<double> values(static_cast<std::size_t>(n_cand), kInfinity);
  tbb::parallel_for(tbb::blocked_range<Index>(0, n_cand), [&](const tbb::blocked_range<Index>& r) {
    for (Index k = r.begin(); k != r.end(); ++k) {
      const Index j = k / 2;
      const double s = (k % 2 == 0) ? epsilon : -epsilon;
      values[static_cast<std::size_t>(k)] =
          candidate_gamma(obj, apply_move(phi, j, s, epsilon), lambda);
    }
  });
  CoordinateMove best{0, epsilon, values[0]};
  for (Index k = 1; k < n_cand; ++k) {
    if (values[static_cast<std::size_t>(k)] < best.gamma) {
      best = {k / 2, (k % 2 == 0) ? epsilon : -epsilon, values[static_cast<std::size_t>(k)]};
    }
  }
  return best;
}

double sample_variance(const Vector& y) {
  const double mean = y.mean();
  return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

PathEntry make_entry(const Objective& obj, ParamVector phi, double lambda, StepKind kind, int t) {
  const CovParams cov{phi[phi.log_theta_index()], phi[phi.log_sigma2_index()], obj.family()};
  const double l = nll(obj, phi.s_matrix(), cov);
  const double g = l + scaled_penalty(lambda, penalty(phi, obj.penalty_exponent()));
  return PathEntry{std::move(phi), lambda, g, l, kind, t};
}

// Backtracking along -grad from step0. S entries that would change sign become zero.
struct LineSearchResult {
  ParamVector phi;
  double step;
};

std::optional<LineSearchResult> line_search(const Objective& obj, const ParamVector& phi,
                                            double lambda, const Vector& grad, double step0,
                                            const FsegConfig& cfg, bool truncate_at_zero = true) {
  if (!grad.allFinite() || grad.isZero(0.0)) return std::nullopt;
  const double start = gamma(obj, phi, lambda);
  double step = step0;
  for (int k = 0; k <= cfg.backtrack_max; ++k, step *= cfg.backtrack_factor) {
    ParamVector trial = phi;
    for (Index j = 0; j < phi.size(); ++j) {
      if (grad(j) == 0.0) continue;
      double v = phi[j] - step * grad(j);
      if (truncate_at_zero && phi.is_s_coordinate(j) &&
          (v == 0.0 || std::signbit(v) != std::signbit(phi[j]))) {
        v = 0.0;
      }
      trial[j] = v;
    }
    if (!trial.values().allFinite()) continue;
    const double drop = start - candidate_gamma(obj, trial, lambda);
    const double moved2 = (trial.values() - phi.values()).squaredNorm();
    if (drop >= cfg.xi && drop >= cfg.armijo * moved2 / step) return LineSearchResult{std::move(trial), step};
  }
  return std::nullopt;
}

double spectral_step(const Vector& dx, const Vector& dg, double fallback) {
  const double sy = dx.dot(dg);
  if (!(sy > 0.0)) return fallback;
  return std::clamp(dx.squaredNorm() / sy, 1e-10, 1e10);
}

// Same-lambda descent to a point where neither a gradient step nor a coordinate move
// clears xi. Returns nothing when the very first attempt fails.
std::optional<PathEntry> descend_at_lambda(const Objective& obj, const PathEntry& start,
                                           const FsegConfig& cfg, int t) {
  ParamVector phi = start.phi;
  double current = start.gamma;
  bool moved = false;
  bool any_gradient = false;
  // Spectral (Barzilai-Borwein) trial steps; the line search still enforces the xi decrease.
  Vector prev_x, prev_g;
  bool have_prev = false;
  int inner = 0;
  for (; inner < cfg.inner_max; ++inner) {
    const bool can_grad = !(std::isinf(start.lambda) && !phi.s_is_zero());
    if (can_grad) {
      const Vector grad = support_gradient(obj, phi, start.lambda);
      double step0 = cfg.grad_step0;
      if (have_prev && cfg.spectral_steps) step0 = spectral_step(phi.values() - prev_x, grad - prev_g, step0);
      if (auto found = line_search(obj, phi, start.lambda, grad, step0, cfg)) {
        prev_x = phi.values();
        prev_g = grad;
        have_prev = true;
        phi = std::move(found->phi);
        current = gamma(obj, phi, start.lambda);
        moved = any_gradient = true;
        continue;
      }
    }
    have_prev = false;
    const CoordinateMove back = backward_search(obj, phi, start.lambda, cfg);
    if (current - back.gamma < cfg.xi) break;
    phi = apply_move(phi, back.j, back.s, cfg.epsilon);
    current = back.gamma;
    moved = true;
  }
  if (!moved) return std::nullopt;
  return make_entry(obj, std::move(phi), start.lambda,
                    any_gradient ? StepKind::Gradient : StepKind::Backward, t);
}

}  // namespace

void FsegConfig::validate() const {
  if (!(epsilon > 0.0)) throw ValidationError("fseg: epsilon must be > 0");
  if (!(xi > 0.0)) throw ValidationError("fseg: xi must be > 0");
  if (t_max < 1) throw ValidationError("fseg: t_max must be >= 1");
  if (!(grad_step0 > 0.0)) throw ValidationError("fseg: initial gradient step must be > 0");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ValidationError("fseg: backtrack factor must be in (0, 1)");
  }
  if (backtrack_max < 0) throw ValidationError("fseg: backtrack_max must be >= 0");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::LambdaZero: return "lambda_zero";
    case Termination::TMax: return "t_max";
    case Termination::Failed: return "failed";
  }
  return "unknown";
}

double monotonicity_slack(double gamma_value) {
  return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(gamma_value));
}

ParamVector apply_move(const ParamVector& phi, Index j, double s, double epsilon) {
  ParamVector out = phi;
  double v = out[j] + s;
  if (phi.is_s_coordinate(j) && std::abs(v) < epsilon * 1e-6) v = 0.0;
  out[j] = v;
  return out;
}

CovParams fit_constant_cov(const Objective& obj, const FsegConfig& cfg) {
  cfg.validate();
  double var = sample_variance(obj.data().y());
  if (!(var > 0.0) || !std::isfinite(var)) var = 1.0;
  CovParams cov{std::log(var), std::log(0.5 * var), obj.family()};
  const Matrix zero = Matrix::Zero(1, obj.data().p());
  double current = nll(obj, zero, cov);

  for (long sweep = 0; sweep < kMaxInitSweeps; ++sweep) {
    CovParams best = cov;
    double best_value = kInfinity;
    for (int k = 0; k < 4; ++k) {
      CovParams trial = cov;
      const double s = (k % 2 == 0) ? cfg.epsilon : -cfg.epsilon;
      if (k < 2) trial.log_theta += s;
      else trial.log_sigma2 += s;
      const double v = nll(obj, zero, trial);
      if (v < best_value) {
        best_value = v;
        best = trial;
      }
    }
    if (current - best_value < cfg.xi) break;
    cov = best;
    current = best_value;
  }
  return cov;
}

PathEntry init_solution(const Objective& obj, Index q, const FsegConfig& cfg) {
  if (q < 1) throw ValidationError("init_solution: q must be >= 1");
  const CovParams cov = fit_constant_cov(obj, cfg);
  return make_entry(obj, ParamVector(ProjectionMatrix::zeros(q, obj.data().p()), cov), kInfinity,
                    StepKind::Init, 0);
}

CoordinateMove backward_search(const Objective& obj, const ParamVector& phi, double lambda,
                               const FsegConfig& cfg) {
  return best_coordinate_move(obj, phi, lambda, phi.size(), cfg.epsilon);
}

CoordinateMove forward_step(const Objective& obj, const ParamVector& phi, const FsegConfig& cfg) {
  return best_coordinate_move(obj, phi, 0.0, phi.s_size(), cfg.epsilon);
}

std::optional<ParamVector> gradient_step(const Objective& obj, const ParamVector& phi,
                                         double lambda, const FsegConfig& cfg) {
  if (std::isinf(lambda) && !phi.s_is_zero()) return std::nullopt;
  const Vector grad = support_gradient(obj, phi, lambda);
  auto found = line_search(obj, phi, lambda, grad, cfg.grad_step0, cfg);
  if (!found) return std::nullopt;
  return std::move(found->phi);
}

ParamVector descend_support(const Objective& obj, ParamVector phi, double lambda, const FsegConfig& cfg,
                            int max_steps, bool fixed_support) {
  cfg.validate();
  if (std::isinf(lambda) && !phi.s_is_zero()) return phi;
  if (!fixed_support && lambda != 0.0) {
    throw ValidationError("descend_support: a free support needs lambda = 0");
  }
  Vector prev_x, prev_g;
  for (int k = 0; k < max_steps; ++k) {
    const Vector grad = fixed_support ? support_gradient(obj, phi, lambda) : nll_gradient(obj, phi);
    const double step0 = k > 0 ? spectral_step(phi.values() - prev_x, grad - prev_g, cfg.grad_step0)
                               : cfg.grad_step0;
    auto found = line_search(obj, phi, lambda, grad, step0, cfg, fixed_support);
    if (!found) break;
    prev_x = phi.values();
    prev_g = grad;
    phi = std::move(found->phi);
  }
  return phi;
}

double lambda_update(double lambda_old, double nll_old, double nll_new, double r_old, double r_new,
                     double xi) {
  if (!(r_new > r_old)) return lambda_old;
  const double ratio = (nll_old - nll_new - xi) / (r_new - r_old);
  return std::min(lambda_old, std::max(0.0, ratio));
}

SolutionPath run_fseg(const Objective& obj, Index q, const FsegConfig& cfg) {
  cfg.validate();
  return run_fseg(obj, q, cfg, fit_constant_cov(obj, cfg));
}

SolutionPath run_fseg(const Objective& obj, Index q, const FsegConfig& cfg,
                      const CovParams& initial_cov) {
  cfg.validate();
  if (q < 1 || q > obj.data().p()) throw ValidationError("run_fseg: need 1 <= q <= p");
  const double r = obj.penalty_exponent();

  SolutionPath path;
  path.q = q;
  path.entries.push_back(make_entry(
      obj, ParamVector(ProjectionMatrix::zeros(q, obj.data().p()), initial_cov), kInfinity,
      StepKind::Init, 0));
  path.terminated_by = Termination::TMax;

  try {
    for (int t = 1; t <= cfg.t_max; ++t) {
      const PathEntry& cur = path.entries.back();
      const ParamVector& phi = cur.phi;
      const double lambda = cur.lambda;

      // Under Converge a descent phase is followed by a forward step, except at the lambda floor
      // where there is nothing left to relax and descent runs until it stalls.
      const bool after_phase = lambda >= kLambdaFloor && (cur.step_kind == StepKind::Gradient ||
                                                          cur.step_kind == StepKind::Backward);
      if (cfg.policy == StepPolicy::Converge && !after_phase) {
        if (auto phase = descend_at_lambda(obj, cur, cfg, t)) {
          path.entries.push_back(std::move(*phase));
          continue;
        }
      }
      const CoordinateMove back = cfg.policy == StepPolicy::Converge
                                      ? CoordinateMove{}
                                      : backward_search(obj, phi, lambda, cfg);
      const bool back_ok = cur.gamma - back.gamma >= cfg.xi;
      if (back_ok && cfg.policy == StepPolicy::Cascade) {
        path.entries.push_back(
            make_entry(obj, apply_move(phi, back.j, back.s, cfg.epsilon), lambda, StepKind::Backward, t));
        continue;
      }
      if (!back_ok && lambda < kLambdaFloor) {
        path.terminated_by = Termination::LambdaZero;
        break;
      }
      if (auto next = cfg.policy == StepPolicy::Converge ? std::nullopt
                                                         : gradient_step(obj, phi, lambda, cfg)) {
        PathEntry grad = make_entry(obj, std::move(*next), lambda, StepKind::Gradient, t);
        if (!back_ok || grad.gamma <= back.gamma) {
          path.entries.push_back(std::move(grad));
          continue;
        }
      }
      if (back_ok) {
        path.entries.push_back(
            make_entry(obj, apply_move(phi, back.j, back.s, cfg.epsilon), lambda, StepKind::Backward, t));
        continue;
      }

      const CoordinateMove fwd = forward_step(obj, phi, cfg);
      ParamVector moved = apply_move(phi, fwd.j, fwd.s, cfg.epsilon);
      const CovParams cov{moved[moved.log_theta_index()], moved[moved.log_sigma2_index()],
                          obj.family()};
      const double nll_new = nll(obj, moved.s_matrix(), cov);
      const double r_old = penalty(phi, r);
      const double r_new = penalty(moved, r);
      const double lambda_new = lambda_update(lambda, cur.nll, nll_new, r_old, r_new, cfg.xi);
      const double gamma_new = nll_new + scaled_penalty(lambda_new, r_new);
      // A forward move that cannot lower Gamma by xi means the likelihood has no coordinate
      // left to improve: the lambda = 0 end of the path has been reached.
      if (!(gamma_new <= cur.gamma - cfg.xi + monotonicity_slack(cur.gamma))) {
        path.terminated_by = Termination::LambdaZero;
        break;
      }
      path.entries.push_back(PathEntry{std::move(moved), lambda_new, gamma_new, nll_new,
                                       StepKind::Forward, t});
    }
  } catch (const NumericalError& e) {
    path.terminated_by = Termination::Failed;
    path.diagnostic = e.what();
  }

#ifndef NDEBUG
  for (std::size_t i = 1; i < path.entries.size(); ++i) {
    const double prev = path.entries[i - 1].gamma;
    assert(path.entries[i].gamma <= prev - cfg.xi + monotonicity_slack(prev));
  }
#endif
  return path;
}

}  // namespace spgp
