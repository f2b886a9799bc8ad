#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spgp/core.hpp"
#include "spgp/likelihood.hpp"

namespace spgp {

/// Order of the same-lambda moves inside one iteration.
enum class StepPolicy {
  Cascade,          // coordinate move if it clears xi, else gradient step, else forward
  BestImprovement,  // larger of the coordinate and gradient improvements, else forward
  Converge,         // gradient steps, then coordinate moves, until neither clears xi;
                    // the whole same-lambda descent is one iteration, else forward
};

struct FsegConfig {
  double epsilon = 1e-3;        // coordinate step size
  double xi = 1e-6;             // minimum accepted improvement of Gamma
  int t_max = 100;              // iteration budget
  double grad_step0 = 1.0;      // first trial step of the gradient line search
  double backtrack_factor = 0.5;
  int backtrack_max = 30;
  double armijo = 0.0;          // sufficient-decrease constant of the line search, 0 = off
  StepPolicy policy = StepPolicy::Converge;
  int inner_max = 500;          // same-lambda steps per iteration under StepPolicy::Converge
  bool spectral_steps = true;   // Converge only: line search starts from the Barzilai-Borwein step

  void validate() const;
};

enum class Termination { LambdaZero, TMax, Failed };
std::string_view to_string(Termination t);

struct SolutionPath {
  Index q = 0;
  std::vector<PathEntry> entries;
  Termination terminated_by = Termination::TMax;
  std::string diagnostic;  // set when a numerical failure cut the path short
};

/// A single +-epsilon coordinate move and the objective value it reaches.
struct CoordinateMove {
  Index j = 0;
  double s = 0.0;
  double gamma = kInfinity;
};

/// phi + s e_j. S entries landing within epsilon * 1e-6 of zero become exactly zero.
ParamVector apply_move(const ParamVector& phi, Index j, double s, double epsilon);

/// Coordinate descent on (log theta, log sigma^2) with S = 0, started at
/// theta = var(y), sigma^2 = var(y) / 2.
CovParams fit_constant_cov(const Objective& obj, const FsegConfig& cfg);

/// phi^(0): S = 0, fitted covariance parameters, lambda = +inf.
PathEntry init_solution(const Objective& obj, Index q, const FsegConfig& cfg);

/// Best of the 2J moves phi +- epsilon e_j on Gamma(.; lambda). Ties go to the smaller j,
/// then to +epsilon.
CoordinateMove backward_search(const Objective& obj, const ParamVector& phi, double lambda,
                               const FsegConfig& cfg);

/// One support-limited gradient step with backtracking. Returns the first trial point that
/// lowers Gamma by at least xi. S entries that would change sign are set to zero instead.
std::optional<ParamVector> gradient_step(const Objective& obj, const ParamVector& phi,
                                         double lambda, const FsegConfig& cfg);

/// Repeated support-limited gradient steps at fixed lambda, each line search starting from
/// the Barzilai-Borwein step. Stops when a step no longer clears xi or after max_steps.
/// With fixed_support = false (lambda = 0 only) every coordinate moves and S entries may
/// change sign.
ParamVector descend_support(const Objective& obj, ParamVector phi, double lambda, const FsegConfig& cfg,
                            int max_steps, bool fixed_support = true);

/// Best +-epsilon move on L over the S block only. Same tie-break as backward_search.
CoordinateMove forward_step(const Objective& obj, const ParamVector& phi, const FsegConfig& cfg);

/// min{lambda_old, (L_old - L_new - xi) / (R_new - R_old)} clamped at 0; unchanged when R
/// did not grow.
double lambda_update(double lambda_old, double nll_old, double nll_new, double r_old, double r_new,
                     double xi);

/// Forward stagewise with embedded gradient descent steps. Entry 0 is the initial solution.
SolutionPath run_fseg(const Objective& obj, Index q, const FsegConfig& cfg);

/// Same, reusing covariance parameters already fitted at S = 0.
SolutionPath run_fseg(const Objective& obj, Index q, const FsegConfig& cfg,
                      const CovParams& initial_cov);

/// Rounding slack allowed when checking Gamma(t+1) <= Gamma(t) - xi.
double monotonicity_slack(double gamma_value);

}  // namespace spgp
