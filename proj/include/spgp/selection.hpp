#pragma once

#include <string>
#include <vector>

#include "spgp/fseg.hpp"

namespace spgp {

/// Nonzero entries of the full parameter vector, covariance coordinates included.
Index l0_norm(const ParamVector& phi);

/// Number of columns of S with at least one nonzero entry.
Index nonzero_columns(const Eigen::Ref<const Matrix>& s);

/// 2 L + ||phi||_0 log N
double bic(const PathEntry& entry, Index n);

/// 2 L + q ||S||_{2,0} log N
double mbic(const PathEntry& entry, Index n, Index q);

/// Index of the BIC-minimizing entry; ties go to the earlier entry.
std::size_t best_bic_index(const SolutionPath& path, Index n);

struct RankSummary {
  Index q = 0;
  bool ok = false;
  std::string diagnostic;
  int best_t = 0;
  std::size_t best_index = 0;
  double best_lambda = kInfinity;
  double bic = kInfinity;
  double mbic = kInfinity;
};

struct SelectionReport {
  std::vector<RankSummary> per_q;
  std::vector<SolutionPath> paths;  // paths[i] belongs to per_q[i]
  Index chosen_q = 0;
  PathEntry chosen_entry;
};

/// Runs FSEG for q = 1..q_max, picks t_q by BIC within each path and q* by mBIC across
/// the per-q winners (ties toward smaller q).
SelectionReport select_model(const Objective& obj, Index q_max, const FsegConfig& cfg);

/// Default rank budget: min(p, 5).
Index default_q_max(Index p);

}  // namespace spgp
