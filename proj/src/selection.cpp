#include "spgp/selection.hpp"

#include <algorithm>
#include <cmath>

#include <tbb/parallel_for.h>

#include "spgp/errors.hpp"

namespace spgp {

Index l0_norm(const ParamVector& phi) {
  Index count = 0;
  for (Index j = 0; j < phi.size(); ++j)
    if (phi[j] != 0.0) ++count;
  return count;
}

Index nonzero_columns(const Eigen::Ref<const Matrix>& s) {
  Index count = 0;
  for (Index m = 0; m < s.cols(); ++m)
    if ((s.col(m).array() != 0.0).any()) ++count;
  return count;
}

double bic(const PathEntry& entry, Index n) {
  return 2.0 * entry.nll + static_cast<double>(l0_norm(entry.phi)) * std::log(static_cast<double>(n));
}

double mbic(const PathEntry& entry, Index n, Index q) {
  return 2.0 * entry.nll + static_cast<double>(q * nonzero_columns(entry.phi.s_matrix())) *
                               std::log(static_cast<double>(n));
}

std::size_t best_bic_index(const SolutionPath& path, Index n) {
  if (path.entries.empty()) throw ValidationError("best_bic_index: empty path");
  std::size_t best = 0;
  double best_value = bic(path.entries[0], n);
  for (std::size_t i = 1; i < path.entries.size(); ++i) {
    const double v = bic(path.entries[i], n);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

Index default_q_max(Index p) { return std::min<Index>(p, 5); }

SelectionReport select_model(const Objective& obj, Index q_max, const FsegConfig& cfg) {
  cfg.validate();
  const Index p = obj.data().p();
  const Index n = obj.data().n();
  if (q_max < 1 || q_max > p) throw ValidationError("select_model: need 1 <= q_max <= p");

  const CovParams init_cov = fit_constant_cov(obj, cfg);

  std::vector<RankSummary> per_q(static_cast<std::size_t>(q_max));
  std::vector<SolutionPath> paths(static_cast<std::size_t>(q_max));
  tbb::parallel_for(Index{0}, q_max, [&](Index i) {
    auto& summary = per_q[static_cast<std::size_t>(i)];
    summary.q = i + 1;
    try {
      auto& path = paths[static_cast<std::size_t>(i)];
      path = run_fseg(obj, i + 1, cfg, init_cov);
      if (path.terminated_by == Termination::Failed) {
        summary.diagnostic = path.diagnostic;
        return;
      }
      summary.best_index = best_bic_index(path, n);
      const PathEntry& e = path.entries[summary.best_index];
      summary.best_t = e.t;
      summary.best_lambda = e.lambda;
      summary.bic = bic(e, n);
      summary.mbic = mbic(e, n, i + 1);
      summary.ok = true;
    } catch (const std::exception& ex) {
      summary.diagnostic = ex.what();
    }
  });

  const RankSummary* chosen = nullptr;
  for (const auto& s : per_q) {
    if (s.ok && (chosen == nullptr || s.mbic < chosen->mbic)) chosen = &s;
  }
  if (chosen == nullptr) {
    throw NumericalError("select_model: every rank failed; first error: " +
                         per_q.front().diagnostic);
  }
  PathEntry entry = paths[static_cast<std::size_t>(chosen->q - 1)].entries[chosen->best_index];
  const Index chosen_q = chosen->q;
  return SelectionReport{std::move(per_q), std::move(paths), chosen_q, std::move(entry)};
}

}  // namespace spgp
