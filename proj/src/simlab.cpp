#include "spgp/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <tbb/parallel_for.h>

#include "spgp/errors.hpp"
#include "spgp/kernel.hpp"
#include "spgp/likelihood.hpp"
#include "spgp/selection.hpp"

namespace spgp {

namespace {

using Rng = boost::random::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Scenario generate_once(const ScenarioConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  boost::random::uniform_01<double> unif;
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  boost::random::exponential_distribution<double> expo(1.0);

  Matrix x(cfg.n, cfg.p);
  for (Index i = 0; i < cfg.n; ++i)
    for (Index m = 0; m < cfg.p; ++m) x(i, m) = unif(rng);

  Matrix a(cfg.p0, cfg.q);
  for (Index i = 0; i < cfg.p0; ++i)
    for (Index k = 0; k < cfg.q; ++k) a(i, k) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix o = qr.householderQ() * Matrix::Identity(cfg.p0, cfg.p0);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < cfg.q; ++k)
    if (r(k, k) < 0.0) o.col(k) = -o.col(k);
  const Matrix o_q = o.topRows(cfg.q);

  Vector d(cfg.q);
  for (Index k = 0; k < cfg.q; ++k) d(k) = 1.0 / expo(rng);
  const Matrix s_q = d.asDiagonal() * o_q;

  std::vector<Index> perm(static_cast<std::size_t>(cfg.p));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = cfg.p - 1; i > 0; --i) {
    boost::random::uniform_int_distribution<Index> pick(0, i);
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
  }
  // Column m of the padded matrix lands at position perm[m].
  Matrix s = Matrix::Zero(cfg.q, cfg.p);
  std::vector<Index> relevant;
  for (Index m = 0; m < cfg.p0; ++m) {
    s.col(perm[static_cast<std::size_t>(m)]) = s_q.col(m);
    relevant.push_back(perm[static_cast<std::size_t>(m)]);
  }
  std::sort(relevant.begin(), relevant.end());

  const CovParams cov{std::log(cfg.theta), std::log(cfg.sigma2), KernelFamily::Exponential};
  Matrix m = cov_matrix(s, cov, x);
  m.diagonal().array() += cfg.sigma2;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError("generate_scenario: covariance not positive definite");
  Vector z(cfg.n);
  for (Index i = 0; i < cfg.n; ++i) z(i) = normal(rng);
  Vector y = llt.matrixL() * z;

  return Scenario{Dataset(std::move(x), std::move(y)),
                  GroundTruth{ProjectionMatrix(std::move(s)), std::move(relevant)}, seed};
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(q >= 1 && q <= p0 && p0 <= p)) throw ValidationError("scenario: need 1 <= q <= p0 <= p");
  if (!(sigma2 > 0.0)) throw ValidationError("scenario: sigma2 must be > 0");
  if (!(theta > 0.0)) throw ValidationError("scenario: theta must be > 0");
  if (n < 2) throw ValidationError("scenario: N must be >= 2");
  if (replicates < 1) throw ValidationError("scenario: replicates must be >= 1");
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  std::uint64_t seed = cfg.seed;
  for (int attempt = 0;; ++attempt) {
    try {
      return generate_once(cfg, seed);
    } catch (const NumericalError&) {
      if (attempt == 3) throw;
      seed = splitmix64(seed ^ 0x5eedULL);
    }
  }
}

std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t scenario_id, std::uint64_t replicate_id) {
  return splitmix64(splitmix64(splitmix64(base) ^ scenario_id) ^ replicate_id);
}

HitMiss hit_miss(const std::vector<Index>& truth, const std::vector<Index>& selected, Index p) {
  const auto in_range = [p](Index v) { return v >= 0 && v < p; };
  if (!std::all_of(truth.begin(), truth.end(), in_range) ||
      !std::all_of(selected.begin(), selected.end(), in_range)) {
    throw ValidationError("hit_miss: index out of range");
  }
  std::vector<Index> a = truth, a_hat = selected;
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(a_hat.begin(), a_hat.end());
  a_hat.erase(std::unique(a_hat.begin(), a_hat.end()), a_hat.end());
  const auto n_true = static_cast<Index>(a.size());
  if (n_true == 0 || n_true == p) throw ValidationError("hit_miss: need 0 < |A| < p");

  std::vector<Index> missed, extra;
  std::set_difference(a.begin(), a.end(), a_hat.begin(), a_hat.end(), std::back_inserter(missed));
  std::set_difference(a_hat.begin(), a_hat.end(), a.begin(), a.end(), std::back_inserter(extra));
  return {static_cast<double>(missed.size()) / static_cast<double>(n_true),
          static_cast<double>(extra.size()) / static_cast<double>(p - n_true)};
}

std::vector<Index> selected_variables(const Eigen::Ref<const Matrix>& s) {
  std::vector<Index> out;
  for (Index m = 0; m < s.cols(); ++m)
    if ((s.col(m).array() != 0.0).any()) out.push_back(m);
  return out;
}

double s_recovery_error(const Eigen::Ref<const Matrix>& s_hat, const Eigen::Ref<const Matrix>& s_true) {
  if (s_hat.rows() != s_true.rows() || s_hat.cols() != s_true.cols()) {
    throw DimensionError("s_recovery_error: shapes differ");
  }
  const Index q = s_true.rows();
  if (q > 8) throw ValidationError("s_recovery_error: exhaustive alignment supports q <= 8");
  // cost(a, b): best sign for matching row a of S_hat to row b of S_true.
  Matrix cost(q, q);
  for (Index a = 0; a < q; ++a) {
    for (Index b = 0; b < q; ++b) {
      cost(a, b) = std::min((s_hat.row(a) - s_true.row(b)).squaredNorm(),
                            (s_hat.row(a) + s_true.row(b)).squaredNorm());
    }
  }
  std::vector<Index> perm(static_cast<std::size_t>(q));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = kInfinity;
  do {
    double total = 0.0;
    for (Index b = 0; b < q; ++b) total += cost(perm[static_cast<std::size_t>(b)], b);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(q * s_true.cols());
}

double s_gram_error(const Eigen::Ref<const Matrix>& s_hat, const Eigen::Ref<const Matrix>& s_true) {
  if (s_hat.cols() != s_true.cols()) throw DimensionError("s_gram_error: column counts differ");
  const double p = static_cast<double>(s_true.cols());
  return (s_hat.transpose() * s_hat - s_true.transpose() * s_true).squaredNorm() / (p * p);
}

double padded_s_recovery_error(const Eigen::Ref<const Matrix>& s_hat,
                               const Eigen::Ref<const Matrix>& s_true) {
  if (s_hat.cols() != s_true.cols()) throw DimensionError("s_recovery_error: column counts differ");
  const Index q = std::max(s_hat.rows(), s_true.rows());
  Matrix a = Matrix::Zero(q, s_hat.cols());
  Matrix b = Matrix::Zero(q, s_true.cols());
  a.topRows(s_hat.rows()) = s_hat;
  b.topRows(s_true.rows()) = s_true;
  return s_recovery_error(a, b);
}

MeanSd mean_sd(const std::vector<double>& values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

void aggregate(ScenarioSummary& s) {
  std::vector<double> q_hat, fnr, fpr, s_err;
  int hits = 0;
  for (const auto& r : s.runs) {
    if (!r.ok) continue;
    q_hat.push_back(static_cast<double>(r.q_hat));
    fnr.push_back(r.fnr);
    fpr.push_back(r.fpr);
    s_err.push_back(r.s_error);
    if (r.q_hat == s.config.q) ++hits;
  }
  s.successes = static_cast<int>(q_hat.size());
  s.q_hat = mean_sd(q_hat);
  s.fnr = mean_sd(fnr);
  s.fpr = mean_sd(fpr);
  s.s_error = mean_sd(s_err);
  s.rank_hit_rate = s.successes > 0 ? static_cast<double>(hits) / s.successes : 0.0;
}

StudyReport run_study(const std::vector<ScenarioConfig>& cfgs, const FsegConfig& fseg_cfg,
                      Index q_max) {
  fseg_cfg.validate();
  if (q_max < 1) throw ValidationError("run_study: q_max must be >= 1");
  StudyReport report;
  std::vector<std::pair<std::size_t, int>> jobs;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    cfgs[i].validate();
    ScenarioSummary summary;
    summary.config = cfgs[i];
    summary.runs.resize(static_cast<std::size_t>(cfgs[i].replicates));
    report.scenarios.push_back(std::move(summary));
    for (int r = 0; r < cfgs[i].replicates; ++r) jobs.emplace_back(i, r);
  }

  tbb::parallel_for(std::size_t{0}, jobs.size(), [&](std::size_t k) {
    const auto [i, rep] = jobs[k];
    ScenarioConfig cfg = cfgs[i];
    cfg.seed = replicate_seed(cfgs[i].seed, i, static_cast<std::uint64_t>(rep));
    ReplicateResult& out = report.scenarios[i].runs[static_cast<std::size_t>(rep)];
    out.replicate = rep;
    out.seed = cfg.seed;
    try {
      const Scenario sc = generate_scenario(cfg);
      out.relevant = sc.truth.relevant;
      const Objective obj(sc.data);
      const auto sel = select_model(obj, std::min(q_max, cfg.p), fseg_cfg);
      const Matrix s_hat = sel.chosen_entry.phi.s_matrix();
      out.q_hat = sel.chosen_q;
      out.lambda = sel.chosen_entry.lambda;
      out.selected = selected_variables(s_hat);
      const HitMiss hm = hit_miss(out.relevant, out.selected, cfg.p);
      out.fnr = hm.fnr;
      out.fpr = hm.fpr;
      out.s_error = padded_s_recovery_error(s_hat, sc.truth.s_true.matrix());
      out.s_gram_error = s_gram_error(s_hat, sc.truth.s_true.matrix());
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  for (auto& s : report.scenarios) aggregate(s);
  return report;
}

}  // namespace spgp
