#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spgp/core.hpp"
#include "spgp/fseg.hpp"

namespace spgp {

struct ScenarioConfig {
  Index p = 10;
  Index p0 = 3;
  Index q = 1;
  double sigma2 = 0.01;
  double theta = 1.0;
  Index n = 200;
  std::uint64_t seed = 1;
  int replicates = 25;

  void validate() const;
};

struct GroundTruth {
  ProjectionMatrix s_true;
  std::vector<Index> relevant;  // ascending column indices of the p0 relevant inputs
};

struct Scenario {
  Dataset data;
  GroundTruth truth;
  std::uint64_t seed_used = 0;  // differs from the config seed only after a retry
};

/// Uniform inputs, a random sparse projection built from the orthonormal factor of a QR
/// decomposition, and responses drawn from the exponential-kernel GP plus noise.
Scenario generate_scenario(const ScenarioConfig& cfg);

/// Independent stream seed for one replicate of one scenario.
std::uint64_t replicate_seed(std::uint64_t base, std::uint64_t scenario_id, std::uint64_t replicate_id);

struct HitMiss {
  double fnr = 0.0;
  double fpr = 0.0;
};

/// FNR = |A - A_hat| / |A|, FPR = |A_hat - A| / (p - |A|).
HitMiss hit_miss(const std::vector<Index>& truth, const std::vector<Index>& selected, Index p);

/// Columns of S with any nonzero entry.
std::vector<Index> selected_variables(const Eigen::Ref<const Matrix>& s);

/// min over row permutations and row sign flips of ||aligned(S_hat) - S_true||_F^2 / (q p).
double s_recovery_error(const Eigen::Ref<const Matrix>& s_hat, const Eigen::Ref<const Matrix>& s_true);

/// ||S_hat' S_hat - S_true' S_true||_F^2 / p^2. Needs equal column counts only.
double s_gram_error(const Eigen::Ref<const Matrix>& s_hat, const Eigen::Ref<const Matrix>& s_true);

/// Appends zero rows to the shorter matrix before calling s_recovery_error.
double padded_s_recovery_error(const Eigen::Ref<const Matrix>& s_hat,
                               const Eigen::Ref<const Matrix>& s_true);

struct ReplicateResult {
  int replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  Index q_hat = 0;
  double lambda = kInfinity;
  double fnr = 0.0;
  double fpr = 0.0;
  double s_error = 0.0;
  double s_gram_error = 0.0;
  std::vector<Index> relevant;
  std::vector<Index> selected;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

/// Sample mean and standard deviation (n - 1 denominator; 0 for a single value).
MeanSd mean_sd(const std::vector<double>& values);

struct ScenarioSummary {
  ScenarioConfig config;
  std::vector<ReplicateResult> runs;
  int successes = 0;
  MeanSd q_hat;
  MeanSd fnr;
  MeanSd fpr;
  MeanSd s_error;
  double rank_hit_rate = 0.0;  // fraction of successful runs with q_hat == q
};

struct StudyReport {
  std::vector<ScenarioSummary> scenarios;
};

/// Generates every replicate of every scenario, runs model selection and scores it.
/// Replicate r of scenario i uses replicate_seed(cfgs[i].seed, i, r).
StudyReport run_study(const std::vector<ScenarioConfig>& cfgs, const FsegConfig& fseg_cfg,
                      Index q_max);

/// Fills the summary statistics of `s` from its runs.
void aggregate(ScenarioSummary& s);

}  // namespace spgp
