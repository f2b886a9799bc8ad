#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spgp/fseg.hpp"
#include "spgp/report.hpp"

namespace spgp {

struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::optional<Index> q_max;  // unset: min(p, 5)
  FsegConfig fseg;
  KernelFamily kernel = KernelFamily::Exponential;
  int blocks = 0;  // 0: one block up to N = 2000, else blocks of about 400 rows
  bool standardize = true;

  // fit
  std::string data;
  // predict
  std::string model;
  std::string train;
  std::string test;
  int refit_steps = 2000;
  // simulate
  std::vector<Index> grid_q{1};
  std::vector<Index> grid_p0{3};
  std::vector<double> grid_sigma2{0.01};
  Index p = 10;
  Index n = 200;
  double theta = 1.0;
  int replicates = 25;
  // gradcheck
  int instances = 10;
  Index check_n = 30;
  Index check_p = 4;
  Index check_q = 2;

  void validate() const;
};

/// Overrides fields of `base` with the keys present in a JSON config object. Unknown keys
/// are rejected.
RunConfig apply_config_json(const Json& j, RunConfig base);

/// Block count used for a dataset of n rows.
int resolve_blocks(int requested, Index n);

/// q = 1..3 x p0 = 3, 5, 7 x sigma^2 = 0.01, 0.09, 0.25.
void use_full_grid(RunConfig& cfg);

std::vector<ScenarioConfig> scenario_grid(const RunConfig& cfg);

/// Each command writes its files into cfg.out_dir and removes them again on failure.
void cmd_fit(const RunConfig& cfg, std::ostream& log);
void cmd_simulate(const RunConfig& cfg, std::ostream& log);
void cmd_predict(const RunConfig& cfg, std::ostream& log);

struct GradCheckResult {
  int instances = 0;
  int coordinates = 0;  // compared coordinates
  int skipped = 0;      // coordinates skipped for near-coincident projected pairs
  double max_rel_error = 0.0;
};

/// Support gradient against central differences of Gamma (h = 1e-6) on random instances.
/// Relative error is |g - fd| / max(1, |fd|).
GradCheckResult gradient_check(std::uint64_t seed, int instances, Index n, Index p, Index q,
                               KernelFamily family);

void cmd_gradcheck(const RunConfig& cfg, std::ostream& log);

}  // namespace spgp
