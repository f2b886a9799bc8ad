#include "spgp/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <ostream>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "spgp/dataset_io.hpp"
#include "spgp/errors.hpp"
#include "spgp/kernel.hpp"
#include "spgp/likelihood.hpp"
#include "spgp/predict.hpp"
#include "spgp/selection.hpp"
#include "spgp/simlab.hpp"

namespace spgp {

namespace {

namespace fs = std::filesystem;

constexpr Index kAutoBlockThreshold = 2000;
constexpr Index kAutoBlockSize = 400;

// Files written by one command; removed again unless commit() is reached.
class OutputSet {
public:
  explicit OutputSet(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory '" + dir_ + "'");
  }
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    if (committed_) return;
    for (const auto& f : written_) {
      std::error_code ec;
      fs::remove(f, ec);
    }
  }

  std::string write(const std::string& name, const std::string& content) {
    const std::string path = (fs::path(dir_) / name).string();
    write_file_atomic(path, content);
    written_.push_back(path);
    return path;
  }
  void commit() { committed_ = true; }

private:
  std::string dir_;
  std::vector<std::string> written_;
  bool committed_ = false;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

template <typename T>
std::vector<T> list_of(const Json& j, const char* key) {
  if (!j.is_array()) throw ValidationError(std::string("config: '") + key + "' must be an array");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(v.get<T>());
  return out;
}

StepPolicy policy_from_string(const std::string& s) {
  if (s == "converge") return StepPolicy::Converge;
  if (s == "cascade") return StepPolicy::Cascade;
  if (s == "best_improvement") return StepPolicy::BestImprovement;
  throw ValidationError("config: unknown policy '" + s + "'");
}

Objective make_objective(const Dataset& data, const RunConfig& cfg) {
  const int k = resolve_blocks(cfg.blocks, data.n());
  std::optional<BlockPartition> part;
  if (k > 1) part = make_block_partition(data.n(), k, cfg.seed);
  return Objective(data, cfg.kernel, 1.0, 1e-8, std::move(part));
}

Index count_inputs(const Eigen::Ref<const Matrix>& s) { return nonzero_columns(s); }

}  // namespace

void RunConfig::validate() const {
  fseg.validate();
  if (q_max && *q_max < 1) throw ValidationError("q_max must be >= 1");
  if (blocks < 0) throw ValidationError("blocks must be >= 0");
  if (refit_steps < 0) throw ValidationError("refit_steps must be >= 0");
  if (grid_q.empty() || grid_p0.empty() || grid_sigma2.empty()) throw ValidationError("grid lists must be non-empty");
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  if (instances < 1) throw ValidationError("instances must be >= 1");
  if (check_n < 2 || check_p < 1 || check_q < 1 || check_q > check_p) {
    throw ValidationError("gradcheck sizes need n >= 2 and 1 <= q <= p");
  }
}

RunConfig apply_config_json(const Json& j, RunConfig c) {
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "q_max") c.q_max = v.get<Index>();
      else if (key == "epsilon") c.fseg.epsilon = v.get<double>();
      else if (key == "xi") c.fseg.xi = v.get<double>();
      else if (key == "t_max") c.fseg.t_max = v.get<int>();
      else if (key == "grad_step0") c.fseg.grad_step0 = v.get<double>();
      else if (key == "backtrack_factor") c.fseg.backtrack_factor = v.get<double>();
      else if (key == "backtrack_max") c.fseg.backtrack_max = v.get<int>();
      else if (key == "policy") c.fseg.policy = policy_from_string(v.get<std::string>());
      else if (key == "inner_max") c.fseg.inner_max = v.get<int>();
      else if (key == "spectral_steps") c.fseg.spectral_steps = v.get<bool>();
      else if (key == "kernel") c.kernel = kernel_family_from_string(v.get<std::string>());
      else if (key == "blocks") c.blocks = v.get<int>();
      else if (key == "standardize") c.standardize = v.get<bool>();
      else if (key == "data") c.data = v.get<std::string>();
      else if (key == "model") c.model = v.get<std::string>();
      else if (key == "train") c.train = v.get<std::string>();
      else if (key == "test") c.test = v.get<std::string>();
      else if (key == "refit_steps") c.refit_steps = v.get<int>();
      else if (key == "grid") {
        if (!v.is_object()) throw ValidationError("config: 'grid' must be an object");
        for (const auto& [gk, gv] : v.items()) {
          if (gk == "q") c.grid_q = list_of<Index>(gv, "grid.q");
          else if (gk == "p0") c.grid_p0 = list_of<Index>(gv, "grid.p0");
          else if (gk == "sigma2") c.grid_sigma2 = list_of<double>(gv, "grid.sigma2");
          else throw ValidationError("config: unknown key 'grid." + gk + "'");
        }
      }
      else if (key == "p") c.p = v.get<Index>();
      else if (key == "n") c.n = v.get<Index>();
      else if (key == "theta") c.theta = v.get<double>();
      else if (key == "replicates") c.replicates = v.get<int>();
      else if (key == "instances") c.instances = v.get<int>();
      else if (key == "check_n") c.check_n = v.get<Index>();
      else if (key == "check_p") c.check_p = v.get<Index>();
      else if (key == "check_q") c.check_q = v.get<Index>();
      else throw ValidationError("config: unknown key '" + key + "'");
    }
  } catch (const Json::type_error& e) {
    throw ValidationError(std::string("config: wrong value type: ") + e.what());
  }
  return c;
}

int resolve_blocks(int requested, Index n) {
  if (requested > 0) return requested;
  if (n <= kAutoBlockThreshold) return 1;
  return static_cast<int>(std::max<Index>(2, (n + kAutoBlockSize / 2) / kAutoBlockSize));
}

void use_full_grid(RunConfig& cfg) {
  cfg.grid_q = {1, 2, 3};
  cfg.grid_p0 = {3, 5, 7};
  cfg.grid_sigma2 = {0.01, 0.09, 0.25};
}

std::vector<ScenarioConfig> scenario_grid(const RunConfig& cfg) {
  std::vector<ScenarioConfig> out;
  for (const Index p0 : cfg.grid_p0) {
    for (const double s2 : cfg.grid_sigma2) {
      for (const Index q : cfg.grid_q) {
        ScenarioConfig sc;
        sc.p = cfg.p;
        sc.p0 = p0;
        sc.q = q;
        sc.sigma2 = s2;
        sc.theta = cfg.theta;
        sc.n = cfg.n;
        sc.seed = cfg.seed;
        sc.replicates = cfg.replicates;
        sc.validate();
        out.push_back(sc);
      }
    }
  }
  return out;
}

void cmd_fit(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.data.empty()) throw ValidationError("fit: no dataset given");
  const LoadedDataset loaded = read_csv_dataset(cfg.data, cfg.standardize);
  const Objective obj = make_objective(loaded.data, cfg);
  const Index q_max = std::min(cfg.q_max.value_or(default_q_max(loaded.data.p())), loaded.data.p());
  OutputSet out(cfg.out_dir);

  log << "fit: N=" << loaded.data.n() << " p=" << loaded.data.p() << " q_max=" << q_max << '\n';
  const SelectionReport sel = select_model(obj, q_max, cfg.fseg);
  out.write("path.json", dump(path_report(sel, obj, cfg.fseg)));
  out.write("model.json", dump(model_report(sel, obj, loaded.transform, loaded.columns)));
  out.write("path_plot.csv", path_plot_csv(sel, loaded.data.n()));
  out.commit();

  log << "fit: q*=" << sel.chosen_q << " lambda*=" << format_double(sel.chosen_entry.lambda) << " selected=[";
  const Matrix s = sel.chosen_entry.phi.s_matrix();
  bool first = true;
  for (Index m = 0; m < s.cols(); ++m) {
    if (!(s.col(m).array() != 0.0).any()) continue;
    log << (first ? "" : ",") << loaded.columns[static_cast<std::size_t>(m)];
    first = false;
  }
  log << "]\n";
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto grid = scenario_grid(cfg);
  const Index q_max = std::min(cfg.q_max.value_or(default_q_max(cfg.p)), cfg.p);
  OutputSet out(cfg.out_dir);
  log << "simulate: " << grid.size() << " scenario(s) x " << cfg.replicates << " replicate(s)\n";
  const StudyReport study = run_study(grid, cfg.fseg, q_max);
  out.write("study.json", dump(study_report(study, cfg.fseg, q_max, cfg.seed)));
  out.write("study.csv", study_csv(study));
  out.commit();
  for (const auto& s : study.scenarios) {
    log << "  q=" << s.config.q << " p0=" << s.config.p0 << " sigma2=" << format_double(s.config.sigma2)
        << " ok=" << s.successes << " fnr=" << format_double(s.fnr.mean) << " fpr=" << format_double(s.fpr.mean)
        << " q_hit=" << format_double(s.rank_hit_rate) << '\n';
  }
}

void cmd_predict(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.model.empty() || cfg.train.empty() || cfg.test.empty()) {
    throw ValidationError("predict: model, train and test files are required");
  }
  const ModelFile model = model_from_json(read_json_file(cfg.model));
  const LoadedDataset train = read_csv_dataset(cfg.train, false);
  const LoadedDataset test = read_csv_dataset(cfg.test, false);
  const Index p = model.s.p();
  if (train.data.p() != p || test.data.p() != p) {
    throw DimensionError("predict: datasets must have " + std::to_string(p) + " inputs like the model");
  }
  const Dataset train_data(model.transform.apply(train.data.x()), train.data.y());
  const Matrix x_test = model.transform.apply(test.data.x());
  const Objective obj(train_data, model.cov.family);
  OutputSet out(cfg.out_dir);

  const auto score = [&](const std::string& name, const ParamVector& phi) {
    const CovParams cov{phi[phi.log_theta_index()], phi[phi.log_sigma2_index()], model.cov.family};
    const ProjectionMatrix s(phi.s_matrix());
    const Prediction pred = posterior(s, cov, train_data.x(), train_data.y(), x_test);
    return ScoreRow{name, s.q(), count_inputs(s.matrix()), mse(pred, test.data.y()), nlpd(pred, test.data.y()),
                    nll(obj, s.matrix(), cov)};
  };

  const ParamVector full = fit_full_model(obj, model.s.q(), cfg.fseg, cfg.seed, cfg.refit_steps);
  const ParamVector reduced =
      refit_likelihood(obj, ParamVector(model.s, model.cov), cfg.fseg, cfg.refit_steps);

  const std::vector<ScoreRow> rows{score("full", full), score("reduced", reduced)};
  out.write("scores.csv", scores_csv(rows));
  out.write("scores.json", dump(scores_json(rows, train.data.n(), test.data.n())));
  out.commit();
  for (const auto& r : rows) {
    log << "predict: " << r.model << " inputs=" << r.n_inputs << " mse=" << format_double(r.mse)
        << " nlpd=" << format_double(r.nlpd) << '\n';
  }
}

GradCheckResult gradient_check(std::uint64_t seed, int instances, Index n, Index p, Index q,
                               KernelFamily family) {
  if (instances < 1 || n < 2 || q < 1 || q > p) throw ValidationError("gradient_check: bad sizes");
  constexpr double h = 1e-6;
  constexpr double min_pair_distance = 1e-10;
  boost::random::mt19937_64 rng(seed);
  boost::random::uniform_01<double> unif;
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  boost::random::uniform_real_distribution<double> log_theta(-1.0, 1.0), log_sigma2(-3.0, 0.0),
      lambda_dist(0.0, 2.0);

  GradCheckResult res;
  for (int inst = 0; inst < instances; ++inst) {
    Matrix x(n, p);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      for (Index m = 0; m < p; ++m) x(i, m) = unif(rng);
      y(i) = normal(rng);
    }
    Matrix s(q, p);
    for (Index l = 0; l < q; ++l)
      for (Index m = 0; m < p; ++m) s(l, m) = unif(rng) < 0.25 ? 0.0 : normal(rng);
    if (s.isZero(0.0)) s(0, 0) = 1.0;
    const CovParams cov{log_theta(rng), log_sigma2(rng), family};
    const double lambda = lambda_dist(rng);
    const Objective obj(Dataset(x, y), family);
    const ParamVector phi(ProjectionMatrix(s), cov);

    const Matrix d = proj_distance_matrix(s, x, x);
    double min_d = kInfinity;
    for (Index i = 0; i < n; ++i)
      for (Index k = i + 1; k < n; ++k) min_d = std::min(min_d, d(i, k));

    const Vector g = support_gradient(obj, phi, lambda);
    for (const Index j : support(phi)) {
      if (phi.is_s_coordinate(j) && min_d < min_pair_distance) {
        ++res.skipped;
        continue;
      }
      ParamVector up = phi, down = phi;
      up[j] += h;
      down[j] -= h;
      const double fd = (gamma(obj, up, lambda) - gamma(obj, down, lambda)) / (2.0 * h);
      res.max_rel_error = std::max(res.max_rel_error, std::abs(g(j) - fd) / std::max(1.0, std::abs(fd)));
      ++res.coordinates;
    }
    ++res.instances;
  }
  return res;
}

void cmd_gradcheck(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const GradCheckResult r =
      gradient_check(cfg.seed, cfg.instances, cfg.check_n, cfg.check_p, cfg.check_q, cfg.kernel);
  log << "gradcheck: instances=" << r.instances << " coordinates=" << r.coordinates << " skipped=" << r.skipped
      << " max_rel_error=" << format_double(r.max_rel_error) << '\n';
  if (!(r.max_rel_error <= 1e-4)) throw NumericalError("gradcheck: relative error above 1e-4");
}

}  // namespace spgp
