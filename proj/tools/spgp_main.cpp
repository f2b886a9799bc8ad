#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spgp/commands.hpp"
#include "spgp/errors.hpp"

namespace {

// Flag values; unset ones leave the config file (or the defaults) alone.
struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<long> q_max;
  std::optional<double> epsilon;
  std::optional<double> xi;
  std::optional<int> t_max;
  std::optional<std::string> kernel;
  std::optional<int> blocks;
  bool no_standardize = false;
  std::optional<std::string> policy;
  std::optional<int> inner_max;

  std::optional<std::string> data, model, train, test;
  std::optional<int> refit_steps;
  std::optional<std::vector<long>> grid_q, grid_p0;
  std::optional<std::vector<double>> grid_sigma2;
  bool full_grid = false;
  std::optional<int> replicates;
  std::optional<long> n, p;
  std::optional<int> instances;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON config file; flags override its values");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--out-dir", o.out_dir, "Output directory");
  cmd->add_option("--q-max", o.q_max, "Largest rank tried (default min(p, 5))");
  cmd->add_option("--epsilon", o.epsilon, "Coordinate step size");
  cmd->add_option("--xi", o.xi, "Minimum accepted improvement");
  cmd->add_option("--t-max", o.t_max, "Iterations per solution path");
  cmd->add_option("--kernel", o.kernel, "exponential | squared_exponential");
  cmd->add_option("--blocks", o.blocks, "Likelihood blocks K (0 = automatic)");
  cmd->add_flag("--no-standardize", o.no_standardize, "Use the inputs as given");
  cmd->add_option("--policy", o.policy, "converge | cascade | best_improvement");
  cmd->add_option("--inner-max", o.inner_max, "Descent steps per iteration (converge policy)");
}

spgp::RunConfig build_config(const Overrides& o) {
  spgp::RunConfig c;
  if (!o.config.empty()) c = spgp::apply_config_json(spgp::read_json_file(o.config), c);
  spgp::Json j = spgp::Json::object();
  if (o.seed) j["seed"] = *o.seed;
  if (o.out_dir) j["out_dir"] = *o.out_dir;
  if (o.q_max) j["q_max"] = *o.q_max;
  if (o.epsilon) j["epsilon"] = *o.epsilon;
  if (o.xi) j["xi"] = *o.xi;
  if (o.t_max) j["t_max"] = *o.t_max;
  if (o.kernel) j["kernel"] = *o.kernel;
  if (o.blocks) j["blocks"] = *o.blocks;
  if (o.no_standardize) j["standardize"] = false;
  if (o.policy) j["policy"] = *o.policy;
  if (o.inner_max) j["inner_max"] = *o.inner_max;
  if (o.data) j["data"] = *o.data;
  if (o.model) j["model"] = *o.model;
  if (o.train) j["train"] = *o.train;
  if (o.test) j["test"] = *o.test;
  if (o.refit_steps) j["refit_steps"] = *o.refit_steps;
  if (o.grid_q) j["grid"]["q"] = *o.grid_q;
  if (o.grid_p0) j["grid"]["p0"] = *o.grid_p0;
  if (o.grid_sigma2) j["grid"]["sigma2"] = *o.grid_sigma2;
  if (o.replicates) j["replicates"] = *o.replicates;
  if (o.n) j["n"] = *o.n;
  if (o.p) j["p"] = *o.p;
  if (o.instances) j["instances"] = *o.instances;
  c = spgp::apply_config_json(j, c);
  if (o.full_grid) spgp::use_full_grid(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse projection Gaussian process regression with variable selection"};
  app.require_subcommand(1);
  Overrides o;

  auto* fit = app.add_subcommand("fit", "Fit solution paths for q = 1..q_max and select a model");
  add_common(fit, o);
  fit->add_option("data,--data", o.data, "Dataset CSV with header x1,...,xp,y");

  auto* sim = app.add_subcommand("simulate", "Run the simulation study over a scenario grid");
  add_common(sim, o);
  sim->add_option("--grid-q", o.grid_q, "True ranks q");
  sim->add_option("--grid-p0", o.grid_p0, "Relevant input counts p0");
  sim->add_option("--grid-sigma2", o.grid_sigma2, "Noise variances");
  sim->add_flag("--full-grid", o.full_grid, "All 27 combinations of q, p0 and sigma^2");
  sim->add_option("--replicates", o.replicates, "Replicates per scenario");
  sim->add_option("--n", o.n, "Sample size per replicate");
  sim->add_option("--p", o.p, "Total inputs");

  auto* pred = app.add_subcommand("predict", "Score the reduced model and a dense full model on test data");
  add_common(pred, o);
  pred->add_option("--model", o.model, "model.json written by fit");
  pred->add_option("--train", o.train, "Training CSV");
  pred->add_option("--test", o.test, "Test CSV");
  pred->add_option("--refit-steps", o.refit_steps, "Gradient steps for each refit");

  auto* gc = app.add_subcommand("gradcheck", "Compare the support gradient with finite differences");
  add_common(gc, o);
  gc->add_option("--instances", o.instances, "Random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const spgp::RunConfig cfg = build_config(o);
    if (fit->parsed()) spgp::cmd_fit(cfg, std::cout);
    else if (sim->parsed()) spgp::cmd_simulate(cfg, std::cout);
    else if (pred->parsed()) spgp::cmd_predict(cfg, std::cout);
    else spgp::cmd_gradcheck(cfg, std::cout);
  } catch (const spgp::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const spgp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const spgp::IoError& e) {
    std::cerr << "i/o failure: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
