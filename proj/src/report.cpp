#include "spgp/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spgp/errors.hpp"

namespace spgp {

namespace {

Json matrix_json(const Eigen::Ref<const Matrix>& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(json_number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_json(const Eigen::Ref<const Vector>& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(json_number(v(i)));
  return out;
}

Json index_json(const std::vector<Index>& v) {
  Json out = Json::array();
  for (const Index i : v) out.push_back(i);
  return out;
}

Json mean_sd_json(const MeanSd& m) { return Json{{"mean", json_number(m.mean)}, {"sd", json_number(m.sd)}}; }

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

Matrix matrix_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ValidationError(std::string("model file: '") + what + "' must be a non-empty matrix");
  }
  const auto rows = static_cast<Index>(j.size());
  const auto cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ValidationError(std::string("model file: '") + what + "' rows differ in length");
    }
    for (Index k = 0; k < cols; ++k) m(i, k) = number_from_json(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

Vector vector_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string("model file: '") + what + "' must be an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number_from_json(j[i]);
  return v;
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(std::string("model file: missing '") + key + "'");
  return j.at(key);
}

}  // namespace

Json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ValidationError("expected a number, got " + j.dump());
}

Json fseg_config_json(const FsegConfig& cfg) {
  std::string policy = "converge";
  if (cfg.policy == StepPolicy::Cascade) policy = "cascade";
  if (cfg.policy == StepPolicy::BestImprovement) policy = "best_improvement";
  return Json{{"epsilon", cfg.epsilon},
              {"xi", cfg.xi},
              {"t_max", cfg.t_max},
              {"grad_step0", cfg.grad_step0},
              {"backtrack_factor", cfg.backtrack_factor},
              {"backtrack_max", cfg.backtrack_max},
              {"policy", policy},
              {"inner_max", cfg.inner_max},
              {"spectral_steps", cfg.spectral_steps}};
}

Json path_report(const SelectionReport& sel, const Objective& obj, const FsegConfig& cfg) {
  const Index n = obj.data().n();
  Json paths = Json::array();
  for (std::size_t i = 0; i < sel.paths.size(); ++i) {
    const SolutionPath& path = sel.paths[i];
    const RankSummary& rs = sel.per_q[i];
    Json entries = Json::array();
    for (const PathEntry& e : path.entries) {
      entries.push_back(Json{{"t", e.t},
                             {"step_kind", std::string(to_string(e.step_kind))},
                             {"lambda", json_number(e.lambda)},
                             {"gamma", json_number(e.gamma)},
                             {"nll", json_number(e.nll)},
                             {"penalty", json_number(penalty(e.phi, obj.penalty_exponent()))},
                             {"bic", json_number(bic(e, n))},
                             {"mbic", json_number(mbic(e, n, path.q))},
                             {"l0", l0_norm(e.phi)},
                             {"log_theta", json_number(e.phi[e.phi.log_theta_index()])},
                             {"log_sigma2", json_number(e.phi[e.phi.log_sigma2_index()])},
                             {"s", matrix_json(e.phi.s_matrix())}});
    }
    paths.push_back(Json{{"q", path.q},
                         {"ok", rs.ok},
                         {"terminated_by", std::string(to_string(path.terminated_by))},
                         {"diagnostic", path.diagnostic.empty() ? rs.diagnostic : path.diagnostic},
                         {"best_t", rs.best_t},
                         {"best_index", rs.best_index},
                         {"entries", std::move(entries)}});
  }
  return Json{{"format", "spgp.path"},
              {"version", 1},
              {"n", n},
              {"p", obj.data().p()},
              {"kernel", std::string(to_string(obj.family()))},
              {"penalty_exponent", obj.penalty_exponent()},
              {"blocks", obj.partition() ? obj.partition()->k : 1},
              {"fseg", fseg_config_json(cfg)},
              {"chosen_q", sel.chosen_q},
              {"paths", std::move(paths)}};
}

Json model_report(const SelectionReport& sel, const Objective& obj, const Standardization& transform,
                  const std::vector<std::string>& columns) {
  const PathEntry& e = sel.chosen_entry;
  const Index n = obj.data().n();
  const Matrix s = e.phi.s_matrix();
  std::vector<Index> selected;
  Json names = Json::array();
  for (Index m = 0; m < s.cols(); ++m) {
    if ((s.col(m).array() != 0.0).any()) {
      selected.push_back(m);
      names.push_back(m < static_cast<Index>(columns.size()) ? columns[static_cast<std::size_t>(m)]
                                                             : "x" + std::to_string(m + 1));
    }
  }
  const RankSummary* rs = nullptr;
  for (const auto& r : sel.per_q)
    if (r.q == sel.chosen_q) rs = &r;
  return Json{{"format", "spgp.model"},
              {"version", 1},
              {"n", n},
              {"p", obj.data().p()},
              {"kernel", std::string(to_string(obj.family()))},
              {"q", sel.chosen_q},
              {"t", e.t},
              {"lambda", json_number(e.lambda)},
              {"theta", json_number(std::exp(e.phi[e.phi.log_theta_index()]))},
              {"sigma2", json_number(std::exp(e.phi[e.phi.log_sigma2_index()]))},
              {"nll", json_number(e.nll)},
              {"bic", json_number(rs ? rs->bic : bic(e, n))},
              {"mbic", json_number(rs ? rs->mbic : mbic(e, n, sel.chosen_q))},
              {"s", matrix_json(s)},
              {"selected", index_json(selected)},
              {"selected_columns", std::move(names)},
              {"standardization", Json{{"applied", transform.applied},
                                       {"mean", vector_json(transform.mean)},
                                       {"scale", vector_json(transform.scale)}}}};
}

std::string path_plot_csv(const SelectionReport& sel, Index n) {
  std::ostringstream out;
  Index p = 0;
  if (!sel.paths.empty() && !sel.paths.front().entries.empty()) p = sel.paths.front().entries.front().phi.p();
  out << "q,t,step_kind,lambda,gamma,nll,bic,row";
  for (Index m = 0; m < p; ++m) out << ",s" << (m + 1);
  out << '\n';
  for (const SolutionPath& path : sel.paths) {
    for (const PathEntry& e : path.entries) {
      const Matrix s = e.phi.s_matrix();
      for (Index l = 0; l < s.rows(); ++l) {
        out << path.q << ',' << e.t << ',' << to_string(e.step_kind) << ',' << csv_number(e.lambda)
            << ',' << csv_number(e.gamma) << ',' << csv_number(e.nll) << ',' << csv_number(bic(e, n))
            << ',' << (l + 1);
        for (Index m = 0; m < s.cols(); ++m) out << ',' << csv_number(s(l, m));
        out << '\n';
      }
    }
  }
  return out.str();
}

Json study_report(const StudyReport& study, const FsegConfig& cfg, Index q_max, std::uint64_t seed) {
  Json scenarios = Json::array();
  for (std::size_t i = 0; i < study.scenarios.size(); ++i) {
    const ScenarioSummary& s = study.scenarios[i];
    Json runs = Json::array();
    for (const ReplicateResult& r : s.runs) {
      Json run{{"replicate", r.replicate}, {"seed", r.seed}, {"ok", r.ok}};
      if (r.ok) {
        run["q_hat"] = r.q_hat;
        run["lambda"] = json_number(r.lambda);
        run["fnr"] = json_number(r.fnr);
        run["fpr"] = json_number(r.fpr);
        run["s_error"] = json_number(r.s_error);
        run["s_gram_error"] = json_number(r.s_gram_error);
        run["relevant"] = index_json(r.relevant);
        run["selected"] = index_json(r.selected);
      } else {
        run["error"] = r.error;
      }
      runs.push_back(std::move(run));
    }
    scenarios.push_back(Json{{"scenario", i},
                             {"q", s.config.q},
                             {"p0", s.config.p0},
                             {"sigma2", s.config.sigma2},
                             {"p", s.config.p},
                             {"n", s.config.n},
                             {"theta", s.config.theta},
                             {"seed", s.config.seed},
                             {"replicates", s.config.replicates},
                             {"successes", s.successes},
                             {"rank_hit_rate", json_number(s.rank_hit_rate)},
                             {"q_hat", mean_sd_json(s.q_hat)},
                             {"fnr", mean_sd_json(s.fnr)},
                             {"fpr", mean_sd_json(s.fpr)},
                             {"s_error", mean_sd_json(s.s_error)},
                             {"runs", std::move(runs)}});
  }
  return Json{{"format", "spgp.study"},
              {"version", 1},
              {"seed", seed},
              {"q_max", q_max},
              {"fseg", fseg_config_json(cfg)},
              {"scenarios", std::move(scenarios)}};
}

std::string study_csv(const StudyReport& study) {
  std::ostringstream out;
  out << "scenario,q,p0,sigma2,p,n,replicates,successes,q_hat_mean,q_hat_sd,rank_hit_rate,"
         "fnr_mean,fnr_sd,fpr_mean,fpr_sd,s_error_mean,s_error_sd\n";
  for (std::size_t i = 0; i < study.scenarios.size(); ++i) {
    const ScenarioSummary& s = study.scenarios[i];
    out << i << ',' << s.config.q << ',' << s.config.p0 << ',' << csv_number(s.config.sigma2) << ','
        << s.config.p << ',' << s.config.n << ',' << s.config.replicates << ',' << s.successes << ','
        << csv_number(s.q_hat.mean) << ',' << csv_number(s.q_hat.sd) << ',' << csv_number(s.rank_hit_rate)
        << ',' << csv_number(s.fnr.mean) << ',' << csv_number(s.fnr.sd) << ',' << csv_number(s.fpr.mean)
        << ',' << csv_number(s.fpr.sd) << ',' << csv_number(s.s_error.mean) << ','
        << csv_number(s.s_error.sd) << '\n';
  }
  return out.str();
}

ModelFile model_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", "") != "spgp.model") {
    throw ValidationError("model file: not an spgp.model document");
  }
  Matrix s = matrix_from_json(require(j, "s"), "s");
  const double theta = number_from_json(require(j, "theta"));
  const double sigma2 = number_from_json(require(j, "sigma2"));
  if (!(theta > 0.0) || !(sigma2 > 0.0)) throw ValidationError("model file: theta and sigma2 must be > 0");
  const auto family = kernel_family_from_string(require(j, "kernel").get<std::string>());
  const Json& st = require(j, "standardization");
  Standardization t{require(st, "applied").get<bool>(), vector_from_json(require(st, "mean"), "mean"),
                    vector_from_json(require(st, "scale"), "scale")};
  if (t.mean.size() != s.cols() || t.scale.size() != s.cols()) {
    throw DimensionError("model file: standardization width does not match S");
  }
  std::vector<Index> selected;
  for (const auto& v : require(j, "selected")) selected.push_back(v.get<Index>());
  return ModelFile{ProjectionMatrix(std::move(s)), CovParams{std::log(theta), std::log(sigma2), family},
                   number_from_json(require(j, "lambda")), std::move(t), std::move(selected)};
}

std::string scores_csv(const std::vector<ScoreRow>& rows) {
  std::ostringstream out;
  out << "model,q,n_inputs,mse,nlpd,nll\n";
  for (const ScoreRow& r : rows) {
    out << r.model << ',' << r.q << ',' << r.n_inputs << ',' << csv_number(r.mse) << ','
        << csv_number(r.nlpd) << ',' << csv_number(r.nll) << '\n';
  }
  return out.str();
}

Json scores_json(const std::vector<ScoreRow>& rows, Index n_train, Index n_test) {
  Json out = Json::array();
  for (const ScoreRow& r : rows) {
    out.push_back(Json{{"model", r.model},
                       {"q", r.q},
                       {"n_inputs", r.n_inputs},
                       {"mse", json_number(r.mse)},
                       {"nlpd", json_number(r.nlpd)},
                       {"nll", json_number(r.nll)}});
  }
  return Json{{"format", "spgp.scores"}, {"version", 1}, {"n_train", n_train}, {"n_test", n_test}, {"rows", std::move(out)}};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path + ": invalid JSON: " + e.what());
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / ("." + target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path + "'");
  }
}

}  // namespace spgp
