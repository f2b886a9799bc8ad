#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "spgp/dataset_io.hpp"
#include "spgp/predict.hpp"
#include "spgp/selection.hpp"
#include "spgp/simlab.hpp"

namespace spgp {

using Json = nlohmann::ordered_json;

/// Non-finite values become the strings "inf", "-inf" and "nan".
Json json_number(double v);
/// Inverse of json_number.
double number_from_json(const Json& j);

Json fseg_config_json(const FsegConfig& cfg);

/// Every path entry per q with lambda, Gamma, L, BIC and mBIC.
Json path_report(const SelectionReport& sel, const Objective& obj, const FsegConfig& cfg);

/// Chosen q*, lambda*, S, theta, sigma^2 and the selected inputs.
Json model_report(const SelectionReport& sel, const Objective& obj, const Standardization& transform,
                  const std::vector<std::string>& columns);

/// Long-format plot data: one line per (q, t, row of S).
std::string path_plot_csv(const SelectionReport& sel, Index n);

Json study_report(const StudyReport& study, const FsegConfig& cfg, Index q_max, std::uint64_t seed);
std::string study_csv(const StudyReport& study);

/// A fitted model read back from model_report output.
struct ModelFile {
  ProjectionMatrix s;
  CovParams cov;
  double lambda = 0.0;
  Standardization transform;
  std::vector<Index> selected;
};

ModelFile model_from_json(const Json& j);

struct ScoreRow {
  std::string model;  // "reduced" or "full"
  Index q = 0;
  Index n_inputs = 0;  // inputs with a nonzero S column
  double mse = 0.0;
  double nlpd = 0.0;
  double nll = 0.0;
};

std::string scores_csv(const std::vector<ScoreRow>& rows);
Json scores_json(const std::vector<ScoreRow>& rows, Index n_train, Index n_test);

Json read_json_file(const std::string& path);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace spgp
