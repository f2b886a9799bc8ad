#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <tuple>
#include <sstream>

#include "oracles.hpp"
#include "spgp/commands.hpp"
#include "spgp/dataset_io.hpp"
#include "spgp/errors.hpp"
#include "spgp/report.hpp"

using namespace spgp;
namespace fs = std::filesystem;

namespace {

LoadedDataset parse(const std::string& text, bool standardize = false) {
  std::istringstream in(text);
  return parse_csv_dataset(in, standardize, "mem");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("spgp_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("csv with two rows") {
  const LoadedDataset d = parse("x1,x2,y\n0.5,1,2\n-1e-3, 4 ,5.25\n");
  CHECK(d.data.n() == 2);
  CHECK(d.data.p() == 2);
  CHECK(d.data.x()(1, 0) == -1e-3);
  CHECK(d.data.y()(1) == 5.25);
  CHECK(d.columns == std::vector<std::string>{"x1", "x2"});
  CHECK(!d.transform.applied);
}

TEST_CASE("csv tolerates a byte order mark, CRLF and blank lines") {
  const LoadedDataset d = parse("\xEF\xBB\xBFx1,y\r\n1,2\r\n\r\n3,4\r\n");
  CHECK(d.data.n() == 2);
  CHECK(d.data.y()(1) == 4.0);
}

TEST_CASE("csv errors name the column or the line") {
  CHECK(error_of("x1,x2\n1,2\n3,4\n").find("missing column 'y'") != std::string::npos);
  CHECK(error_of("x1,x3,y\n1,2,3\n4,5,6\n").find("expected column 'x2'") != std::string::npos);
  CHECK(error_of("x1,y\n1,2\n3,abc\n").find("mem:3:") != std::string::npos);
  CHECK(error_of("x1,y\n1,2\n3\n").find("mem:3:") != std::string::npos);
  CHECK(error_of("x1,y\n1,2\ninf,3\n").find("not finite") != std::string::npos);
  CHECK(error_of("x1,y\n1,2\nnan,3\n").find("mem:3:") != std::string::npos);
  CHECK(error_of("x1,y\n1,2\n").find("at least 2") != std::string::npos);
  CHECK(error_of("").find("empty") != std::string::npos);
  CHECK_THROWS_AS(read_csv_dataset("/nonexistent/data.csv", false), IoError);
}

TEST_CASE("standardized columns have zero mean and unit sample variance") {
  std::mt19937_64 rng(91);
  std::ostringstream text;
  text << "x1,x2,x3,y\n";
  for (int i = 0; i < 50; ++i) text << 5.0 + 3.0 * oracle::normal(1, rng)(0) << ",7," << i << "," << i % 3 << "\n";
  const LoadedDataset d = parse(text.str(), true);
  CHECK(d.transform.applied);
  const Matrix& x = d.data.x();
  for (Index m = 0; m < 3; ++m) CHECK(std::abs(x.col(m).mean()) < 1e-12);
  CHECK((x.col(0).array() - x.col(0).mean()).square().sum() / 49.0 == doctest::Approx(1.0).epsilon(1e-12));
  // A constant column keeps scale 1 and becomes all zeros.
  CHECK(d.transform.scale(1) == 1.0);
  CHECK(x.col(1).isZero(0.0));
}

TEST_CASE("csv round trip through the writer") {
  const fs::path dir = scratch_dir("csv");
  std::mt19937_64 rng(92);
  const Matrix x = oracle::uniform(7, 3, rng);
  const Vector y = oracle::normal(7, rng);
  write_csv_dataset((dir / "d.csv").string(), x, y);
  const LoadedDataset d = read_csv_dataset((dir / "d.csv").string(), false);
  CHECK(d.data.x() == x);
  CHECK(d.data.y() == y);
  CHECK(!fs::exists(dir / ".d.csv.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("json numbers encode non-finite values as strings") {
  CHECK(json_number(kInfinity) == "inf");
  CHECK(json_number(-kInfinity) == "-inf");
  CHECK(json_number(std::nan("")) == "nan");
  CHECK(json_number(0.5) == 0.5);
  CHECK(std::isinf(number_from_json(Json("inf"))));
  CHECK(number_from_json(Json(2.5)) == 2.5);
  CHECK_THROWS_AS(number_from_json(Json("big")), ValidationError);
}

TEST_CASE("config json overrides and rejects unknown keys") {
  const Json j = Json::parse(R"({"seed": 9, "epsilon": 0.01, "policy": "cascade", "kernel": "squared_exponential",
                                 "grid": {"q": [1, 2], "sigma2": [0.09]}, "q_max": 3, "standardize": false})");
  const RunConfig c = apply_config_json(j, RunConfig{});
  CHECK(c.seed == 9);
  CHECK(c.fseg.epsilon == 0.01);
  CHECK(c.fseg.policy == StepPolicy::Cascade);
  CHECK(c.kernel == KernelFamily::SquaredExponential);
  CHECK(c.grid_q == std::vector<Index>{1, 2});
  CHECK(c.grid_p0 == std::vector<Index>{3});
  CHECK(c.grid_sigma2 == std::vector<double>{0.09});
  CHECK(c.q_max == Index{3});
  CHECK(!c.standardize);
  CHECK_THROWS_AS(apply_config_json(Json::parse(R"({"epsilom": 1})"), RunConfig{}), ValidationError);
  CHECK_THROWS_AS(apply_config_json(Json::parse(R"({"grid": {"r": [1]}})"), RunConfig{}), ValidationError);
  CHECK_THROWS_AS(apply_config_json(Json::parse(R"({"seed": "x"})"), RunConfig{}), ValidationError);
  CHECK_THROWS_AS(apply_config_json(Json::parse(R"({"policy": "greedy"})"), RunConfig{}), ValidationError);
  RunConfig bad;
  bad.fseg.xi = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("automatic block count") {
  CHECK(resolve_blocks(0, 200) == 1);
  CHECK(resolve_blocks(0, 2000) == 1);
  CHECK(resolve_blocks(0, 2001) == 5);
  CHECK(resolve_blocks(0, 14411) == 36);
  CHECK(resolve_blocks(3, 100) == 3);
}

TEST_CASE("full grid enumerates 27 scenarios") {
  RunConfig c;
  use_full_grid(c);
  const auto grid = scenario_grid(c);
  CHECK(grid.size() == 27);
  std::set<std::tuple<Index, Index, double>> seen;
  for (const auto& s : grid) seen.insert({s.q, s.p0, s.sigma2});
  CHECK(seen.size() == 27);
  RunConfig bad;
  bad.grid_q = {4};
  bad.grid_p0 = {3};
  CHECK_THROWS_AS(scenario_grid(bad), ValidationError);
}

TEST_CASE("model file round trip") {
  Matrix s(1, 3);
  s << 0.0, 1.5, -0.25;
  RankSummary rs;
  rs.q = 1;
  rs.ok = true;
  const SelectionReport sel{{rs}, {}, 1,
                            PathEntry{ParamVector(ProjectionMatrix(s), CovParams{0.3, -2.0, KernelFamily::Exponential}), 0.75}};
  std::mt19937_64 rng(93);
  const Objective obj(Dataset(oracle::uniform(5, 3, rng), oracle::normal(5, rng)));
  Standardization t{true, Vector::Constant(3, 0.5), Vector::Constant(3, 2.0)};
  const Json j = Json::parse(model_report(sel, obj, t, {"x1", "x2", "x3"}).dump());
  CHECK(j["selected_columns"] == Json::array({"x2", "x3"}));
  const ModelFile m = model_from_json(j);
  CHECK(m.s.matrix() == s);
  CHECK(m.cov.log_theta == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(m.cov.log_sigma2 == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(m.lambda == 0.75);
  CHECK(m.selected == std::vector<Index>{1, 2});
  CHECK(m.transform.applied);
  CHECK(m.transform.scale(2) == 2.0);
  CHECK_THROWS_AS(model_from_json(Json::parse(R"({"format": "spgp.path"})")), ValidationError);
}

TEST_CASE("scores csv has fixed columns") {
  const std::vector<ScoreRow> rows{{"full", 1, 10, 0.5, 1.25, 3.0}, {"reduced", 1, 3, 0.25, -0.5, 2.0}};
  CHECK(scores_csv(rows) == "model,q,n_inputs,mse,nlpd,nll\nfull,1,10,0.5,1.25,3\nreduced,1,3,0.25,-0.5,2\n");
  const Json j = scores_json(rows, 8, 2);
  CHECK(j["rows"].size() == 2);
  CHECK(j["rows"][1]["model"] == "reduced");
}

TEST_CASE("atomic writes replace the target and leave no temporary") {
  const fs::path dir = scratch_dir("atomic");
  const std::string path = (dir / "out.txt").string();
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == "second");
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
  CHECK_THROWS_AS(write_file_atomic((dir / "missing" / "x.txt").string(), "x"), IoError);
  CHECK_THROWS_AS(read_json_file((dir / "none.json").string()), IoError);
  write_file_atomic((dir / "bad.json").string(), "{");
  CHECK_THROWS_AS(read_json_file((dir / "bad.json").string()), ValidationError);
  fs::remove_all(dir);
}

TEST_CASE("gradient check on small instances") {
  const GradCheckResult r = gradient_check(3, 3, 20, 3, 2, KernelFamily::Exponential);
  CHECK(r.instances == 3);
  CHECK(r.coordinates > 0);
  CHECK(r.max_rel_error <= 1e-4);
}
