#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "spgp/errors.hpp"
#include "spgp/selection.hpp"
#include "spgp/simlab.hpp"

using namespace spgp;

TEST_CASE("generated truth has p0 relevant columns and orthogonal rows") {
  for (Index q : {1, 2, 3}) {
    for (Index p0 : {3, 5, 7}) {
      ScenarioConfig cfg;
      cfg.q = q;
      cfg.p0 = p0;
      cfg.n = 20;
      cfg.seed = static_cast<std::uint64_t>(100 * q + p0);
      const Scenario sc = generate_scenario(cfg);
      const Matrix& s = sc.truth.s_true.matrix();
      CHECK(s.rows() == q);
      CHECK(s.cols() == 10);
      CHECK(static_cast<Index>(sc.truth.relevant.size()) == p0);
      CHECK(selected_variables(s) == sc.truth.relevant);
      CHECK(nonzero_columns(s) == p0);
      // S = D O_q, so normalizing the rows recovers O_q.
      Matrix o = s;
      for (Index l = 0; l < q; ++l) o.row(l) /= o.row(l).norm();
      CHECK((o * o.transpose() - Matrix::Identity(q, q)).cwiseAbs().maxCoeff() < 1e-10);
      for (Index l = 0; l < q; ++l) CHECK(s.row(l).norm() > 0.0);
      CHECK(s_recovery_error(s, s) == 0.0);
      CHECK(sc.data.n() == 20);
      CHECK(((sc.data.x().array() >= 0.0) && (sc.data.x().array() <= 1.0)).all());
    }
  }
}

TEST_CASE("generation is seeded") {
  ScenarioConfig cfg;
  cfg.n = 30;
  cfg.seed = 5;
  const Scenario a = generate_scenario(cfg);
  const Scenario b = generate_scenario(cfg);
  CHECK(a.data.x() == b.data.x());
  CHECK(a.data.y() == b.data.y());
  CHECK(a.truth.s_true.matrix() == b.truth.s_true.matrix());
  CHECK(a.truth.relevant == b.truth.relevant);
  cfg.seed = 6;
  CHECK(generate_scenario(cfg).data.y() != a.data.y());
}

TEST_CASE("marginal variance of y matches sigma^2 + theta") {
  ScenarioConfig cfg;
  cfg.sigma2 = 0.25;
  cfg.theta = 1.0;
  cfg.n = 40;
  double total = 0.0;
  long count = 0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    cfg.seed = replicate_seed(2024, 0, r);
    const Vector y = generate_scenario(cfg).data.y();
    total += y.squaredNorm();
    count += y.size();
  }
  const double var = total / static_cast<double>(count);
  CHECK(std::abs(var - 1.25) / 1.25 < 0.15);
}

TEST_CASE("scenario validation") {
  ScenarioConfig cfg;
  cfg.q = 3;
  cfg.p0 = 3;
  CHECK_NOTHROW(cfg.validate());
  cfg.q = 4;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = ScenarioConfig{};
  cfg.sigma2 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = ScenarioConfig{};
  cfg.p0 = 11;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("replicate seeds are distinct") {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 5; ++i)
    for (std::uint64_t r = 0; r < 20; ++r) seeds.push_back(replicate_seed(1, i, r));
  std::sort(seeds.begin(), seeds.end());
  CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
}

TEST_CASE("hit_miss rates") {
  const HitMiss same = hit_miss({1, 4, 7}, {7, 1, 4}, 10);
  CHECK(same.fnr == 0.0);
  CHECK(same.fpr == 0.0);
  const HitMiss none = hit_miss({0, 1, 2}, {}, 10);
  CHECK(none.fnr == 1.0);
  CHECK(none.fpr == 0.0);
  const HitMiss mixed = hit_miss({0, 1, 2}, {0, 5}, 10);
  CHECK(mixed.fnr == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(mixed.fpr == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  CHECK_THROWS_AS(hit_miss({}, {1}, 10), ValidationError);
  CHECK_THROWS_AS(hit_miss({0, 1}, {1}, 2), ValidationError);
  CHECK_THROWS_AS(hit_miss({0}, {12}, 10), ValidationError);
}

TEST_CASE("hit_miss is invariant to relabeling") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Index> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Index> a{0, 3, 4}, b{3, 8};
    std::vector<Index> pa, pb;
    for (Index v : a) pa.push_back(perm[static_cast<std::size_t>(v)]);
    for (Index v : b) pb.push_back(perm[static_cast<std::size_t>(v)]);
    const HitMiss x = hit_miss(a, b, 10), y = hit_miss(pa, pb, 10);
    CHECK(x.fnr == y.fnr);
    CHECK(x.fpr == y.fpr);
  }
}

TEST_CASE("selected_variables") {
  CHECK(selected_variables(Matrix::Zero(2, 5)).empty());
  Matrix s = Matrix::Zero(2, 6);
  s(1, 4) = -0.3;
  CHECK(selected_variables(s) == std::vector<Index>{4});
  s(0, 1) = 1e-300;
  CHECK(selected_variables(s) == std::vector<Index>{1, 4});
  CHECK(static_cast<Index>(selected_variables(s).size()) == nonzero_columns(s));
}

TEST_CASE("s_recovery_error ignores row order and signs") {
  Matrix s(2, 3);
  s << 1, 2, 3, 4, 5, 6;
  Matrix t(2, 3);
  t << -4, -5, -6, 1, 2, 3;
  CHECK(s_recovery_error(s, s) == 0.0);
  CHECK(s_recovery_error(t, s) == 0.0);
  CHECK_THROWS_AS(s_recovery_error(s, Matrix::Zero(1, 3)), DimensionError);
}

TEST_CASE("s_recovery_error equals the exhaustive alignment") {
  std::mt19937_64 rng(72);
  for (Index q : {1, 2, 3}) {
    for (int trial = 0; trial < 30; ++trial) {
      const Index p = q == 2 ? 3 : 5;
      const Matrix a = oracle::uniform(q, p, rng, -1.0, 1.0);
      const Matrix b = oracle::uniform(q, p, rng, -1.0, 1.0);
      CHECK(std::abs(s_recovery_error(a, b) - oracle::alignment_error(a, b)) < 1e-14);
    }
  }
}

TEST_CASE("padded recovery error and gram error") {
  Matrix truth(1, 3);
  truth << 1, 0, 2;
  Matrix est(2, 3);
  est << 0, 0, 0, -1, 0, -2;
  CHECK(padded_s_recovery_error(est, truth) == 0.0);
  CHECK(padded_s_recovery_error(truth, est) == 0.0);
  CHECK(s_gram_error(-truth, truth) == 0.0);
  Matrix off(1, 3);
  off << 1, 0, 0;
  // Gram difference: -2 at (0, 2) and (2, 0), -4 at (2, 2).
  CHECK(s_gram_error(off, truth) == doctest::Approx(24.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("mean_sd and aggregation") {
  CHECK(mean_sd({}).mean == 0.0);
  CHECK(mean_sd({3.0}).sd == 0.0);
  const MeanSd m = mean_sd({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == 2.5);
  CHECK(m.sd == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  ScenarioSummary s;
  s.config.q = 2;
  for (int r = 0; r < 4; ++r) {
    ReplicateResult run;
    run.ok = r != 3;
    run.q_hat = r == 0 ? 1 : 2;
    run.fnr = 0.25;
    run.fpr = 0.5;
    run.s_error = 0.125;
    s.runs.push_back(run);
  }
  aggregate(s);
  CHECK(s.successes == 3);
  CHECK(s.fnr.mean == 0.25);
  CHECK(s.fnr.sd == 0.0);
  CHECK(s.fpr.mean == 0.5);
  CHECK(s.s_error.mean == 0.125);
  CHECK(s.rank_hit_rate == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("one scenario with one replicate") {
  ScenarioConfig cfg;
  cfg.n = 30;
  cfg.replicates = 1;
  cfg.seed = 9;
  FsegConfig fc;
  fc.epsilon = 2e-2;
  fc.t_max = 10;
  fc.inner_max = 20;
  const StudyReport rep = run_study({cfg}, fc, 2);
  REQUIRE(rep.scenarios.size() == 1);
  REQUIRE(rep.scenarios[0].runs.size() == 1);
  const ReplicateResult& run = rep.scenarios[0].runs[0];
  CHECK(run.ok);
  CHECK(run.seed == replicate_seed(9, 0, 0));
  CHECK(run.q_hat >= 1);
  CHECK(run.q_hat <= 2);
  CHECK(rep.scenarios[0].successes == 1);
  // Replaying the recorded seed regenerates the same data.
  ScenarioConfig replay = cfg;
  replay.seed = run.seed;
  CHECK(generate_scenario(replay).truth.relevant == run.relevant);
}
