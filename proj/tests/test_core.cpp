#include <doctest.h>

#include <cstring>
#include <random>

#include "oracles.hpp"
#include "spgp/core.hpp"
#include "spgp/errors.hpp"

using namespace spgp;

TEST_CASE("split_params of a zero S block") {
  Vector v(6);
  v << 0, 0, 0, 0, 0.3, -1.2;
  const auto [s, cov] = split_params(ParamVector(v, 2, 2), 2, 2);
  CHECK(s.matrix().isZero(0.0));
  CHECK(cov.log_theta == 0.3);
  CHECK(cov.log_sigma2 == -1.2);
}

TEST_CASE("split_params reshapes row-major") {
  Vector v(8);
  v << 1, 2, 3, 4, 5, 6, 0, 0;
  const auto [s, cov] = split_params(ParamVector(v, 2, 3), 2, 3);
  Matrix expected(2, 3);
  expected << 1, 2, 3, 4, 5, 6;
  CHECK(s.matrix() == expected);
  CHECK(cov.theta() == 1.0);
  CHECK(cov.sigma2() == 1.0);
}

TEST_CASE("split and concat round-trip bitwise") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 6);
  std::normal_distribution<double> n01(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index p = dim(rng);
    const Index q = std::uniform_int_distribution<Index>(1, p)(rng);
    Vector v(q * p + 2);
    for (Index j = 0; j < v.size(); ++j) v(j) = n01(rng);
    const ParamVector phi(v, q, p);
    const auto [s, cov] = split_params(phi, q, p);
    for (Index l = 0; l < q; ++l)
      for (Index m = 0; m < p; ++m) REQUIRE(s(l, m) == v(l * p + m));
    const ParamVector back = concat_params(s, cov);
    REQUIRE(std::memcmp(back.values().data(), v.data(), sizeof(double) * v.size()) == 0);
  }
}

TEST_CASE("split_params rejects a length mismatch") {
  const ParamVector phi(Vector::Zero(8), 2, 3);
  CHECK_THROWS_AS(split_params(phi, 2, 2), DimensionError);
  CHECK_THROWS_AS(ParamVector(Vector::Zero(7), 2, 3), DimensionError);
}

TEST_CASE("support always holds the covariance coordinates") {
  ParamVector phi(Vector::Zero(8), 2, 3);
  CHECK(support(phi) == std::vector<Index>{6, 7});
  phi[1] = 0.5;
  CHECK(support(phi) == std::vector<Index>{1, 6, 7});
  ParamVector dense(Vector::Ones(8), 2, 3);
  CHECK(support(dense) == std::vector<Index>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("dataset and projection validation") {
  CHECK_THROWS_AS(Dataset(Matrix::Zero(1, 2), Vector::Zero(1)), ValidationError);
  CHECK_THROWS_AS(Dataset(Matrix::Zero(3, 2), Vector::Zero(2)), DimensionError);
  Matrix bad = Matrix::Zero(3, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(Dataset(bad, Vector::Zero(3)), ValidationError);
  CHECK_THROWS_AS(ProjectionMatrix(Matrix::Zero(3, 2)), DimensionError);
  CHECK_NOTHROW(ProjectionMatrix(Matrix::Zero(2, 2)));
}

TEST_CASE("scaled_penalty treats infinity times zero as zero") {
  CHECK(scaled_penalty(kInfinity, 0.0) == 0.0);
  CHECK(std::isinf(scaled_penalty(kInfinity, 0.1)));
  CHECK(scaled_penalty(2.0, 0.25) == 0.5);
  CHECK(scaled_penalty(0.0, 3.0) == 0.0);
}

TEST_CASE("kernel family names") {
  CHECK(kernel_family_from_string("exponential") == KernelFamily::Exponential);
  CHECK(kernel_family_from_string("squared_exponential") == KernelFamily::SquaredExponential);
  CHECK(to_string(KernelFamily::SquaredExponential) == "squared_exponential");
  CHECK_THROWS_AS(kernel_family_from_string("matern"), ValidationError);
}
