#include <doctest.h>

#include <cmath>
#include <random>

#include "ipw/error.hpp"
#include "ipw/numeric.hpp"
#include "ipw/propensity.hpp"
#include "oracles.hpp"

using namespace ipw;
using oracle::make_data;

namespace {

struct Sample {
  std::vector<std::vector<double>> x;
  std::vector<double> d;
};

Sample two_covariate_sample(std::size_t n, std::uint64_t seed) {
  auto rng = rng_stream(seed, 0);
  std::normal_distribution<double> z;
  Sample s;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = z(rng), x2 = 2.0 + 3.0 * z(rng);
    const double p = 1.0 / (1.0 + std::exp(-(0.3 + 0.8 * x1 - 0.2 * x2)));
    s.x.push_back({x1, x2});
    s.d.push_back(uniform_open(rng) < p ? 1.0 : 0.0);
  }
  return s;
}

}  // namespace

TEST_CASE("intercept-only logit has the closed form") {
  SUBCASE("mean(d) = 0.5") {
    Dataset data(Eigen::VectorXd::Zero(4), oracle::vec({1, 0, 1, 0}), Eigen::MatrixXd(4, 0), {});
    const auto m = fit(data, ModelKind::logit);
    REQUIRE(m.coefficients.size() == 1);
    CHECK(m.converged);
    CHECK(std::abs(m.coefficients[0]) < 1e-10);
  }
  SUBCASE("mean(d) = 0.75") {
    Dataset data(Eigen::VectorXd::Zero(4), oracle::vec({1, 1, 1, 0}), Eigen::MatrixXd(4, 0), {});
    const auto m = fit(data, ModelKind::logit);
    CHECK(m.coefficients[0] == doctest::Approx(std::log(3.0)).epsilon(1e-9));
  }
}

TEST_CASE("logit fit matches an independent IRLS oracle") {
  const auto s = two_covariate_sample(50, 11);
  const auto data = make_data(std::vector<double>(50, 0.0), s.d, s.x);
  const auto m = fit(data, ModelKind::logit);
  const auto ref = oracle::irls_logit(s.x, s.d);
  REQUIRE(m.converged);
  REQUIRE(m.coefficients.size() == 3);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(m.coefficients[j] - ref[static_cast<std::size_t>(j)]) < 1e-6);
  CHECK(m.gradient_norm <= FitOptions{}.tolerance);
}

TEST_CASE("predict closed forms") {
  PropensityModel m;
  m.kind = ModelKind::logit;
  m.coefficients = Eigen::VectorXd::Zero(3);
  const std::vector<double> x = {4.0, -7.0};
  CHECK(predict(m, x) == 0.5);
  m.coefficients[0] = std::log(3.0);
  CHECK(predict(m, x) == doctest::Approx(0.75).epsilon(1e-14));
  m.kind = ModelKind::probit;
  m.coefficients[0] = 0.0;
  CHECK(predict(m, x) == 0.5);
  const std::vector<double> wrong = {1.0};
  CHECK_THROWS_AS(predict(m, wrong), ContractError);
}

TEST_CASE("predictions lie strictly inside (0, 1)") {
  PropensityModel m;
  m.kind = ModelKind::logit;
  m.coefficients = Eigen::VectorXd::Constant(2, 0.0);
  m.coefficients[1] = 1e4;
  const std::vector<double> big = {1.0}, small = {-1.0};
  CHECK(predict(m, big) < 1.0);
  CHECK(predict(m, small) > 0.0);
}

TEST_CASE("probit fit satisfies its score equations") {
  const auto s = two_covariate_sample(400, 5);
  const auto data = make_data(std::vector<double>(400, 0.0), s.d, s.x);
  const auto m = fit(data, ModelKind::probit);
  REQUIRE(m.converged);
  CHECK(score(m, data).lpNorm<Eigen::Infinity>() < 1e-6);
  const auto lg = fit(data, ModelKind::logit);
  // logit and probit slopes differ by roughly the usual 1.6-1.8 factor
  const double ratio = lg.coefficients[1] / m.coefficients[1];
  CHECK(ratio > 1.4);
  CHECK(ratio < 2.0);
}

TEST_CASE("influence functions") {
  const auto s = two_covariate_sample(50, 11);
  const auto data = make_data(std::vector<double>(50, 0.0), s.d, s.x);
  const auto m = fit(data, ModelKind::logit);
  const Eigen::MatrixXd h = influence(m, data);
  REQUIRE(h.rows() == 50);
  REQUIRE(h.cols() == 3);

  SUBCASE("average to zero at the MLE") {
    CHECK(h.colwise().mean().lpNorm<Eigen::Infinity>() <= 1e-8);
  }
  SUBCASE("index direction has the sign of the residual") {
    const auto e = predict(m, data);
    // x_i' h_i = r_i x_i' I^{-1} x_i and I^{-1} is positive definite
    for (Eigen::Index i = 0; i < 50; ++i) {
      const double resid = data.d()[i] - e[i];
      const Eigen::RowVectorXd xi = (Eigen::RowVectorXd(3) << 1.0, data.x()(i, 0), data.x()(i, 1)).finished();
      const double index_shift = xi.dot(h.row(i));
      CHECK((index_shift > 0.0) == (resid > 0.0));
    }
  }
  SUBCASE("matches leave-one-out refits to first order") {
    std::vector<double> predicted, actual;
    for (std::size_t i = 0; i < 50; ++i) {
      std::vector<std::size_t> keep;
      for (std::size_t k = 0; k < 50; ++k)
        if (k != i) keep.push_back(k);
      const auto mi = fit(data.subset(keep), ModelKind::logit);
      for (Eigen::Index j = 0; j < 3; ++j) {
        actual.push_back(m.coefficients[j] - mi.coefficients[j]);
        predicted.push_back(h(static_cast<Eigen::Index>(i), j) / 50.0);
      }
    }
    CHECK(oracle::pearson_correlation(predicted, actual) > 0.99);
  }
}

TEST_CASE("fit error kinds") {
  SUBCASE("perfect separation") {
    const auto data = make_data({0, 0, 0, 0, 0, 0}, {0, 0, 0, 1, 1, 1},
                                {{1}, {2}, {3}, {4}, {5}, {6}});
    CHECK_THROWS_AS(fit(data, ModelKind::logit), SeparationError);
    CHECK_THROWS_AS(fit(data, ModelKind::probit), SeparationError);
  }
  SUBCASE("collinear columns name the offenders") {
    const auto data = make_data({0, 0, 0, 0, 0, 0}, {0, 1, 0, 1, 1, 0},
                                {{1, 2}, {2, 4}, {3, 6}, {4, 8}, {5, 10}, {6, 12}});
    try {
      fit(data, ModelKind::logit);
      FAIL("expected an estimation error");
    } catch (const EstimationError& e) {
      const std::string what = e.what();
      CHECK(what.find("x1") != std::string::npos);
      CHECK(what.find("x2") != std::string::npos);
    }
  }
  SUBCASE("unknown model kind") {
    CHECK_THROWS_AS(parse_model_kind("cloglog"), ConfigError);
  }
}
