#include <doctest.h>

#include <cmath>
#include <limits>

#include "golden_keys.hpp"
#include "ipw/error.hpp"
#include "ipw/report.hpp"
#include "oracles.hpp"

using namespace ipw;
using nlohmann::json;

TEST_CASE("make_report stamps schema and kind") {
  const auto r = make_report("estimate", {{"a", 1}, {"b", "x"}});
  CHECK(r["schema"] == kReportSchema);
  CHECK(r["kind"] == "estimate");
  CHECK(r["a"] == 1);
  CHECK(r["b"] == "x");
}

TEST_CASE("estimate serialisation") {
  IpwEstimate est;
  est.theta_hat = 1.5;
  est.theta_bc = 1.25;
  est.bias_hat = 0.25;
  est.bandwidth = std::numeric_limits<double>::quiet_NaN();
  est.warnings = {"w"};
  const auto j = to_json(est);
  CHECK(golden::keys(j) == golden::expected("estimate"));
  CHECK(j["theta_bc"] == 1.25);
  CHECK(j["estimand"] == "mean");
  // non-finite numbers become null rather than invalid JSON
  CHECK(j["bandwidth"].is_null());
  CHECK(j["warnings"] == json::array({"w"}));
  CHECK(json::accept(j.dump()));
}

TEST_CASE("subsampling serialisation") {
  SubsamplingResult r;
  r.statistics = {-1.0, 0.5, 2.0};
  r.replications = 4;
  r.failed = 1;
  r.m = 10;
  r.ci = {0.1, 0.9};
  CHECK(golden::keys(to_json(r)) == golden::expected("subsampling"));
  CHECK(to_json(r)["ci"] == json::array({0.1, 0.9}));
  const auto with = to_json(r, true);
  CHECK(with["statistics"].size() == 3);
}

TEST_CASE("experiment and design serialisation") {
  RegimeReport rr;
  rr.ks_stable = 0.01;
  const auto rj = to_json(rr);
  CHECK(golden::keys(rj) == golden::expected("regime"));
  CHECK(rj["ks_stable"] == 0.01);
  CHECK(rj["ks_gaussian"].is_null());
  CHECK(golden::keys(to_json(CoverageReport{})) == golden::expected("coverage"));
  const auto dj = to_json(SimulationDesign{});
  CHECK(golden::keys(dj) == golden::expected("design"));
  CHECK(dj["theta0"].get<double>() == doctest::Approx(5.0 / 3.0));
  CHECK(dj["weight_mode"] == "oracle");
}

TEST_CASE("weight_histogram") {
  const auto w = oracle::vec({0.05, 0.15, 0.15, 0.95, 1.0, 0.5});
  const auto d = oracle::vec({1, 1, 0, 0, 1, 0});
  const auto h = weight_histogram(w, d, 10);
  CHECK(h["edges"].size() == 11);
  CHECK(h["edges"][10] == 1.0);
  CHECK(h["treated"][0] == 1);
  CHECK(h["treated"][1] == 1);
  CHECK(h["comparison"][1] == 1);
  // e = 1 falls in the last bin
  CHECK(h["treated"][9] == 1);
  CHECK(h["comparison"][9] == 1);
  CHECK(h["comparison"][5] == 1);
  std::size_t total = 0;
  for (const auto& c : h["treated"]) total += c.get<std::size_t>();
  for (const auto& c : h["comparison"]) total += c.get<std::size_t>();
  CHECK(total == 6);
  CHECK_THROWS_AS(weight_histogram(w, d, 0), ContractError);
  CHECK_THROWS_AS(weight_histogram(w, oracle::vec({1, 0}), 4), ContractError);
}

TEST_CASE("render_pretty") {
  json arr = json::array();
  for (int i = 0; i < 20; ++i) arr.push_back(i);
  const auto text = render_pretty(make_report("x", {{"estimate", {{"theta", 2.5}}},
                                                    {"name", "abc"},
                                                    {"long", arr}}));
  CHECK(text.find("kind: x\n") != std::string::npos);
  CHECK(text.find("estimate:\n  theta: 2.5\n") != std::string::npos);
  CHECK(text.find("name: abc\n") != std::string::npos);
  CHECK(text.find("long: [20 values]\n") != std::string::npos);
}
