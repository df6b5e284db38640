#include "ipw/report.hpp"

#include <cmath>
#include <sstream>

#include "ipw/error.hpp"

namespace ipw {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json opt(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

void render(std::ostringstream& os, const json& j, const std::string& indent) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    os << indent << it.key() << ':';
    const auto& v = it.value();
    if (v.is_object()) {
      os << '\n';
      render(os, v, indent + "  ");
      continue;
    }
    os << ' ';
    if (v.is_array() && v.size() > 12) {
      os << '[' << v.size() << " values]\n";
    } else if (v.is_string()) {
      os << v.get<std::string>() << '\n';
    } else {
      os << v.dump() << '\n';
    }
  }
}

}  // namespace

json make_report(const std::string& kind, const json& body) {
  json out = {{"schema", kReportSchema}, {"kind", kind}};
  for (auto it = body.begin(); it != body.end(); ++it) out[it.key()] = it.value();
  return out;
}

json to_json(const IpwEstimate& est) {
  return {{"estimand", to_string(est.estimand)},
          {"theta_hat", num(est.theta_hat)},
          {"b", num(est.b)},
          {"n_trimmed", est.n_trimmed},
          {"bias_hat", num(est.bias_hat)},
          {"theta_bc", num(est.theta_bc)},
          {"s_n", num(est.s_n)},
          {"n", est.n},
          {"n1", est.n1},
          {"bandwidth", num(est.bandwidth)},
          {"fitted_order", est.fitted_order},
          {"mu1", num(est.mu1)},
          {"mu2", num(est.mu2)},
          {"rate_statistic", num(est.rate_statistic)},
          {"warnings", est.warnings}};
}

json to_json(const PropensityModel& model, const std::vector<std::string>& names) {
  json coef = json::object();
  coef["(intercept)"] = num(model.coefficients[0]);
  for (std::size_t j = 0; j < names.size(); ++j)
    coef[names[j]] = num(model.coefficients[static_cast<Eigen::Index>(j + 1)]);
  return {{"kind", to_string(model.kind)},
          {"coefficients", coef},
          {"converged", model.converged},
          {"iterations", model.iterations},
          {"log_likelihood", num(model.log_likelihood)},
          {"gradient_norm", num(model.gradient_norm)}};
}

json to_json(const SubsamplingResult& res, bool include_statistics) {
  json out = {{"m", res.m},
              {"replications", res.replications},
              {"failed", res.failed},
              {"level", num(res.level)},
              {"q_low", num(res.q_low)},
              {"q_high", num(res.q_high)},
              {"ci", {num(res.ci.lower), num(res.ci.upper)}}};
  if (include_statistics) out["statistics"] = res.statistics;
  return out;
}

json to_json(const RegimeReport& rep, bool include_statistics) {
  json out = {{"regime", to_string(rep.regime)},
              {"gamma0", num(rep.gamma0)},
              {"n", rep.n},
              {"replications", rep.replications},
              {"b_n", num(rep.b_n)},
              {"a_n", num(rep.a_n)},
              {"limit_scale", num(rep.limit_scale)},
              {"ks_stable", opt(rep.ks_stable)},
              {"cf_distance", opt(rep.cf_distance)},
              {"ks_gaussian", opt(rep.ks_gaussian)},
              {"ks_gaussian_fitted", opt(rep.ks_gaussian_fitted)}};
  if (include_statistics) {
    out["statistics"] = rep.statistics;
    out["studentized"] = rep.studentized;
  }
  return out;
}

json to_json(const CoverageReport& rep) {
  return {{"replications", rep.replications},
          {"covered", rep.covered},
          {"failed", rep.failed},
          {"coverage", num(rep.coverage)},
          {"mc_se", num(rep.mc_se)},
          {"level", num(rep.level)},
          {"mean_width", num(rep.mean_width)},
          {"mean_b", num(rep.mean_b)}};
}

json to_json(const SelectorReport& rep) {
  return {{"b_dagger", num(rep.b_dagger)},
          {"replications", rep.ratios.size()},
          {"fraction_within", num(rep.fraction_within)}};
}

json to_json(const BiasOracleReport& rep) {
  return {{"replications", rep.relative_errors.size()},
          {"tolerance", num(rep.tolerance)},
          {"fraction_within", num(rep.fraction_within)},
          {"failed", rep.failed}};
}

json to_json(const Lemma2Report& rep) {
  json pts = json::array();
  for (const auto& p : rep.points)
    pts.push_back({{"b", num(p.b)},
                   {"analytic_bias", num(p.analytic_bias)},
                   {"mc_bias", num(p.mc_bias)},
                   {"mc_bias_se", num(p.mc_bias_se)},
                   {"analytic_variance", num(p.analytic_variance)},
                   {"mc_variance", num(p.mc_variance)},
                   {"mc_variance_se", num(p.mc_variance_se)},
                   {"rate_product", num(p.rate_product)},
                   {"bias_variance_ratio", num(p.bias_variance_ratio)}});
  return {{"points", pts}, {"slope", num(rep.slope)}};
}

json to_json(const std::vector<Lemma1Point>& points) {
  json pts = json::array();
  for (const auto& p : points)
    pts.push_back({{"x", num(p.x)},
                   {"ratio", num(p.ratio)},
                   {"target", num(p.target)},
                   {"standard_error", num(p.standard_error)}});
  return pts;
}

json to_json(const SimulationDesign& design) {
  return {{"gamma0", num(design.gamma0)},
          {"n", design.n},
          {"mu1", design.mu1},
          {"noise_sd", num(design.noise_sd)},
          {"outcome_family", to_string(design.family)},
          {"weight_mode", to_string(design.weight_mode)},
          {"theta0", num(design.theta0())},
          {"seed", design.seed}};
}

json weight_histogram(const Eigen::VectorXd& weights, const Eigen::VectorXd& d,
                      std::size_t bins) {
  if (bins == 0) throw ContractError("histogram needs at least one bin");
  if (weights.size() != d.size()) throw ContractError("weights and treatment differ in length");
  std::vector<std::size_t> treated(bins, 0), comparison(bins, 0);
  std::vector<double> edges(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k)
    edges[k] = static_cast<double>(k) / static_cast<double>(bins);
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    auto k = static_cast<std::size_t>(weights[i] * static_cast<double>(bins));
    k = std::min(k, bins - 1);
    (d[i] == 1.0 ? treated : comparison)[k]++;
  }
  return {{"edges", edges}, {"treated", treated}, {"comparison", comparison}};
}

std::string render_pretty(const json& report) {
  std::ostringstream os;
  render(os, report, "");
  return os.str();
}

}  // namespace ipw
