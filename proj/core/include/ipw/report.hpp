#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <string>

#include "ipw/estimator.hpp"
#include "ipw/oracle.hpp"
#include "ipw/propensity.hpp"
#include "ipw/resample.hpp"

namespace ipw {

inline constexpr const char* kReportSchema = "ipw-report/1";

/// Top-level report object: {"schema", "kind", ...body}.
nlohmann::json make_report(const std::string& kind, const nlohmann::json& body);

nlohmann::json to_json(const IpwEstimate& est);
nlohmann::json to_json(const PropensityModel& model, const std::vector<std::string>& names);
nlohmann::json to_json(const SubsamplingResult& res, bool include_statistics = false);
nlohmann::json to_json(const RegimeReport& rep, bool include_statistics = false);
nlohmann::json to_json(const CoverageReport& rep);
nlohmann::json to_json(const SelectorReport& rep);
nlohmann::json to_json(const BiasOracleReport& rep);
nlohmann::json to_json(const Lemma2Report& rep);
nlohmann::json to_json(const std::vector<Lemma1Point>& points);
nlohmann::json to_json(const SimulationDesign& design);

/// Counts of weights per bin on [0, 1], split by treatment group.
nlohmann::json weight_histogram(const Eigen::VectorXd& weights, const Eigen::VectorXd& d,
                                std::size_t bins);

/// Human-readable rendering of a report (the --pretty output).
std::string render_pretty(const nlohmann::json& report);

}  // namespace ipw
