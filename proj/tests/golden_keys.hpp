#pragma once

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <string>

namespace golden {

inline std::set<std::string> expected(const std::string& name) {
  std::ifstream in(std::string(IPW_GOLDEN_DIR) + "/report_keys.json");
  const auto j = nlohmann::json::parse(in);
  return j.at(name).get<std::set<std::string>>();
}

inline std::set<std::string> keys(const nlohmann::json& obj) {
  std::set<std::string> out;
  for (auto it = obj.begin(); it != obj.end(); ++it) out.insert(it.key());
  return out;
}

}  // namespace golden
