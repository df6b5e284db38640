#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ipw::cli {

struct EstimateOptions {
  std::filesystem::path input;
  std::string outcome = "y";
  std::string treat = "d";
  std::vector<std::string> covariates;
  std::string features = "raw";  // raw | nsw
  std::string model = "logit";
  std::optional<std::string> weights_column;
  std::string estimand = "mean";
  std::string trim = "auto";
  int order = 1;
  int pilot_order = 0;
  double bandwidth_c = 1.0;
  std::optional<double> bandwidth;
  bool bias_correct = true;
  double alpha = 0.05;
  std::size_t m = 0;
  std::size_t reps = 1000;
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
  bool refit = true;
  bool reselect = true;
  std::vector<double> sweep = {0.0, 0.01, 0.02, 0.03, 0.04, 0.06, 0.08, 0.1};
  std::size_t sweep_reps = 200;
  std::size_t bins = 20;
};

/// Full estimate report for a CSV input.
nlohmann::json run_estimate(const EstimateOptions& options);

/// Untrimmed and automatically trimmed ATT on the NSW/PSID composite.
nlohmann::json run_replicate_nsw(const std::filesystem::path& data_dir, std::size_t reps,
                                 std::uint64_t seed, unsigned threads, double alpha);

/// Downloads the Dehejia-Wahba files into `data_dir` and writes the
/// composite CSV. With `offline` set only the composite is rebuilt.
nlohmann::json run_fetch(const std::filesystem::path& data_dir, const std::string& url_base,
                         bool offline);

/// Default data directory: $IPW_DATA_DIR, else ./data.
std::filesystem::path default_data_dir();

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ipw::cli
