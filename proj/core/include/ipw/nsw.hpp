#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ipw/dataset.hpp"

namespace ipw {

/// Column layout of the Dehejia-Wahba text files: treat, age, education,
/// black, hispanic, married, nodegree, re74, re75, re78.
inline const std::vector<std::string>& nsw_file_columns() {
  static const std::vector<std::string> names = {
      "age", "education", "black", "hispanic", "married", "nodegree", "earn1974", "earn1975"};
  return names;
}

inline constexpr const char* kNswOutcome = "earn1978";
inline constexpr const char* kNswTreat = "treat";
inline constexpr const char* kNswCompositeFile = "nsw_psid.csv";
inline constexpr const char* kNswTreatedFile = "nswre74_treated.txt";
inline constexpr const char* kNswControlFile = "psid_controls.txt";

/// Whitespace-separated Dehejia-Wahba file as a raw dataset (outcome
/// earn1978, treatment treat, covariates nsw_file_columns()).
Dataset read_dehejia_wahba(std::istream& in);
Dataset read_dehejia_wahba(const std::filesystem::path& path);

struct NswComposite {
  Dataset raw;
  /// Comparison units removed by the overlap rule.
  std::size_t dropped_controls = 0;
  /// Smallest fitted weight among treated units on the pooled sample.
  double overlap_cutoff = 0.0;
};

/// Pools the NSW treated file with the PSID comparison file, fits the
/// 12-feature logit on the pooled sample and keeps every treated unit plus
/// the comparison units whose fitted weight is at least the smallest treated
/// weight. On the public files this yields n1 = 185 and n0 = 1157.
NswComposite build_nsw_composite(const Dataset& treated, const Dataset& controls);

/// Loads the composite from `dir`: nsw_psid.csv when present, otherwise
/// built from the two Dehejia-Wahba files. Throws IoError when neither is
/// available.
Dataset load_nsw(const std::filesystem::path& dir);

}  // namespace ipw
