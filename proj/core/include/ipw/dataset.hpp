#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ipw {

struct Observation {
  double y = 0.0;
  int d = 0;
  std::vector<double> x;
};

/// Immutable (outcome, treatment, covariates) sample. Storage is columnar;
/// `observation(i)` materialises a single record.
class Dataset {
 public:
  Dataset(Eigen::VectorXd y, Eigen::VectorXd d, Eigen::MatrixXd x,
          std::vector<std::string> covariate_names,
          std::string outcome_name = "y", std::string treat_name = "d");

  static Dataset from_observations(std::span<const Observation> rows,
                                   std::vector<std::string> covariate_names,
                                   std::string outcome_name = "y",
                                   std::string treat_name = "d");

  std::size_t size() const { return static_cast<std::size_t>(y_.size()); }
  std::size_t covariate_count() const { return static_cast<std::size_t>(x_.cols()); }
  std::size_t treated_count() const;

  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXd& d() const { return d_; }
  const Eigen::MatrixXd& x() const { return x_; }

  const std::string& outcome_name() const { return outcome_name_; }
  const std::string& treat_name() const { return treat_name_; }
  const std::vector<std::string>& covariate_names() const { return names_; }
  /// Index of a covariate column; throws ConfigError when absent.
  std::size_t covariate_index(const std::string& name) const;
  bool has_covariate(const std::string& name) const;

  Observation observation(std::size_t i) const;
  Dataset subset(std::span<const std::size_t> rows) const;
  /// Same records with the outcome replaced (used for scale checks).
  Dataset with_outcome(Eigen::VectorXd y) const;

 private:
  Eigen::VectorXd y_;
  Eigen::VectorXd d_;
  Eigen::MatrixXd x_;
  std::vector<std::string> names_;
  std::string outcome_name_;
  std::string treat_name_;
};

/// Header plus numeric cells of a comma-separated file.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv_table(std::istream& in);
CsvTable read_csv_table(const std::filesystem::path& path);

Dataset load_csv(std::istream& in, const std::string& outcome_col,
                 const std::string& treat_col,
                 const std::vector<std::string>& covariate_cols);
Dataset load_csv(const std::filesystem::path& path, const std::string& outcome_col,
                 const std::string& treat_col,
                 const std::vector<std::string>& covariate_cols);

/// Writes outcome, treatment and covariates with round-trip precision.
void write_csv(const Dataset& data, std::ostream& out);
void write_csv(const Dataset& data, const std::filesystem::path& path);

/// Logit design used for the NSW/PSID comparison, in this order:
/// age, education, earn1974, earn1975, their squares, married, black,
/// hispanic, black*u74 with u74 = 1{earn1974 == 0}.
Dataset build_nsw_features(const Dataset& raw);

inline const std::vector<std::string>& nsw_feature_names() {
  static const std::vector<std::string> names = {
      "age", "education", "earn1974", "earn1975",
      "age_sq", "education_sq", "earn1974_sq", "earn1975_sq",
      "married", "black", "hispanic", "black_u74"};
  return names;
}

inline const std::vector<std::string>& nsw_raw_columns() {
  static const std::vector<std::string> names = {
      "age", "education", "earn1974", "earn1975", "married", "black", "hispanic"};
  return names;
}

}  // namespace ipw
