#include "ipw/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "ipw/error.hpp"

namespace ipw {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Dataset::Dataset(Eigen::VectorXd y, Eigen::VectorXd d, Eigen::MatrixXd x,
                 std::vector<std::string> covariate_names,
                 std::string outcome_name, std::string treat_name)
    : y_(std::move(y)),
      d_(std::move(d)),
      x_(std::move(x)),
      names_(std::move(covariate_names)),
      outcome_name_(std::move(outcome_name)),
      treat_name_(std::move(treat_name)) {
  if (y_.size() == 0) throw ValidationError("dataset is empty");
  if (d_.size() != y_.size() || x_.rows() != y_.size())
    throw ContractError("dataset columns have different lengths");
  if (static_cast<std::size_t>(x_.cols()) != names_.size())
    throw ContractError("covariate names do not match covariate columns");
  for (Eigen::Index i = 0; i < y_.size(); ++i) {
    if (!std::isfinite(y_[i]))
      throw ValidationError("non-finite outcome in row " + std::to_string(i + 1));
    if (d_[i] != 0.0 && d_[i] != 1.0)
      throw ValidationError("treatment indicator outside {0,1} in row " +
                            std::to_string(i + 1));
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      if (!std::isfinite(x_(i, j)))
        throw ValidationError("non-finite covariate '" + names_[static_cast<std::size_t>(j)] +
                              "' in row " + std::to_string(i + 1));
    }
  }
}

Dataset Dataset::from_observations(std::span<const Observation> rows,
                                   std::vector<std::string> covariate_names,
                                   std::string outcome_name, std::string treat_name) {
  if (rows.empty()) throw ValidationError("dataset is empty");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(covariate_names.size());
  Eigen::VectorXd y(n), d(n);
  Eigen::MatrixXd x(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.x.size()) != k)
      throw ValidationError("row " + std::to_string(i + 1) +
                            " has a different covariate dimension");
    if (r.d != 0 && r.d != 1)
      throw ValidationError("treatment indicator outside {0,1} in row " +
                            std::to_string(i + 1));
    y[i] = r.y;
    d[i] = r.d;
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = r.x[static_cast<std::size_t>(j)];
  }
  return Dataset(std::move(y), std::move(d), std::move(x), std::move(covariate_names),
                 std::move(outcome_name), std::move(treat_name));
}

std::size_t Dataset::treated_count() const {
  return static_cast<std::size_t>(d_.sum() + 0.5);
}

std::size_t Dataset::covariate_index(const std::string& name) const {
  for (std::size_t j = 0; j < names_.size(); ++j)
    if (names_[j] == name) return j;
  throw ConfigError("covariate column '" + name + "' not present");
}

bool Dataset::has_covariate(const std::string& name) const {
  for (const auto& n : names_)
    if (n == name) return true;
  return false;
}

Observation Dataset::observation(std::size_t i) const {
  if (i >= size()) throw ContractError("observation index out of range");
  const auto r = static_cast<Eigen::Index>(i);
  Observation o;
  o.y = y_[r];
  o.d = static_cast<int>(d_[r]);
  o.x.resize(covariate_count());
  for (Eigen::Index j = 0; j < x_.cols(); ++j) o.x[static_cast<std::size_t>(j)] = x_(r, j);
  return o;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd y(m), d(m);
  Eigen::MatrixXd x(m, x_.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto src = rows[static_cast<std::size_t>(i)];
    if (src >= size()) throw ContractError("subset index out of range");
    const auto s = static_cast<Eigen::Index>(src);
    y[i] = y_[s];
    d[i] = d_[s];
    x.row(i) = x_.row(s);
  }
  return Dataset(std::move(y), std::move(d), std::move(x), names_, outcome_name_, treat_name_);
}

Dataset Dataset::with_outcome(Eigen::VectorXd y) const {
  return Dataset(std::move(y), d_, x_, names_, outcome_name_, treat_name_);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return j;
  throw ConfigError("column '" + name + "' not found in CSV header");
}

CsvTable read_csv_table(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("CSV input is empty");
  table.header = split_commas(line);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_commas(line);
    if (cells.size() != table.header.size())
      throw ParseError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(table.header.size()));
    std::vector<double> values(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto& c = cells[j];
      if (c.empty())
        throw ParseError("missing value at row " + std::to_string(row) + ", column '" +
                         table.header[j] + "'");
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v))
        throw ParseError("non-numeric value '" + c + "' at row " + std::to_string(row) +
                         ", column '" + table.header[j] + "'");
      values[j] = v;
    }
    table.rows.push_back(std::move(values));
  }
  return table;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv_table(in);
}

Dataset load_csv(std::istream& in, const std::string& outcome_col,
                 const std::string& treat_col,
                 const std::vector<std::string>& covariate_cols) {
  const auto table = read_csv_table(in);
  const auto yc = table.column(outcome_col);
  const auto dc = table.column(treat_col);
  std::vector<std::size_t> xc;
  for (const auto& c : covariate_cols) xc.push_back(table.column(c));

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  if (n == 0) throw ValidationError("CSV has a header but no rows");
  Eigen::VectorXd y(n), d(n);
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(xc.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = table.rows[static_cast<std::size_t>(i)];
    y[i] = r[yc];
    d[i] = r[dc];
    if (d[i] != 0.0 && d[i] != 1.0)
      throw ValidationError("treatment column '" + treat_col + "' is outside {0,1} at row " +
                            std::to_string(i + 1));
    for (std::size_t j = 0; j < xc.size(); ++j) x(i, static_cast<Eigen::Index>(j)) = r[xc[j]];
  }
  return Dataset(std::move(y), std::move(d), std::move(x), covariate_cols, outcome_col,
                 treat_col);
}

Dataset load_csv(const std::filesystem::path& path, const std::string& outcome_col,
                 const std::string& treat_col,
                 const std::vector<std::string>& covariate_cols) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_csv(in, outcome_col, treat_col, covariate_cols);
}

void write_csv(const Dataset& data, std::ostream& out) {
  out << data.outcome_name() << ',' << data.treat_name();
  for (const auto& n : data.covariate_names()) out << ',' << n;
  out << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < data.y().size(); ++i) {
    out << data.y()[i] << ',' << data.d()[i];
    for (Eigen::Index j = 0; j < data.x().cols(); ++j) out << ',' << data.x()(i, j);
    out << '\n';
  }
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(data, out);
}

Dataset build_nsw_features(const Dataset& raw) {
  std::vector<std::size_t> idx;
  for (const auto& name : nsw_raw_columns()) idx.push_back(raw.covariate_index(name));
  const auto col = [&](std::size_t k) { return raw.x().col(static_cast<Eigen::Index>(idx[k])); };

  const auto n = static_cast<Eigen::Index>(raw.size());
  Eigen::MatrixXd x(n, 12);
  const Eigen::VectorXd age = col(0), edu = col(1), e74 = col(2), e75 = col(3);
  const Eigen::VectorXd married = col(4), black = col(5), hispanic = col(6);
  x.col(0) = age;
  x.col(1) = edu;
  x.col(2) = e74;
  x.col(3) = e75;
  x.col(4) = age.array().square();
  x.col(5) = edu.array().square();
  x.col(6) = e74.array().square();
  x.col(7) = e75.array().square();
  x.col(8) = married;
  x.col(9) = black;
  x.col(10) = hispanic;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u74 = e74[i] == 0.0 ? 1.0 : 0.0;
    x(i, 11) = black[i] * u74;
  }
  return Dataset(raw.y(), raw.d(), std::move(x), nsw_feature_names(), raw.outcome_name(),
                 raw.treat_name());
}

}  // namespace ipw
