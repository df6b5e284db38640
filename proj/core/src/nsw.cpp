#include "ipw/nsw.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ipw/error.hpp"
#include "ipw/propensity.hpp"

namespace ipw {

Dataset read_dehejia_wahba(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> v;
    std::string tok;
    while (ls >> tok) {
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError("non-numeric value '" + tok + "' at row " + std::to_string(row + 1));
      v.push_back(x);
    }
    if (v.empty()) continue;
    ++row;
    if (v.size() != 10)
      throw ParseError("row " + std::to_string(row) + " has " + std::to_string(v.size()) +
                       " fields, expected 10");
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw ParseError("Dehejia-Wahba file has no rows");

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd y(n), d(n);
  Eigen::MatrixXd x(n, 8);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    d[i] = r[0];
    if (d[i] != 0.0 && d[i] != 1.0)
      throw ValidationError("treatment indicator outside {0,1} at row " + std::to_string(i + 1));
    for (int j = 0; j < 8; ++j) x(i, j) = r[static_cast<std::size_t>(j + 1)];
    y[i] = r[9];
  }
  return Dataset(std::move(y), std::move(d), std::move(x), nsw_file_columns(), kNswOutcome,
                 kNswTreat);
}

Dataset read_dehejia_wahba(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_dehejia_wahba(in);
}

NswComposite build_nsw_composite(const Dataset& treated, const Dataset& controls) {
  if (treated.covariate_names() != controls.covariate_names())
    throw ConfigError("treated and comparison files have different columns");
  if (treated.treated_count() != treated.size())
    throw ValidationError("treated file contains comparison units");
  if (controls.treated_count() != 0) throw ValidationError("comparison file contains treated units");

  const auto n1 = static_cast<Eigen::Index>(treated.size());
  const auto n0 = static_cast<Eigen::Index>(controls.size());
  Eigen::VectorXd y(n1 + n0), d(n1 + n0);
  Eigen::MatrixXd x(n1 + n0, treated.x().cols());
  y << treated.y(), controls.y();
  d << treated.d(), controls.d();
  x << treated.x(), controls.x();
  const Dataset pooled(std::move(y), std::move(d), std::move(x), treated.covariate_names(),
                       kNswOutcome, kNswTreat);

  const auto model = fit(build_nsw_features(pooled), ModelKind::logit);
  const Eigen::VectorXd e = predict(model, build_nsw_features(pooled));

  NswComposite out{pooled, 0, e.head(n1).minCoeff()};
  std::vector<std::size_t> keep;
  for (Eigen::Index i = 0; i < n1 + n0; ++i) {
    if (i < n1 || e[i] >= out.overlap_cutoff)
      keep.push_back(static_cast<std::size_t>(i));
    else
      ++out.dropped_controls;
  }
  out.raw = pooled.subset(keep);
  return out;
}

Dataset load_nsw(const std::filesystem::path& dir) {
  const auto composite = dir / kNswCompositeFile;
  if (std::filesystem::exists(composite)) {
    auto cols = nsw_file_columns();
    return load_csv(composite, kNswOutcome, kNswTreat, cols);
  }
  const auto t = dir / kNswTreatedFile;
  const auto c = dir / kNswControlFile;
  if (!std::filesystem::exists(t) || !std::filesystem::exists(c))
    throw IoError("NSW data not found in " + dir.string() + " (expected " + kNswCompositeFile +
                  " or " + kNswTreatedFile + " and " + kNswControlFile +
                  "; run 'ipw fetch-data')");
  return build_nsw_composite(read_dehejia_wahba(t), read_dehejia_wahba(c)).raw;
}

}  // namespace ipw
