#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ipw/error.hpp"
#include "ipw/estimator.hpp"
#include "ipw/nsw.hpp"
#include "ipw/numeric.hpp"
#include "ipw/oracle.hpp"
#include "ipw/propensity.hpp"
#include "ipw/report.hpp"
#include "ipw/resample.hpp"

namespace ipw::cli {

using nlohmann::json;

namespace {

constexpr const char* kWarningHelp = R"(Warning classes (reported in the "warnings" array):
  bandwidth capped      the bandwidth equation has no root in (0,1]; h = 1 is used
  sparse window         no weights in the lower half of the bandwidth window
  order reduced         tied weights forced a lower local polynomial order
  window widened        the threshold exceeds the bandwidth; the local fit uses [0, b]
  rate condition        n b^(2p+3) F(b) > 1, bias correction may not be negligible
  subsample failures    some subsamples failed to fit and were skipped
  u74 proxy             replicate-nsw builds u74 as 1{earn1974 = 0}
Exit codes: 0 success, 2 contract, 3 config, 4 parse, 5 validation, 6 estimation,
  7 separation, 8 threshold, 9 bandwidth, 10 resampling, 11 numerical, 12 io.)";

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw ConfigError("cannot parse number '" + item + "'");
    }
  }
  return out;
}

PipelineConfig pipeline_from(const EstimateOptions& o) {
  PipelineConfig pc;
  pc.estimand = parse_estimand(o.estimand);
  pc.trimming = parse_trimming(o.trim, orientation_for(pc.estimand));
  pc.bias.enabled = o.bias_correct;
  pc.bias.order = o.order;
  pc.bias.pilot_order = o.pilot_order;
  pc.bias.bandwidth_c = o.bandwidth_c;
  pc.bias.bandwidth = o.bandwidth;
  return pc;
}

SubsamplingConfig subsampling_from(const EstimateOptions& o) {
  SubsamplingConfig sc;
  sc.m = o.m;
  sc.replications = o.reps;
  sc.alpha = o.alpha;
  sc.seed = o.seed;
  sc.threads = o.threads;
  sc.refit_propensity = o.refit;
  sc.reselect_threshold = o.reselect;
  return sc;
}

json estimate_block(const Dataset& data, const WeightSource& source, const PipelineConfig& pc,
                    const SubsamplingConfig& sc, bool tolerate_resampling = false) {
  const auto est = estimate(data, source.weights, pc);
  json out = to_json(est);
  SubsamplingResult sub;
  try {
    sub = subsample_statistics(data, source, pc, est, sc);
  } catch (const ResamplingError& e) {
    if (!tolerate_resampling) throw;
    out["subsampling"] = nullptr;
    out["ci"] = nullptr;
    out["warnings"].push_back(std::string("no confidence interval: ") + e.what());
    return out;
  }
  out["subsampling"] = to_json(sub);
  out["subsampling"]["seed"] = sc.seed;
  out["ci"] = {sub.ci.lower, sub.ci.upper};
  if (sub.failed > 0)
    out["warnings"].push_back(std::to_string(sub.failed) + " of " +
                              std::to_string(sub.replications) +
                              " subsamples failed and were skipped");
  return out;
}

void emit(const json& report, const std::string& output, bool pretty, std::ostream& out) {
  const std::string text = pretty ? render_pretty(report) : report.dump(2) + "\n";
  if (output.empty()) {
    out << text;
    return;
  }
  std::ofstream f(output);
  if (!f) throw IoError("cannot write " + output);
  f << text;
}

TrimmingSpec regime_trimming(Regime r, double gamma0, double t) {
  switch (r) {
    case Regime::none: return TrimmingSpec::none();
    case Regime::light: return TrimmingSpec::rate_rule(1.0, 1.0 / gamma0, -1.0);
    case Regime::moderate: return TrimmingSpec::rate_rule(t, 1.0 / gamma0, 0.0);
    case Regime::heavy: return TrimmingSpec::rate_rule(1.0, 1.0 / gamma0, 1.0);
  }
  return TrimmingSpec::none();
}

}  // namespace

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("IPW_DATA_DIR"); env && *env) return env;
  return "data";
}

json run_estimate(const EstimateOptions& o) {
  Dataset data = load_csv(o.input, o.outcome, o.treat, o.covariates);
  if (o.features == "nsw")
    data = build_nsw_features(data);
  else if (o.features != "raw")
    throw ConfigError("unknown feature set '" + o.features + "' (expected raw or nsw)");

  const auto pc = pipeline_from(o);
  const auto sc = subsampling_from(o);
  json report = {{"input", o.input.string()},
                 {"n", data.size()},
                 {"n1", data.treated_count()},
                 {"config",
                  {{"estimand", o.estimand},
                   {"trim", o.trim},
                   {"order", o.order},
                   {"pilot_order", o.pilot_order},
                   {"bandwidth_c", o.bandwidth_c},
                   {"bias_correct", o.bias_correct},
                   {"alpha", o.alpha},
                   {"reps", o.reps},
                   {"seed", o.seed},
                   {"refit_propensity", o.refit},
                   {"reselect_threshold", o.reselect}}}};

  WeightSource source;
  if (o.weights_column) {
    const auto j = data.covariate_index(*o.weights_column);
    source = WeightSource::fixed(data.x().col(static_cast<Eigen::Index>(j)));
    report["weights"] = {{"source", "column"}, {"column", *o.weights_column}};
  } else {
    const auto kind = parse_model_kind(o.model);
    const auto model = fit(data, kind);
    source = WeightSource::fitted(kind, predict(model, data));
    report["model"] = to_json(model, data.covariate_names());
  }

  report["estimate"] = estimate_block(data, source, pc, sc);
  report["m"] = report["estimate"]["subsampling"]["m"];
  report["B"] = o.reps;
  report["seed"] = o.seed;

  json sweep = json::array();
  if (o.sweep_reps > 0) {
    for (double b : o.sweep) {
      PipelineConfig spc = pc;
      spc.trimming = TrimmingSpec::fixed(b, orientation_for(pc.estimand));
      SubsamplingConfig ssc = sc;
      ssc.replications = o.sweep_reps;
      json row = {{"b", b}};
      try {
        const auto blk = estimate_block(data, source, spc, ssc);
        row["n_trimmed"] = blk["n_trimmed"];
        row["theta_hat"] = blk["theta_hat"];
        row["theta_bc"] = blk["theta_bc"];
        row["ci"] = blk["ci"];
      } catch (const Error& e) {
        row["error"] = e.what();
      }
      sweep.push_back(row);
    }
  }
  report["plot_data"] = {{"weight_histogram", weight_histogram(source.weights, data.d(), o.bins)},
                         {"threshold_sweep", sweep}};
  return make_report("estimate", report);
}

json run_replicate_nsw(const std::filesystem::path& data_dir, std::size_t reps,
                       std::uint64_t seed, unsigned threads, double alpha) {
  const Dataset data = build_nsw_features(load_nsw(data_dir));
  const auto model = fit(data, ModelKind::logit);
  const auto source = WeightSource::fitted(ModelKind::logit, predict(model, data));

  SubsamplingConfig sc;
  sc.replications = reps;
  sc.seed = seed;
  sc.threads = threads;
  sc.alpha = alpha;

  PipelineConfig untrimmed;
  untrimmed.estimand = Estimand::att;
  untrimmed.trimming = TrimmingSpec::none(Orientation::upper_tail);
  untrimmed.bias.enabled = false;

  PipelineConfig trimmed;
  trimmed.estimand = Estimand::att;
  trimmed.trimming = TrimmingSpec::automatic(1.0, Orientation::upper_tail);

  json out = {{"data_dir", data_dir.string()},
              {"n", data.size()},
              {"n1", data.treated_count()},
              {"n0", data.size() - data.treated_count()},
              {"model", to_json(model, data.covariate_names())},
              {"untrimmed", estimate_block(data, source, untrimmed, sc, true)},
              {"trimmed", estimate_block(data, source, trimmed, sc, true)},
              {"warnings", {"u74 constructed as 1{earn1974 = 0}"}}};
  out["trimmed"]["weight_threshold"] = 1.0 - out["trimmed"]["b"].get<double>();
  out["plot_data"] = {{"weight_histogram", weight_histogram(source.weights, data.d(), 20)}};
  return make_report("replicate-nsw", out);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust inverse probability weighting: trimming, bias correction and "
               "subsampling inference"};
  app.footer(kWarningHelp);
  app.require_subcommand(1);

  std::string output;
  bool pretty = false;

  // estimate
  EstimateOptions eo;
  std::string covariates, sweep;
  std::string bias_flag = "on";
  bool freeze_propensity = false, freeze_threshold = false;
  auto* est = app.add_subcommand("estimate", "Trimmed, bias-corrected IPW estimate with a "
                                             "subsampling confidence interval");
  est->add_option("--input", eo.input, "CSV file")->required();
  est->add_option("--outcome", eo.outcome, "Outcome column");
  est->add_option("--treat", eo.treat, "Treatment column (0/1)");
  est->add_option("--covariates", covariates, "Comma-separated covariate columns");
  est->add_option("--features", eo.features, "raw or nsw (NSW logit design from raw columns)");
  est->add_option("--model", eo.model, "logit or probit")->check(CLI::IsMember({"logit", "probit"}));
  est->add_option("--weights-column", eo.weights_column,
                  "Use this covariate as known weights instead of fitting a model");
  est->add_option("--estimand", eo.estimand, "mean or att")->check(CLI::IsMember({"mean", "att"}));
  est->add_option("--trim", eo.trim, "none, fixed=<b>, auto or auto:s=<s>");
  est->add_option("--order", eo.order, "Local polynomial order p")->check(CLI::Range(0, 3));
  est->add_option("--pilot-order", eo.pilot_order, "Order of the boundary-moment fits")
      ->check(CLI::Range(0, 3));
  est->add_option("--bandwidth-c", eo.bandwidth_c, "Constant c of the bandwidth rule");
  est->add_option("--bandwidth", eo.bandwidth, "Fixed bandwidth (overrides the rule)");
  est->add_option("--bias-correct", bias_flag, "on or off")->check(CLI::IsMember({"on", "off"}));
  est->add_option("--alpha", eo.alpha, "1 - confidence level");
  est->add_option("--m", eo.m, "Subsample size (default floor(n/log n))");
  est->add_option("--reps", eo.reps, "Subsampling replications");
  est->add_option("--seed", eo.seed, "Master seed");
  est->add_option("--threads", eo.threads, "Worker threads (0 = all cores)");
  est->add_flag("--freeze-propensity", freeze_propensity, "Reuse full-sample weights in subsamples");
  est->add_flag("--freeze-threshold", freeze_threshold, "Reuse full-sample b and h in subsamples");
  est->add_option("--sweep", sweep, "Comma-separated thresholds for the sensitivity sweep");
  est->add_option("--sweep-reps", eo.sweep_reps, "Subsampling replications per sweep point (0 disables)");
  est->add_option("--bins", eo.bins, "Weight histogram bins");
  est->add_option("--output", output, "Write the report here instead of stdout");
  est->add_flag("--pretty", pretty, "Human-readable rendering");

  // simulate
  SimulationDesign design;
  std::string experiment = "regime", regime = "none", family = "normal", mode = "oracle";
  std::string mu1 = "1,2", sim_trim = "auto", sim_bias = "on", grid;
  double t = 1.0, sim_alpha = 0.05;
  std::size_t sim_reps = 200, sub_reps = 500, sim_m = 0, hill_k = 1000;
  unsigned sim_threads = 1;
  int sim_order = 1;
  bool include_statistics = false;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo oracle experiments on designs with "
                                             "known tail index and truth");
  sim->add_option("--experiment", experiment, "regime, coverage, bias, selector, lemma1, lemma2 or hill")
      ->check(CLI::IsMember({"regime", "coverage", "bias", "selector", "lemma1", "lemma2", "hill"}));
  sim->add_option("--gamma0", design.gamma0, "Tail index (> 1)");
  sim->add_option("--n", design.n, "Sample size");
  sim->add_option("--mu1", mu1, "Coefficients of mu1(e), constant first");
  sim->add_option("--noise-sd", design.noise_sd, "Outcome noise standard deviation");
  sim->add_option("--family", family, "normal or shifted_exponential");
  sim->add_option("--weight-mode", mode, "oracle or logit");
  sim->add_option("--regime", regime, "none, light, moderate or heavy");
  sim->add_option("--t", t, "Constant of the moderate regime");
  sim->add_option("--reps", sim_reps, "Monte Carlo replications");
  sim->add_option("--seed", design.seed, "Master seed");
  sim->add_option("--threads", sim_threads, "Worker threads (0 = all cores)");
  sim->add_option("--trim", sim_trim, "Trimming for coverage/bias: none, fixed=<b>, auto[:s=<s>] "
                                      "or a regime name");
  sim->add_option("--order", sim_order, "Local polynomial order p")->check(CLI::Range(0, 3));
  sim->add_option("--bias-correct", sim_bias, "on or off")->check(CLI::IsMember({"on", "off"}));
  sim->add_option("--subsample-reps", sub_reps, "Subsampling replications per coverage replicate");
  sim->add_option("--m", sim_m, "Subsample size (default floor(n/log n))");
  sim->add_option("--alpha", sim_alpha, "1 - confidence level");
  sim->add_option("--grid", grid, "Comma-separated x values (lemma1) or thresholds (lemma2)");
  sim->add_option("--k", hill_k, "Order statistics used by the Hill estimator");
  sim->add_flag("--include-statistics", include_statistics, "Emit replicate statistics");
  sim->add_option("--output", output, "Write the report here instead of stdout");
  sim->add_flag("--pretty", pretty, "Human-readable rendering");

  // replicate-nsw
  std::string data_dir;
  std::size_t nsw_reps = 1000;
  std::uint64_t nsw_seed = 20240601;
  unsigned nsw_threads = 1;
  double nsw_alpha = 0.05;
  auto* nsw = app.add_subcommand("replicate-nsw", "ATT on the NSW/PSID composite, untrimmed "
                                                  "and with automatic trimming");
  nsw->add_option("--data-dir", data_dir, "Directory with the NSW files (default $IPW_DATA_DIR or ./data)");
  nsw->add_option("--reps", nsw_reps, "Subsampling replications");
  nsw->add_option("--seed", nsw_seed, "Master seed");
  nsw->add_option("--threads", nsw_threads, "Worker threads (0 = all cores)");
  nsw->add_option("--alpha", nsw_alpha, "1 - confidence level");
  nsw->add_option("--output", output, "Write the report here instead of stdout");
  nsw->add_flag("--pretty", pretty, "Human-readable rendering");

  // fetch-data
  std::string url_base = "https://users.nber.org/~rdehejia/data";
  bool offline = false;
  auto* fetch = app.add_subcommand("fetch-data", "Download the NSW/PSID files and build the "
                                                 "composite CSV");
  fetch->add_option("--data-dir", data_dir, "Target directory (default $IPW_DATA_DIR or ./data)");
  fetch->add_option("--url-base", url_base, "Base URL of the Dehejia-Wahba files");
  fetch->add_flag("--offline", offline, "Only rebuild the composite from files already present");
  fetch->add_option("--output", output, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[config]: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::config);
  }

  try {
    if (*est) {
      eo.covariates = split_list(covariates);
      eo.bias_correct = bias_flag == "on";
      eo.refit = !freeze_propensity;
      eo.reselect = !freeze_threshold;
      if (!sweep.empty()) eo.sweep = parse_numbers(sweep);
      emit(run_estimate(eo), output, pretty, out);
    } else if (*sim) {
      design.mu1 = parse_numbers(mu1);
      design.family = parse_outcome_family(family);
      design.weight_mode = parse_weight_mode(mode);
      design.validate();
      json result;
      if (experiment == "regime") {
        RegimeOptions ro;
        ro.replications = sim_reps;
        ro.t = t;
        ro.threads = sim_threads;
        result = to_json(regime_experiment(design, parse_regime(regime), ro), include_statistics);
      } else if (experiment == "hill") {
        std::vector<double> est_k(sim_reps);
        for (std::size_t r = 0; r < sim_reps; ++r)
          est_k[r] = tail_index_hill(oracle_weights(generate(design, r)), hill_k);
        const double m = mean(est_k);
        result = json{{"k", hill_k},
                      {"replications", sim_reps},
                      {"mean", m},
                      {"sd", sim_reps > 1 ? sd_about(est_k, m) : 0.0}};
        if (include_statistics) result["estimates"] = est_k;
      } else if (experiment == "lemma1") {
        const auto xs = grid.empty() ? std::vector<double>{25, 50, 100, 200} : parse_numbers(grid);
        result = {{"points", to_json(lemma1_check(design, xs))}};
      } else if (experiment == "lemma2") {
        const auto bs = grid.empty() ? std::vector<double>{1e-4, 3e-4, 1e-3, 3e-3, 1e-2}
                                     : parse_numbers(grid);
        result = to_json(lemma2_check(design, bs, sim_reps, sim_threads));
      } else if (experiment == "selector") {
        result = to_json(selector_consistency(design, 1.0, sim_reps, 0.9, 1.1, sim_threads));
      } else {
        PipelineConfig pc;
        pc.estimand = Estimand::mean;
        if (sim_trim == "none" || sim_trim == "light" || sim_trim == "moderate" ||
            sim_trim == "heavy")
          pc.trimming = regime_trimming(parse_regime(sim_trim), design.gamma0, t);
        else
          pc.trimming = parse_trimming(sim_trim, Orientation::lower_tail);
        pc.bias.enabled = sim_bias == "on";
        pc.bias.order = sim_order;
        if (experiment == "bias") {
          result = to_json(bias_oracle(design, pc, sim_reps, 0.15, sim_threads));
        } else {
          CoverageOptions co;
          co.replications = sim_reps;
          co.threads = sim_threads;
          co.subsampling.replications = sub_reps;
          co.subsampling.m = sim_m;
          co.subsampling.alpha = sim_alpha;
          co.subsampling.seed = design.seed;
          result = to_json(coverage_experiment(design, pc, co));
        }
        result["trim"] = sim_trim;
        result["bias_correct"] = pc.bias.enabled;
      }
      emit(make_report("simulate", {{"experiment", experiment},
                                    {"design", to_json(design)},
                                    {"result", result}}),
           output, pretty, out);
    } else if (*nsw) {
      const auto dir = data_dir.empty() ? default_data_dir() : std::filesystem::path(data_dir);
      emit(run_replicate_nsw(dir, nsw_reps, nsw_seed, nsw_threads, nsw_alpha), output, pretty, out);
    } else if (*fetch) {
      const auto dir = data_dir.empty() ? default_data_dir() : std::filesystem::path(data_dir);
      emit(run_fetch(dir, url_base, offline), output, false, out);
    }
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ipw::cli
