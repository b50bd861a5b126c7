// Command-line front end: closed-form theory tables, single protocol runs,
// and figure-reproduction sweeps with CSV/JSON/SVG output.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qavg/errors.hpp"
#include "qavg/means.hpp"
#include "qavg/protocol.hpp"
#include "qavg/rng.hpp"
#include "qavg/scenarios.hpp"

namespace {

using json = nlohmann::json;

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;
  bool has_out = false;
  std::string format;  // "", "csv" or "json"
  bool plot = false;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void print_pairs(const std::vector<std::pair<std::string, std::string>>& rows,
                 const std::string& format) {
  if (format == "csv") {
    std::cout << "quantity,value\n";
    for (const auto& [k, v] : rows) std::cout << k << ',' << v << '\n';
    return;
  }
  if (format == "json") {
    json obj;
    for (const auto& [k, v] : rows) obj[k] = v;
    std::cout << obj.dump(2) << '\n';
    return;
  }
  std::size_t width = 0;
  for (const auto& [k, v] : rows) width = std::max(width, k.size());
  for (const auto& [k, v] : rows) {
    std::cout << k << std::string(width - k.size() + 2, ' ') << v << '\n';
  }
}

int cmd_theory(const GlobalOptions& global, const std::vector<double>& variances,
               const std::optional<double>& c) {
  const qavg::VarianceSet inputs(variances);
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("n", std::to_string(inputs.size()));
  rows.emplace_back("arithmetic_mean", fmt(qavg::arithmetic_mean(inputs)));
  rows.emplace_back("geometric_mean", fmt(qavg::geometric_mean(inputs)));
  rows.emplace_back("harmonic_mean", fmt(qavg::harmonic_mean(inputs)));
  if (c) {
    if (inputs.size() != 2) {
      throw std::invalid_argument("--c applies to exactly two resources");
    }
    const qavg::CorrelatedPair pair(variances[0], variances[1], *c);
    rows.emplace_back("arithmetic_mean_correlated", fmt(qavg::arithmetic_mean_correlated(pair)));
    rows.emplace_back("harmonic_mean_correlated", fmt(qavg::harmonic_mean_correlated(pair)));
  }
  if (inputs.size() >= 2) {
    const auto sigma = c ? qavg::QuadratureCovariance::from_pair(
                               qavg::CorrelatedPair(variances[0], variances[1], *c))
                         : qavg::QuadratureCovariance::diagonal(inputs);
    const auto image =
        qavg::apply_to_covariance(qavg::protocol_network(inputs.size()), sigma);
    std::vector<Eigen::Index> clamp;
    for (Eigen::Index j = 1; j < image.dim(); ++j) clamp.push_back(j);
    const Eigen::RowVectorXd gain = qavg::feedforward_gain(image, 0, clamp);
    std::string gains;
    for (Eigen::Index j = 0; j < gain.size(); ++j) {
      if (j) gains += ';';
      gains += fmt(gain(j));
    }
    rows.emplace_back("feedforward_gain", gains);
  }
  print_pairs(rows, global.format);
  return 0;
}

qavg::SweepRecord record_from_outcome(const qavg::ProtocolOutcome& outcome,
                                      const std::vector<double>& variances, double c,
                                      const std::optional<double>& threshold,
                                      const std::optional<double>& ps_analytic,
                                      std::uint64_t seed) {
  qavg::SweepRecord r;
  r.figure = "run";
  r.protocol = std::string(qavg::to_string(outcome.protocol));
  r.n = variances.size();
  r.v_inputs = variances;
  r.c = c;
  r.threshold = threshold;
  r.ps_analytic = ps_analytic;
  r.ps_empirical = outcome.success.p;
  r.ps_ci_lo = outcome.success.ci_lo;
  r.ps_ci_hi = outcome.success.ci_hi;
  r.var_analytic = outcome.analytic_prediction;
  r.var_empirical = outcome.variance.value;
  r.var_stderr = outcome.variance.standard_error;
  r.kept = outcome.kept_count;
  r.total = outcome.total_count;
  r.seed = seed;
  return r;
}

void print_outcome(const qavg::ProtocolOutcome& outcome, std::uint64_t seed,
                   const std::string& format) {
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("protocol", std::string(qavg::to_string(outcome.protocol)));
  rows.emplace_back("variance", fmt(outcome.variance.value) + " +/- " +
                                    fmt(outcome.variance.standard_error));
  if (outcome.analytic_prediction) {
    rows.emplace_back("analytic_prediction", fmt(*outcome.analytic_prediction));
  }
  rows.emplace_back("success_probability",
                    fmt(outcome.success.p) + " [" + fmt(outcome.success.ci_lo) + ", " +
                        fmt(outcome.success.ci_hi) + "]");
  rows.emplace_back("kept/total",
                    std::to_string(outcome.kept_count) + "/" + std::to_string(outcome.total_count));
  rows.emplace_back("seed", std::to_string(seed));
  print_pairs(rows, format == "csv" ? "" : format);
}

int cmd_run(const GlobalOptions& global, const std::string& protocol_name,
            const std::vector<double>& variances, const std::optional<double>& c,
            const std::optional<double>& threshold, const std::optional<double>& target_ps,
            std::size_t n_samples) {
  const auto protocol = qavg::protocol_from_string(protocol_name);
  const qavg::VarianceSet inputs(variances);
  if (c && inputs.size() != 2) {
    throw std::invalid_argument("--c applies to exactly two resources");
  }
  const auto sigma = c ? qavg::QuadratureCovariance::from_pair(
                             qavg::CorrelatedPair(variances[0], variances[1], *c))
                       : qavg::QuadratureCovariance::diagonal(inputs);
  const bool heralded = protocol == qavg::Protocol::harmonic_heralded;
  if (!heralded && (threshold || target_ps)) {
    throw std::invalid_argument("--threshold/--ps apply to harmonic-heralded only");
  }

  qavg::ProtocolOutcome outcome;
  std::optional<double> used_threshold;
  std::optional<double> ps_analytic;
  switch (protocol) {
    case qavg::Protocol::arithmetic_pick: {
      std::vector<qavg::SampleBatch> batches;
      if (inputs.size() == 1) {
        batches.push_back(qavg::sample_gaussian(sigma, n_samples, qavg::derive_seed(global.seed, 1)));
      } else {
        // one joint draw preserves any cross-resource correlation
        const auto joint = qavg::sample_gaussian(sigma, n_samples, qavg::derive_seed(global.seed, 1));
        for (Eigen::Index j = 0; j < joint.channels(); ++j) {
          batches.emplace_back(joint.data().col(j), std::vector<std::string>{joint.channel_labels()[j]},
                               joint.seed());
        }
      }
      outcome = qavg::run_arithmetic_pick(batches, global.seed);
      outcome.analytic_prediction = qavg::arithmetic_mean(inputs);
      break;
    }
    case qavg::Protocol::arithmetic_interference:
      outcome = qavg::run_arithmetic_interference(sigma, n_samples, global.seed);
      ps_analytic = 1.0;
      break;
    case qavg::Protocol::harmonic_feedforward:
      outcome = qavg::run_harmonic_feedforward(sigma, n_samples, global.seed);
      ps_analytic = 1.0;
      break;
    case qavg::Protocol::harmonic_heralded: {
      qavg::TruncationWindow window = qavg::TruncationWindow::open();
      if (threshold) {
        window = qavg::TruncationWindow::absolute(*threshold);
      } else if (target_ps) {
        if (!(*target_ps > 0.0) || *target_ps > 1.0) {
          throw std::invalid_argument("--ps must lie in (0, 1]");
        }
        if (*target_ps < 1.0) {
          if (sigma.dim() == 2) {
            const auto image =
                qavg::apply_to_covariance(qavg::protocol_network(2), sigma);
            window = qavg::TruncationWindow::absolute(
                qavg::invert_success_probability(image.variance(1), *target_ps));
          } else {
            // no closed form for joint multi-trigger windows: use the
            // empirical quantile of the mixed batch
            const auto mixed = qavg::sample_mixed(sigma, n_samples, global.seed);
            const auto rule =
                qavg::PostSelectionRule::all_triggers(mixed.channels(), qavg::TruncationWindow::open());
            window = qavg::TruncationWindow::absolute(qavg::threshold_for_kept_fraction(
                mixed, rule.trigger_channels, *target_ps));
          }
        }
      }
      if (!window.is_open()) used_threshold = window.threshold();
      const auto rule = qavg::PostSelectionRule::all_triggers(sigma.dim(), window);
      outcome = qavg::run_harmonic_heralded(sigma, n_samples, rule, global.seed);
      if (sigma.dim() == 2) {
        const auto image = qavg::apply_to_covariance(qavg::protocol_network(2), sigma);
        ps_analytic = qavg::success_probability(image.variance(1), window);
      } else if (window.is_open()) {
        ps_analytic = 1.0;
      }
      break;
    }
  }

  print_outcome(outcome, global.seed, global.format);
  if (global.has_out) {
    const auto record = record_from_outcome(outcome, variances, c.value_or(0.0), used_threshold,
                                            ps_analytic, global.seed);
    std::error_code ec;
    std::filesystem::create_directories(global.out_dir, ec);
    if (ec) {
      throw qavg::IoError("cannot create output directory " + global.out_dir.string());
    }
    const auto path = global.out_dir / "run.csv";
    std::ofstream file(path, std::ios::binary);
    if (!file) {
      throw qavg::IoError("cannot open " + path.string() + " for writing");
    }
    file << qavg::to_csv({record});
    if (!file.good()) {
      throw qavg::IoError("failed while writing " + path.string());
    }
    std::cout << "wrote " << path.string() << '\n';
  }
  return 0;
}

int cmd_figure(const GlobalOptions& global, const std::string& figure_id,
               std::size_t n_samples, bool n_samples_set,
               const std::vector<double>& c_grid, const std::vector<double>& ps_grid) {
  qavg::SweepSpec spec = qavg::figure_preset(figure_id);
  spec.seed = global.seed;
  if (n_samples_set) spec.n_samples = n_samples;
  if (!c_grid.empty()) {
    if (figure_id != "fig5") {
      throw std::invalid_argument("--c grid applies to fig5 only");
    }
    spec.c_grid = c_grid;
  }
  if (!ps_grid.empty()) spec.ps_grid = ps_grid;

  const auto records = qavg::run_sweep(spec);
  qavg::EmitOptions options;
  options.out_dir = global.has_out ? global.out_dir : std::filesystem::path("out");
  options.plot = global.plot;
  const auto result = qavg::emit(spec, records, options);

  if (global.format == "csv") {
    std::cout << qavg::to_csv(records);
  } else if (global.format == "json") {
    json summary{{"figure", spec.figure},
                 {"records", records.size()},
                 {"csv", result.csv.string()},
                 {"manifest", result.manifest.string()}};
    if (result.plot) summary["plot"] = result.plot->string();
    std::cout << summary.dump(2) << '\n';
  } else {
    std::cout << "wrote " << result.csv.string() << " (" << records.size() << " records)\n";
    std::cout << "wrote " << result.manifest.string() << '\n';
    if (result.plot) std::cout << "wrote " << result.plot->string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Squeezed-state quantum averaging: arithmetic/harmonic mean protocols "
               "for quadrature variances",
               "qavg"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for all subcommands");
  app.set_config("--config", "", "Config file (key=value lines; command line overrides)");

  GlobalOptions global;
  app.add_option("--seed", global.seed, "RNG seed")->capture_default_str();
  auto* out_opt = app.add_option("--out", global.out_dir, "Output directory");
  app.add_option("--format", global.format, "Stdout format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--plot", global.plot, "Also write an SVG line plot (figure command)");

  auto* theory = app.add_subcommand("theory", "Closed-form means for a set of variances");
  theory->fallthrough();  // global flags may follow the subcommand
  std::vector<double> theory_v;
  std::optional<double> theory_c;
  theory->add_option("--v", theory_v, "Resource variances (comma separated, shot-noise units)")
      ->required()
      ->delimiter(',');
  theory->add_option("--c", theory_c, "Correlation <X1 X2> between two resources");

  auto* run = app.add_subcommand("run", "Run one protocol engine on sampled resources");
  run->fallthrough();
  std::string run_protocol;
  std::vector<double> run_v;
  std::optional<double> run_c;
  std::optional<double> run_threshold;
  std::optional<double> run_ps;
  std::size_t run_n = 60000;
  run->add_option("--protocol", run_protocol, "Protocol engine")
      ->required()
      ->check(CLI::IsMember({"arithmetic-pick", "arithmetic-interference", "harmonic-heralded",
                             "harmonic-feedforward"}));
  run->add_option("--v", run_v, "Resource variances (comma separated)")->required()->delimiter(',');
  run->add_option("--c", run_c, "Correlation <X1 X2> between two resources");
  auto* thr_opt = run->add_option("--threshold", run_threshold,
                                  "Post-selection window half-width (shot-noise units)");
  run->add_option("--ps", run_ps, "Target success probability (inverted to a threshold)")
      ->excludes(thr_opt);
  run->add_option("--n", run_n, "Samples to draw")->capture_default_str();

  auto* figure = app.add_subcommand("figure", "Reproduce a figure sweep as CSV + manifest");
  figure->fallthrough();
  std::string figure_id;
  std::size_t figure_n = 0;
  std::vector<double> figure_c_grid;
  std::vector<double> figure_ps_grid;
  figure->add_option("id", figure_id, "Figure id: fig2, fig4a, fig4b or fig5")->required();
  auto* fig_n_opt = figure->add_option("--n", figure_n, "Samples per grid point");
  figure->add_option("--c", figure_c_grid, "Correlation grid override (fig5)")->delimiter(',');
  figure->add_option("--ps-grid", figure_ps_grid, "Success-probability grid override")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  global.has_out = out_opt->count() > 0;
  try {
    if (theory->parsed()) {
      return cmd_theory(global, theory_v, theory_c);
    }
    if (run->parsed()) {
      return cmd_run(global, run_protocol, run_v, run_c, run_threshold, run_ps, run_n);
    }
    return cmd_figure(global, figure_id, figure_n, fig_n_opt->count() > 0, figure_c_grid,
                      figure_ps_grid);
  } catch (const qavg::StarvedSelectionError& e) {
    std::cerr << "error: " << e.what() << " (success probability "
              << fmt(e.success_probability()) << ")\n";
    return 3;
  } catch (const qavg::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
