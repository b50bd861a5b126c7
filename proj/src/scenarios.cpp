#include "qavg/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qavg/errors.hpp"
#include "qavg/rng.hpp"

namespace qavg {

namespace {

using json = nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string join_inputs(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += fmt(values[i]);
  }
  return out;
}

void require_sorted_grid(const std::vector<double>& grid, const std::string& name) {
  if (grid.empty()) {
    throw std::invalid_argument(name + " grid must not be empty");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw std::invalid_argument(name + " grid must be sorted ascending");
  }
}

double elapsed_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

SweepRecord base_record(std::string figure, std::string protocol, std::size_t n,
                        std::vector<double> v_inputs, double c) {
  SweepRecord r;
  r.figure = std::move(figure);
  r.protocol = std::move(protocol);
  r.n = n;
  r.v_inputs = std::move(v_inputs);
  r.c = c;
  return r;
}

void fill_outcome(SweepRecord& r, const ProtocolOutcome& out) {
  r.ps_empirical = out.success.p;
  r.ps_ci_lo = out.success.ci_lo;
  r.ps_ci_hi = out.success.ci_hi;
  r.var_analytic = out.analytic_prediction;
  r.var_empirical = out.variance.value;
  r.var_stderr = out.variance.standard_error;
  r.kept = out.kept_count;
  r.total = out.total_count;
}

// One fig4/fig5-style grid point: arithmetic (open window) and/or heralded
// records sharing a single mixed batch.
void append_point_records(std::vector<SweepRecord>& records, const SweepRecord& prototype,
                          const QuadratureCovariance& sigma, double target_ps,
                          std::size_t n_samples, std::uint64_t point_seed,
                          bool emit_arithmetic, bool emit_heralded = true) {
  const auto t0 = std::chrono::steady_clock::now();
  const SampleBatch mixed = sample_mixed(sigma, n_samples, point_seed);
  const auto image = apply_to_covariance(protocol_network(mixed.channels()), sigma);
  const double trigger_variance = image.variance(1);

  if (emit_arithmetic) {
    SweepRecord arith = prototype;
    arith.protocol = std::string(to_string(Protocol::arithmetic_interference));
    arith.seed = point_seed;
    ProtocolOutcome out = herald_samples(
        mixed, PostSelectionRule::all_triggers(mixed.channels(), TruncationWindow::open()));
    out.protocol = Protocol::arithmetic_interference;
    out.analytic_prediction = image.variance(0);
    fill_outcome(arith, out);
    arith.ps_analytic = 1.0;
    arith.wall_ms = elapsed_ms(t0);
    records.push_back(std::move(arith));
  }
  if (!emit_heralded) {
    return;
  }

  const auto t1 = std::chrono::steady_clock::now();
  SweepRecord herald = prototype;
  herald.protocol = std::string(to_string(Protocol::harmonic_heralded));
  herald.seed = point_seed;
  const TruncationWindow window =
      target_ps >= 1.0 ? TruncationWindow::open()
                       : TruncationWindow::absolute(
                             invert_success_probability(trigger_variance, target_ps));
  herald.threshold = window.is_open() ? std::optional<double>() : window.threshold();
  herald.ps_analytic = success_probability(trigger_variance, window);
  const PostSelectionRule rule = PostSelectionRule::all_triggers(mixed.channels(), window);
  try {
    ProtocolOutcome out = herald_samples(mixed, rule);
    Eigen::MatrixXd block(2, 2);
    block << image.matrix()(0, 0), image.matrix()(0, 1), image.matrix()(1, 0),
        image.matrix()(1, 1);
    out.analytic_prediction =
        finite_window_conditional_variance(QuadratureCovariance(std::move(block)), window);
    fill_outcome(herald, out);
  } catch (const StarvedSelectionError& starved) {
    // recorded as such; the sweep continues
    const SuccessEstimate success = estimate_success(starved.kept(), starved.total());
    herald.ps_empirical = success.p;
    herald.ps_ci_lo = success.ci_lo;
    herald.ps_ci_hi = success.ci_hi;
    herald.kept = starved.kept();
    herald.total = starved.total();
  }
  herald.wall_ms = elapsed_ms(t1);
  records.push_back(std::move(herald));
}

std::string csv_line(const SweepRecord& r) {
  std::string line;
  line += r.figure;
  line += ',';
  line += r.protocol;
  line += ',';
  line += std::to_string(r.n);
  line += ',';
  line += join_inputs(r.v_inputs);
  line += ',';
  line += fmt(r.c);
  line += ',';
  line += fmt_opt(r.threshold);
  line += ',';
  line += fmt_opt(r.ps_analytic);
  line += ',';
  line += fmt_opt(r.ps_empirical);
  line += ',';
  line += fmt_opt(r.ps_ci_lo);
  line += ',';
  line += fmt_opt(r.ps_ci_hi);
  line += ',';
  line += fmt_opt(r.var_analytic);
  line += ',';
  line += fmt_opt(r.var_empirical);
  line += ',';
  line += fmt_opt(r.var_stderr);
  line += ',';
  line += std::to_string(r.kept);
  line += ',';
  line += std::to_string(r.total);
  line += ',';
  line += std::to_string(r.seed);
  line += '\n';
  return line;
}

// Minimal SVG line plot: one polyline per protocol, empirical values where
// present, analytic otherwise. x is P_S for the sweep figures and n for fig2.
std::string render_svg(const std::vector<SweepRecord>& records) {
  struct Point {
    double x, y;
  };
  std::map<std::string, std::vector<Point>> series;
  const bool fig2 = !records.empty() && records.front().figure == "fig2";
  const bool fig5 = !records.empty() && records.front().figure == "fig5";
  for (const auto& r : records) {
    const std::optional<double> y = r.var_empirical ? r.var_empirical : r.var_analytic;
    if (!y) continue;
    double x;
    if (fig2) {
      x = static_cast<double>(r.n);
    } else if (r.ps_empirical && *r.ps_empirical > 0.0) {
      x = *r.ps_empirical;
    } else {
      continue;  // anchors have no abscissa
    }
    series[r.protocol + (fig5 ? " c=" + fmt(r.c) : "")].push_back({x, *y});
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [name, pts] : series) {
    for (const auto& p : pts) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double w = 640, h = 480, ml = 70, mr = 20, mt = 20, mb = 50;
  const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  const auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n";
  svg << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\""
      << h - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">"
      << (fig2 ? "resources n" : "success probability") << "</text>\n";
  svg << "<text x=\"16\" y=\"" << h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << h / 2
      << ")\">variance (shot-noise units)</text>\n";
  svg << "<text x=\"" << ml << "\" y=\"" << h - mb + 16 << "\">" << fmt(xmin) << "</text>\n";
  svg << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"end\">"
      << fmt(xmax) << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << h - mb << "\" text-anchor=\"end\">" << fmt(ymin)
      << "</text>\n";
  svg << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\">" << fmt(ymax)
      << "</text>\n";
  std::size_t color_index = 0;
  double legend_y = mt + 14;
  for (const auto& [name, pts] : series) {
    const char* color = colors[color_index++ % 8];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (const auto& p : pts) svg << fmt(px(p.x)) << ',' << fmt(py(p.y)) << ' ';
    svg << "\"/>\n";
    svg << "<text x=\"" << ml + 8 << "\" y=\"" << legend_y << "\" fill=\"" << color << "\">"
        << name << "</text>\n";
    legend_y += 14;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << content;
  out.flush();
  if (!out.good()) {
    throw IoError("failed while writing " + path.string());
  }
}

json spec_to_json(const SweepSpec& spec) {
  return json{{"figure", spec.figure},
              {"variances", spec.variances},
              {"c_grid", spec.c_grid},
              {"ps_grid", spec.ps_grid},
              {"v_quiet", spec.v_quiet},
              {"v_broken", spec.v_broken},
              {"n_range", spec.n_range},
              {"broken_range", spec.broken_range},
              {"n_samples", spec.n_samples},
              {"seed", spec.seed}};
}

}  // namespace

void SweepSpec::validate() const {
  if (figure == "fig2") {
    if (n_range.empty() || broken_range.empty()) {
      throw std::invalid_argument("fig2 needs nonempty n and broken ranges");
    }
    if (!(v_quiet > 0.0) || !(v_broken > 0.0)) {
      throw std::invalid_argument("fig2 variances must be strictly positive");
    }
    return;
  }
  if (figure == "fig4a" || figure == "fig4b" || figure == "fig5") {
    if (variances.size() != 2) {
      throw std::invalid_argument(figure + " needs exactly two resource variances");
    }
    for (double v : variances) {
      if (!(v > 0.0)) throw std::invalid_argument("resource variances must be strictly positive");
    }
    require_sorted_grid(ps_grid, "success-probability");
    for (double ps : ps_grid) {
      if (!(ps > 0.0) || ps > 1.0) {
        throw std::invalid_argument("success probabilities must lie in (0, 1]");
      }
    }
    if (n_samples < 1000) {
      throw std::invalid_argument("sweeps need at least 1000 samples per point");
    }
    if (figure == "fig5") {
      require_sorted_grid(c_grid, "correlation");
      for (double c : c_grid) {
        CorrelatedPair(variances[0], variances[1], c);  // PD check
      }
    }
    return;
  }
  throw std::invalid_argument("unknown figure '" + figure + "'");
}

double invert_success_probability(double trigger_variance, double target_ps) {
  if (!(trigger_variance > 0.0)) {
    throw std::domain_error("trigger variance must be strictly positive");
  }
  if (!(target_ps > 0.0) || !(target_ps < 1.0)) {
    throw std::domain_error("target success probability must lie in (0, 1)");
  }
  const auto ps_at = [&](double t) {
    return std::erf(t / std::sqrt(2.0 * trigger_variance));
  };
  double lo = 0.0;
  double hi = std::sqrt(trigger_variance);
  while (ps_at(hi) < target_ps) hi *= 2.0;
  double mid = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    mid = 0.5 * (lo + hi);
    const double ps = ps_at(mid);
    if (std::abs(ps - target_ps) <= 1e-10) break;
    (ps < target_ps ? lo : hi) = mid;
  }
  return mid;
}

std::vector<SweepRecord> run_fig2(double v_quiet, double v_broken,
                                  const std::vector<std::size_t>& n_range,
                                  const std::vector<std::size_t>& broken_range) {
  if (n_range.empty() || broken_range.empty()) {
    throw std::invalid_argument("fig2 ranges must not be empty");
  }
  std::vector<SweepRecord> records;
  for (std::size_t n : n_range) {
    for (std::size_t broken : broken_range) {
      if (broken > n) continue;
      const auto point = stabilization_table(n, broken, v_quiet, v_broken);
      std::vector<double> inputs;
      inputs.insert(inputs.end(), broken, v_broken);
      inputs.insert(inputs.end(), n - broken, v_quiet);
      SweepRecord arith = base_record("fig2", "arithmetic-mean", n, inputs, 0.0);
      arith.var_analytic = point.arithmetic;
      records.push_back(std::move(arith));
      SweepRecord harm = base_record("fig2", "harmonic-mean", n, inputs, 0.0);
      harm.var_analytic = point.harmonic;
      records.push_back(std::move(harm));
    }
  }
  return records;
}

std::vector<SweepRecord> run_fig4(const std::string& figure, double v1, double v2,
                                  const std::vector<double>& ps_grid,
                                  std::size_t n_samples, std::uint64_t seed) {
  require_sorted_grid(ps_grid, "success-probability");
  const VarianceSet inputs({v1, v2});
  const auto sigma = QuadratureCovariance::diagonal(inputs);

  std::vector<SweepRecord> records;
  SweepRecord anchor = base_record(figure, "harmonic-heralded", 2, inputs.values(), 0.0);
  anchor.threshold = 0.0;  // narrow-window limit
  anchor.var_analytic = harmonic_mean(inputs);
  records.push_back(std::move(anchor));

  const SweepRecord prototype = base_record(figure, "", 2, inputs.values(), 0.0);
  for (std::size_t i = 0; i < ps_grid.size(); ++i) {
    append_point_records(records, prototype, sigma, ps_grid[i], n_samples,
                         derive_seed(seed, i), /*emit_arithmetic=*/true);
  }
  return records;
}

std::vector<SweepRecord> run_fig5(double v1, double v2,
                                  const std::vector<double>& c_grid,
                                  const std::vector<double>& ps_grid,
                                  std::size_t n_samples, std::uint64_t seed) {
  require_sorted_grid(ps_grid, "success-probability");
  require_sorted_grid(c_grid, "correlation");
  std::vector<SweepRecord> records;
  std::uint64_t point = 0;
  for (double c : c_grid) {
    const CorrelatedPair pair(v1, v2, c);
    const auto sigma = QuadratureCovariance::from_pair(pair);
    const std::vector<double> inputs{v1, v2};

    SweepRecord anchor = base_record("fig5", "harmonic-heralded", 2, inputs, c);
    anchor.threshold = 0.0;
    anchor.var_analytic = harmonic_mean_correlated(pair);
    records.push_back(std::move(anchor));

    const SweepRecord prototype = base_record("fig5", "", 2, inputs, c);
    // one arithmetic record per correlation, then the heralded P_S sweep
    append_point_records(records, prototype, sigma, 1.0, n_samples, derive_seed(seed, point++),
                         /*emit_arithmetic=*/true, /*emit_heralded=*/false);
    for (double ps : ps_grid) {
      append_point_records(records, prototype, sigma, ps, n_samples, derive_seed(seed, point++),
                           /*emit_arithmetic=*/false);
    }
  }
  return records;
}

std::vector<SweepRecord> run_sweep(const SweepSpec& spec) {
  spec.validate();
  if (spec.figure == "fig2") {
    return run_fig2(spec.v_quiet, spec.v_broken, spec.n_range, spec.broken_range);
  }
  if (spec.figure == "fig4a" || spec.figure == "fig4b") {
    return run_fig4(spec.figure, spec.variances[0], spec.variances[1], spec.ps_grid,
                    spec.n_samples, spec.seed);
  }
  return run_fig5(spec.variances[0], spec.variances[1], spec.c_grid, spec.ps_grid,
                  spec.n_samples, spec.seed);
}

std::string csv_header() {
  return "figure,protocol,n,v_inputs,c,threshold,ps_analytic,ps_empirical,ps_ci_lo,"
         "ps_ci_hi,var_analytic,var_empirical,var_stderr,kept,total,seed";
}

std::string to_csv(const std::vector<SweepRecord>& records) {
  std::string out = csv_header() + "\n";
  for (const auto& r : records) out += csv_line(r);
  return out;
}

EmitResult emit(const SweepSpec& spec, const std::vector<SweepRecord>& records,
                const EmitOptions& options) {
  if (records.empty()) {
    throw std::invalid_argument("no records to emit");
  }
  const std::string csv = to_csv(records);

  json manifest;
  manifest["artifact"] = {{"name", kArtifactName}, {"version", kArtifactVersion}};
  manifest["spec"] = spec_to_json(spec);
  manifest["records"] = records.size();
  json timings = json::array();
  for (const auto& r : records) timings.push_back(r.wall_ms);
  manifest["timings_ms"] = std::move(timings);

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + options.out_dir.string() + ": " +
                  ec.message());
  }
  EmitResult result;
  result.csv = options.out_dir / (spec.figure + ".csv");
  result.manifest = options.out_dir / (spec.figure + "_manifest.json");
  write_file(result.csv, csv);
  write_file(result.manifest, manifest.dump(2) + "\n");
  if (options.plot) {
    result.plot = options.out_dir / (spec.figure + ".svg");
    write_file(*result.plot, render_svg(records));
  }
  return result;
}

SweepSpec spec_from_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open manifest " + manifest_path.string());
  }
  json manifest = json::parse(in);
  const json& s = manifest.at("spec");
  SweepSpec spec;
  spec.figure = s.at("figure").get<std::string>();
  spec.variances = s.at("variances").get<std::vector<double>>();
  spec.c_grid = s.at("c_grid").get<std::vector<double>>();
  spec.ps_grid = s.at("ps_grid").get<std::vector<double>>();
  spec.v_quiet = s.at("v_quiet").get<double>();
  spec.v_broken = s.at("v_broken").get<double>();
  spec.n_range = s.at("n_range").get<std::vector<std::size_t>>();
  spec.broken_range = s.at("broken_range").get<std::vector<std::size_t>>();
  spec.n_samples = s.at("n_samples").get<std::size_t>();
  spec.seed = s.at("seed").get<std::uint64_t>();
  return spec;
}

SweepSpec figure_preset(const std::string& figure_id) {
  SweepSpec spec;
  spec.figure = figure_id;
  if (figure_id == "fig2") {
    spec.v_quiet = 0.25;
    spec.v_broken = 4.0;
    for (std::size_t n = 1; n <= 10; ++n) spec.n_range.push_back(n);
    for (std::size_t b = 0; b <= 5; ++b) spec.broken_range.push_back(b);
    return spec;
  }
  if (figure_id == "fig4a" || figure_id == "fig4b") {
    spec.variances = figure_id == "fig4a" ? std::vector<double>{0.64, 0.90}
                                          : std::vector<double>{0.62, 1.83};
    // 20 log-spaced targets in [0.01, 1]
    for (int i = 0; i < 20; ++i) {
      spec.ps_grid.push_back(std::pow(10.0, -2.0 + 2.0 * i / 19.0));
    }
    spec.ps_grid.back() = 1.0;
    return spec;
  }
  if (figure_id == "fig5") {
    spec.variances = {1.95, 3.72};
    const double bound = std::sqrt(spec.variances[0] * spec.variances[1]);
    spec.c_grid = {0.0, 0.25 * bound, 0.5 * bound};
    spec.ps_grid = {0.02, 0.05, 0.10, 0.20, 0.30, 0.50, 0.75, 1.0};
    return spec;
  }
  throw std::invalid_argument("unknown figure '" + figure_id +
                              "' (expected fig2, fig4a, fig4b or fig5)");
}

}  // namespace qavg
