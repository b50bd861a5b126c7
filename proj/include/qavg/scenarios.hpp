#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qavg/protocol.hpp"

namespace qavg {

inline constexpr std::string_view kArtifactName = "qavg";
inline constexpr std::string_view kArtifactVersion = "0.1.0";

/// One figure sweep: inputs, grids and sampling budget. Unused fields are
/// ignored by figures that do not need them.
struct SweepSpec {
  std::string figure;                     // fig2 | fig4a | fig4b | fig5
  std::vector<double> variances;          // two resources for fig4*/fig5
  std::vector<double> c_grid;             // fig5 correlation grid
  std::vector<double> ps_grid;            // target success probabilities, sorted
  double v_quiet = 0.25;                  // fig2 inputs
  double v_broken = 4.0;
  std::vector<std::size_t> n_range;       // fig2 resource counts
  std::vector<std::size_t> broken_range;  // fig2 broken counts
  std::size_t n_samples = 60000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// One measurement or theory anchor; maps 1:1 onto a CSV row. Optional fields
/// are left empty in the CSV where no closed form or estimate exists.
/// threshold: absent = open window, 0 = narrow-window limit anchor.
struct SweepRecord {
  std::string figure;
  std::string protocol;
  std::size_t n = 0;
  std::vector<double> v_inputs;
  double c = 0.0;
  std::optional<double> threshold;
  std::optional<double> ps_analytic;
  std::optional<double> ps_empirical;
  std::optional<double> ps_ci_lo;
  std::optional<double> ps_ci_hi;
  std::optional<double> var_analytic;
  std::optional<double> var_empirical;
  std::optional<double> var_stderr;
  std::size_t kept = 0;
  std::size_t total = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0.0;  // manifest only, not a CSV column
};

/// Smallest t with success_probability(trigger_variance, t) = target_ps,
/// bisected to 1e-10 on P_S. Requires 0 < target_ps < 1.
double invert_success_probability(double trigger_variance, double target_ps);

/// Closed-form stabilization table over the cross product of the two ranges
/// (rows with n_broken > n_total are skipped).
std::vector<SweepRecord> run_fig2(double v_quiet, double v_broken,
                                  const std::vector<std::size_t>& n_range,
                                  const std::vector<std::size_t>& broken_range);

/// Variance vs success probability for two uncorrelated resources: per grid
/// point one arithmetic and one heralded record on the same mixed batch, plus
/// a narrow-window anchor row.
std::vector<SweepRecord> run_fig4(const std::string& figure, double v1, double v2,
                                  const std::vector<double>& ps_grid,
                                  std::size_t n_samples, std::uint64_t seed);

/// Correlation sweep: per C one arithmetic record, a heralded sweep over the
/// P_S grid, and a narrow-window anchor row.
std::vector<SweepRecord> run_fig5(double v1, double v2,
                                  const std::vector<double>& c_grid,
                                  const std::vector<double>& ps_grid,
                                  std::size_t n_samples, std::uint64_t seed);

std::vector<SweepRecord> run_sweep(const SweepSpec& spec);

std::string csv_header();
std::string to_csv(const std::vector<SweepRecord>& records);

struct EmitOptions {
  std::filesystem::path out_dir;
  bool plot = false;
};

struct EmitResult {
  std::filesystem::path csv;
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> plot;
};

/// Writes <figure>.csv, <figure>_manifest.json and optionally <figure>.svg.
/// Records must be nonempty; all computation happens before any file is
/// created.
EmitResult emit(const SweepSpec& spec, const std::vector<SweepRecord>& records,
                const EmitOptions& options);

/// Reads the "spec" block of a run manifest; re-running it reproduces the CSV.
SweepSpec spec_from_manifest(const std::filesystem::path& manifest_path);

/// Default inputs and grids for fig2, fig4a, fig4b and fig5.
SweepSpec figure_preset(const std::string& figure_id);

}  // namespace qavg
