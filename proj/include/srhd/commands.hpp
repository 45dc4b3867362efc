#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include <srhd/optics.hpp>

namespace srhd {

/// Shared configuration for the CLI subcommands.  Lengths are in units of
/// sigma where noted; the default detector matches the published protocol
/// (1000 pixels of width 0.008 sigma, centered on the source).
struct RunConfig {
  std::string model = "soft"; ///< soft | hard | both (both: scan only)
  double sigma = 1.0;
  std::vector<double> snr_list = {25.0, 100.0, 400.0};
  std::string d_grid_spec = "log:0.01:5:60"; ///< comma list or log:min:max:count, in sigma units
  double xc = 0.0;
  int pixels = 1000;
  double pixel_width = 0.008; ///< in sigma units
  int realizations = 1000;
  int samples = 500;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string format = "csv"; ///< csv | json (table output)
  unsigned threads = 0;
  int demo_curves = 8;

  std::vector<double> d_grid() const; ///< parsed d values, sigma units
  Aperture aperture_for(const std::string& m) const;
  std::vector<std::string> models() const;
  double half_width() const { return 0.5 * pixels * pixel_width * sigma; }
};

/// Load a flat key=value config file into `config`.  Keys are the long
/// option names without dashes prefix (model, sigma, snr, d-grid, xc,
/// pixels, pixel-width, realizations, samples, seed, out, format, threads,
/// curves); '#' starts a comment.  Throws std::invalid_argument with a
/// line diagnostic on unknown keys or malformed values.
void apply_config_file(const std::string& path, RunConfig& config);

/// Fisher-information scan over (model, snr, d); returns written file paths.
std::vector<std::string> run_fisher_scan(const RunConfig& config);

/// Monte Carlo experiment per (snr, d); per-realization CSV plus a JSON
/// summary.  Partial results are written before a protocol failure is
/// rethrown.
std::vector<std::string> run_simulate(const RunConfig& config);

/// Analytic variance-sweep curve plus a few single-realization empirical
/// curves, for external plotting.
std::vector<std::string> run_sweep_demo(const RunConfig& config);

} // namespace srhd
