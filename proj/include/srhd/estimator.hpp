#pragma once
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include <srhd/montecarlo.hpp>
#include <srhd/optics.hpp>

namespace srhd {

/// Variance of the displaced-detection-mode quadrature as a function of the
/// mode displacement xi.
struct VarianceCurve {
  Eigen::VectorXd xi;
  Eigen::VectorXd values;
  int n_samples = 0; ///< 0 marks an analytic (infinite-N) curve
};

/// V_xi = snr sum_l w_l |int u_l(x) v(x - xi) dx|^2 + 1, in closed form.
VarianceCurve analytic_variance_curve(const SourceModel& source,
                                      const Aperture& aperture, double snr,
                                      const Eigen::VectorXd& xi_grid);

/// Analytic variance at xi = centroid, as a function of the half-separation;
/// the left-hand side of the separation inversion.
double analytic_variance_at_centroid(const Aperture& aperture, double snr,
                                     double d);

/// Project every sample onto the displaced detection modes and return the
/// unbiased sample variance per displacement.  The xi grid must lie within
/// the detector domain.
VarianceCurve mode_variance_sweep(const SampleSet& set,
                                  const Aperture& aperture,
                                  const Eigen::VectorXd& xi_grid);

enum class CurveQuality { CleanTwoLobe, FallbackSmoothed };

struct CentroidEstimate {
  double centroid = 0.0; ///< refined location of the inter-lobe minimum
  double v_min = 0.0;    ///< refined variance at the minimum
  CurveQuality quality = CurveQuality::CleanTwoLobe;
};

/// Locate the local minimum between the two variance lobes and refine it by
/// parabolic interpolation.  Falls back to the smoothed central minimum when
/// the two-lobe test fails; throws EstimationError when the curve has no
/// interior minimum.
CentroidEstimate estimate_centroid(const VarianceCurve& curve);

enum class InversionMethod { ApproxFormula, ExactInversion };

/// Invert the variance at the estimated centroid into a half-separation.
/// ApproxFormula: sigma sqrt((V-1)/snr).  ExactInversion: bisection of the
/// analytic centroid-variance curve on [0, sigma] (its monotone interval).
/// Values at or below the noise floor map to 0.
double estimate_halfseparation(double v_at_centroid, double snr,
                               const Aperture& aperture,
                               InversionMethod method = InversionMethod::ExactInversion);

/// Monte Carlo protocol for a repeated-experiment run.
struct Protocol {
  int realizations = 1000;
  int samples = 500;
  DetectorGrid grid;
  SourceModel source;
  Aperture aperture;
  double snr = 100.0;
  std::uint64_t seed = 1;
  InversionMethod method = InversionMethod::ExactInversion;
  double sweep_half_width = 0.0; ///< 0 -> 2 sigma
  double sweep_step = 0.0;       ///< 0 -> 0.02 sigma
  unsigned threads = 0;          ///< 0 -> hardware concurrency
};

struct RealizationRecord {
  std::uint64_t stream = 0;
  double centroid = 0.0;
  double halfsep = 0.0;
  double v_min = 0.0;
  CurveQuality quality = CurveQuality::CleanTwoLobe;
};

/// Summary statistics for one estimated parameter across realizations.
struct ParameterStats {
  double mean = 0.0;
  double stddev = 0.0;
  double bias = 0.0;          ///< mean - truth
  double mean_se = 0.0;       ///< stddev / sqrt(R)
  double precision = 0.0;     ///< 1 / (N stddev^2), per-sample units
  double precision_err = 0.0; ///< delta-method error bar on the precision
};

struct ExperimentResult {
  std::vector<RealizationRecord> records; ///< successful realizations, in stream order
  int failed = 0;
  int fallback_count = 0;
  ParameterStats halfsep;
  ParameterStats centroid;
};

/// One realization of the protocol on RNG substream `stream`.
/// Throws EstimationError when no estimate can be formed.
RealizationRecord run_single_realization(const Protocol& protocol,
                                         std::uint64_t stream);

/// All realizations, without the failure-threshold check.
ExperimentResult collect_realizations(const Protocol& protocol);

/// Aggregate statistics over collected records.
void summarize(const Protocol& protocol, ExperimentResult& result);

/// Full protocol run; throws ProtocolError when more than 20% of the
/// realizations fail.
ExperimentResult run_experiment(const Protocol& protocol);

} // namespace srhd
