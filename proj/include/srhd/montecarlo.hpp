#pragma once
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include <srhd/detector.hpp>
#include <srhd/optics.hpp>

namespace srhd {

/// Descriptors recorded with a sample set, sufficient to rebuild the model.
struct SampleMeta {
  ApertureModel model = ApertureModel::Soft;
  double sigma = 1.0;
  double halfseparation = 0.0;
  double centroid = 0.0;
  double snr = 1.0;
};

/// N quadrature vectors drawn from the zero-mean Gaussian model.
struct SampleSet {
  Eigen::MatrixXd samples; ///< N x M, one quadrature vector per row
  DetectorGrid grid;
  std::uint64_t seed = 0;
  SampleMeta meta;

  Eigen::Index count() const { return samples.rows(); }
};

/// Draw `n_samples` quadrature vectors.  Each sample is
///   q_i = sqrt(2 pitch) Re[sum_l beta_l u(x_i - x_l)] + n_i
/// with complex amplitudes beta_l of variance snr * w_l (real and imaginary
/// parts snr * w_l / 2 each) and unit-variance pixel noise n_i, so the
/// covariance is exactly snr * Gamma + I at O(M L) cost per sample.
/// `stream` selects a decorrelated substream of `seed` (one per
/// realization); identical (seed, stream) reproduces the set bit for bit.
SampleSet sample_quadratures(const SourceModel& source,
                             const Aperture& aperture,
                             const DetectorGrid& grid, double snr,
                             int n_samples, std::uint64_t seed,
                             std::uint64_t stream = 0);

/// Unbiased sample covariance (divisor N-1) of the rows.  N >= 2.
Eigen::MatrixXd empirical_covariance(const SampleSet& set);

/// Binary dump: magic + version header, model descriptors, then row-major
/// little-endian doubles.
void write_samples(const std::string& path, const SampleSet& set);
SampleSet read_samples(const std::string& path);

} // namespace srhd
