#pragma once
#include <Eigen/Dense>

#include <srhd/optics.hpp>

namespace srhd {

/// Uniform pixel grid on [center - half_width, center + half_width].
/// Pixel i is centered at center - half_width + (i + 1/2) * pitch.
struct DetectorGrid {
  double center = 0.0;
  double half_width = 4.0;
  int pixel_count = 1000;

  DetectorGrid() = default;
  DetectorGrid(double c, double hw, int m);

  double pitch() const { return 2.0 * half_width / pixel_count; }
  double pixel_center(int i) const {
    return center - half_width + (i + 0.5) * pitch();
  }
  Eigen::VectorXd centers() const;

  /// Validity regime is pitch << sigma; false when pitch > 0.1 sigma.
  bool resolves(double sigma) const { return pitch() <= 0.1 * sigma; }
};

/// Gamma in factored low-rank form: Gamma = pitch * sum_l w_l m_l m_l^T
/// with m_l the grid samples of u(x - x_l).  All downstream math is
/// O(M * L); dense materialization only on demand.
struct GammaFactor {
  Eigen::MatrixXd modes;    ///< M x L samples of the displaced transfer functions
  Eigen::VectorXd weights;  ///< L source weights
  double pitch = 0.0;

  Eigen::MatrixXd dense() const;
  double trace() const;
};

GammaFactor build_gamma(const SourceModel& source, const Aperture& aperture,
                        const DetectorGrid& grid);

/// Quadrature covariance C = snr * Gamma + I (kept factored).
struct CovarianceModel {
  double snr = 1.0;
  DetectorGrid grid;
  GammaFactor gamma;

  Eigen::MatrixXd gamma_dense() const { return gamma.dense(); }
  Eigen::MatrixXd cov_dense() const;
};

CovarianceModel build_covariance(const SourceModel& source,
                                 const Aperture& aperture,
                                 const DetectorGrid& grid, double snr);
CovarianceModel build_covariance(GammaFactor gamma, const DetectorGrid& grid,
                                 double snr);

/// The two principal components of the binary-source covariance on the
/// grid: discretized eigenmodes (re-orthonormalized in the discrete inner
/// product) and their variances snr * gamma_(+/-) + 1.
struct PrincipalComponents {
  Eigen::VectorXd variances;  ///< one per component, symmetric mode first
  Eigen::MatrixXd vectors;    ///< M x L, orthonormal columns
};

PrincipalComponents principal_components(const SourceModel& source,
                                         const Aperture& aperture,
                                         const DetectorGrid& grid, double snr);

} // namespace srhd
