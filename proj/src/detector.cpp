#include <srhd/detector.hpp>

#include <cmath>
#include <stdexcept>

namespace srhd {

DetectorGrid::DetectorGrid(double c, double hw, int m)
    : center(c), half_width(hw), pixel_count(m) {
  if (!(hw > 0.0) || m < 2) {
    throw std::invalid_argument("DetectorGrid: need half_width > 0 and M >= 2");
  }
}

Eigen::VectorXd DetectorGrid::centers() const {
  Eigen::VectorXd x(pixel_count);
  for (int i = 0; i < pixel_count; ++i) x[i] = pixel_center(i);
  return x;
}

Eigen::MatrixXd GammaFactor::dense() const {
  Eigen::MatrixXd g = pitch * modes * weights.asDiagonal() * modes.transpose();
  // blocked products are not bit-symmetric; mirror the average so
  // g(i,j) and g(j,i) are the same floating-point value
  return 0.5 * (g + g.transpose()).eval();
}

double GammaFactor::trace() const {
  double acc = 0.0;
  for (Eigen::Index l = 0; l < weights.size(); ++l) {
    acc += weights[l] * modes.col(l).squaredNorm();
  }
  return pitch * acc;
}

GammaFactor build_gamma(const SourceModel& source, const Aperture& aperture,
                        const DetectorGrid& grid) {
  const int M = grid.pixel_count;
  const int L = static_cast<int>(source.points.size());
  GammaFactor f;
  f.pitch = grid.pitch();
  f.modes.resize(M, L);
  f.weights.resize(L);
  for (int l = 0; l < L; ++l) {
    f.weights[l] = source.points[l].weight;
    for (int i = 0; i < M; ++i) {
      f.modes(i, l) = aperture.u(grid.pixel_center(i) - source.points[l].position);
    }
  }
  return f;
}

Eigen::MatrixXd CovarianceModel::cov_dense() const {
  Eigen::MatrixXd c = snr * gamma.dense();
  c.diagonal().array() += 1.0;
  return c;
}

CovarianceModel build_covariance(const SourceModel& source,
                                 const Aperture& aperture,
                                 const DetectorGrid& grid, double snr) {
  return build_covariance(build_gamma(source, aperture, grid), grid, snr);
}

CovarianceModel build_covariance(GammaFactor gamma, const DetectorGrid& grid,
                                 double snr) {
  if (!(snr > 0.0)) throw std::invalid_argument("build_covariance: snr must be > 0");
  return {snr, grid, std::move(gamma)};
}

PrincipalComponents principal_components(const SourceModel& source,
                                         const Aperture& aperture,
                                         const DetectorGrid& grid, double snr) {
  if (!source.is_binary()) {
    throw std::invalid_argument("principal_components: binary source required");
  }
  const double d = source.halfseparation();
  if (aperture.one_minus_autocorr(2.0 * d) < 1e-14) {
    throw DegenerateModeError("principal_components: d = 0 degenerates e_-");
  }
  const int M = grid.pixel_count;
  const double sq_pitch = std::sqrt(grid.pitch());

  Eigen::MatrixXd v(M, 2);
  for (int i = 0; i < M; ++i) {
    double x = grid.pixel_center(i);
    v(i, 0) = sq_pitch * eigenmode(aperture, source, ModeSign::Plus, x);
    v(i, 1) = sq_pitch * eigenmode(aperture, source, ModeSign::Minus, x);
  }
  // Gram-Schmidt in the discrete inner product; Riemann-sum orthogonality
  // error would otherwise leak into downstream comparisons.
  v.col(0).normalize();
  v.col(1) -= v.col(0).dot(v.col(1)) * v.col(0);
  v.col(1).normalize();

  double chi = aperture.autocorr(2.0 * d);
  GammaPair g = eigenvalues_gamma(chi);
  PrincipalComponents pc;
  pc.vectors = std::move(v);
  pc.variances.resize(2);
  pc.variances << snr * g.plus + 1.0, snr * g.minus + 1.0;
  return pc;
}

} // namespace srhd
