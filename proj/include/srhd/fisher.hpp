#pragma once
#include <array>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include <srhd/detector.hpp>
#include <srhd/optics.hpp>

namespace srhd {

enum class FisherMethod { DenseNumeric, Decomposed, Approximation };

/// 2x2 Fisher information over theta = (d, x_c), units 1/length^2.
/// Index 0 is the half-separation, index 1 the centroid.
struct FisherResult {
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Zero();
  /// Per-term breakdown {F1, F2, F3} when computed by decomposition;
  /// matrix == F1 + F2 + F3 elementwise.
  std::optional<std::array<Eigen::Matrix2d, 3>> terms;
  FisherMethod method = FisherMethod::DenseNumeric;

  // Named contributions (Fig. 2/3 curve families).
  double d_subrayleigh() const { return (*terms)[0](0, 0); } ///< F1_dd
  double d_rayleigh() const { return (*terms)[1](0, 0); }    ///< F2_dd
  double c_subrayleigh() const { return (*terms)[2](1, 1); } ///< F3_cc
  double c_rayleigh() const { return (*terms)[1](1, 1); }    ///< F2_cc
};

/// Integration domain for the decomposed (continuous-limit) evaluation.
/// FullLine uses the closed-form autocorrelation inner products; Window
/// restricts every scalar product to [lo, hi], the continuum limit of a
/// detector covering exactly that interval (required when cross-checking
/// against a dense grid computation, since the slowly decaying hard-model
/// transfer function makes the grid window physically significant).
struct FullLine {};
struct Window {
  double lo;
  double hi;
};
using Domain = std::variant<FullLine, Window>;

struct ThetaPair {
  double d;
  double xc;
};

/// Derivative scheme for the dense path: analytic differentiation of the
/// low-rank Gamma factors (default), or central finite differences of the
/// full covariance (test oracle).
struct Analytic {};
struct FiniteDiff {
  double step = 1e-5;
};
using DerivativeScheme = std::variant<Analytic, FiniteDiff>;

/// Covariance model parametrized over theta; the grid follows the centroid
/// (domain [xc - half_width, xc + half_width]).
struct CovarianceBuilder {
  Aperture aperture;
  double snr = 100.0;
  double half_width = 4.0;
  int pixel_count = 1000;

  DetectorGrid grid_at(double xc) const {
    return DetectorGrid(xc, half_width, pixel_count);
  }
  CovarianceModel build(const ThetaPair& theta) const;
};

/// General zero-mean Gaussian Fisher information,
/// F_jj' = 1/2 Tr(C^-1 dC_j C^-1 dC_j'), evaluated with dense linear
/// algebra on the pixel grid.  Requires d > 0 and M <= 2000.
FisherResult fisher_dense(const CovarianceBuilder& builder,
                          const ThetaPair& theta,
                          const DerivativeScheme& scheme = Analytic{});

/// Continuous-limit three-term decomposition: variance changes (F1),
/// eigenvector changes in the orthogonal complement (F2), and eigenvector
/// changes within the principal subspace (F3).  All scalar products are
/// integrals over `domain`.  Requires d > 0.
FisherResult fisher_decomposed(const Aperture& aperture, double snr,
                               const ThetaPair& theta,
                               const Domain& domain = FullLine{});

/// Closed-form sub-Rayleigh approximation for separation estimation:
/// (snr/sigma^2) f(sqrt(snr) d/sigma) with f(t) = 2t^2/(1+t^2)^2.
double fisher_d_subrayleigh_approx(double snr, double d, double sigma);

/// Closed-form sub-Rayleigh approximation for centroid estimation:
/// (snr/sigma^2) (1+1/snr)^-1 (1 + snr d^2/sigma^2)^-1.
double fisher_c_subrayleigh_approx(double snr, double d, double sigma);

/// Analytic asymptote values used as regression targets.
struct FisherAsymptotes {
  /// Large-d plateau of both Rayleigh terms: snr / (sigma^2 (1 + 2/snr)).
  double large_d_saturation;
  /// Quadratic coefficient of F2_dd at small d:
  /// (snr/(1+1/snr)) (int u''^2 dx - 1/sigma^4); the bracket is 2/sigma^4
  /// for the soft model and 4/(5 sigma^4) for the hard model.
  double small_d_R_coefficient;
  /// Leading small-d behavior of the centroid Rayleigh term.
  std::string small_d_cR_scaling;
};

FisherAsymptotes fisher_asymptotes(double snr, double sigma,
                                   const Aperture& aperture);

} // namespace srhd
