#pragma once
#include <vector>

#include <srhd/errors.hpp>

namespace srhd {

enum class ApertureModel { Soft, Hard };

enum class ModeSign { Plus, Minus };

/// Normalized imaging transfer function with spread parameter sigma.
///
/// Soft model: Gaussian (2/pi sigma^2)^{1/4} exp(-x^2/sigma^2).
/// Hard model: 3^{1/4}/sqrt(pi sigma) sinc(sqrt(3) x/sigma).
/// Both satisfy int u^2 dx = 1 and sigma^2 int u'^2 dx = 1.
struct Aperture {
  ApertureModel model = ApertureModel::Soft;
  double sigma = 1.0;

  Aperture() = default;
  Aperture(ApertureModel m, double s);

  double u(double x) const;        ///< transfer function
  double u_prime(double x) const;  ///< first derivative, closed form
  double u_second(double x) const; ///< second derivative, closed form

  /// Autocorrelation g(s) = int u(x) u(x-s) dx and its derivatives
  /// (order 0..2), in closed form.  Soft: exp(-s^2/2sigma^2).  Hard: the
  /// flat band-limited spectrum gives sinc(sqrt(3) s/sigma) exactly.
  double autocorr(double s, int order = 0) const;

  /// 1 - g(s), computed without cancellation for small s.
  double one_minus_autocorr(double s) const;
};

/// transfer function value u(x)
double transfer(const Aperture& aperture, double x);

/// closed-form derivative u'(x)
double transfer_derivative(const Aperture& aperture, double x);

/// Overlap chi = int u(x+d) u(x-d) dx between the displaced transfer
/// functions.  Soft model in closed form; hard model by adaptive quadrature
/// on [-200 sigma, 200 sigma] plus an analytic correction for the slowly
/// decaying tail (absolute accuracy 1e-10).
double overlap(const Aperture& aperture, double d);

/// Karhunen-Loeve eigenvalues of the binary-source coherence function:
/// gamma_(+/-) = (1 +/- chi)/2.
struct GammaPair {
  double plus;
  double minus;
};
GammaPair eigenvalues_gamma(double chi);

/// Normalized detection mode v(x) = -sigma u'(x); int v^2 dx = 1.
double detection_mode(const Aperture& aperture, double x);

/// Weighted point source.  Weights sum to one.
struct SourcePoint {
  double position = 0.0;
  double weight = 1.0;
};

struct SourceModel {
  std::vector<SourcePoint> points;

  /// Two equally bright points at x_c +/- d.
  static SourceModel binary(double halfseparation, double centroid);

  /// Single unit-weight point.
  static SourceModel single(double position);

  bool is_binary() const { return points.size() == 2; }
  /// Half-separation of a binary source (positions (x1 - x2)/2).
  double halfseparation() const;
  /// Weighted centroid.
  double centroid() const;
};

/// Coherence function Gamma(x, x') = sum_l w_l u(x-x_l) u(x'-x_l),
/// normalized by the total signal power.
double coherence(const SourceModel& source, const Aperture& aperture, double x,
                 double xprime);

/// Symmetric / antisymmetric eigenmode of the binary-source coherence
/// function, e_(+/-)(x) = [u1(x) +/- u2(x)] / sqrt(2(1 +/- chi)).
/// Throws DegenerateModeError for the minus sign when chi >= 1 - 1e-14;
/// callers in the d -> 0 regime should use detection_mode instead.
double eigenmode(const Aperture& aperture, const SourceModel& source,
                 ModeSign sign, double x);

/// Parameter derivatives of the eigenmodes, closed form.  `wrt` selects the
/// half-separation (0) or the centroid (1).
double eigenmode_derivative(const Aperture& aperture,
                            const SourceModel& source, ModeSign sign, int wrt,
                            double x);

} // namespace srhd
