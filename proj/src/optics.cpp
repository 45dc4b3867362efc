#include <srhd/optics.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <srhd/quadrature.hpp>

namespace srhd {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt3 = std::sqrt(3.0);

// sinc(t) = sin(t)/t and derivatives; series below |t| = 1e-4 to avoid
// cancellation near the removable singularity.
double sinc(double t) {
  if (std::abs(t) < 1e-4) {
    double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

double sinc_d1(double t) {
  if (std::abs(t) < 1e-4) {
    double t2 = t * t;
    return t * (-1.0 / 3.0 + t2 / 30.0);
  }
  return std::cos(t) / t - std::sin(t) / (t * t);
}

double sinc_d2(double t) {
  if (std::abs(t) < 1e-4) {
    double t2 = t * t;
    return -1.0 / 3.0 + t2 / 10.0 - t2 * t2 / 168.0;
  }
  double t2 = t * t;
  return -std::sin(t) / t - 2.0 * std::cos(t) / t2 +
         2.0 * std::sin(t) / (t2 * t);
}

// 1 - sinc(t) without cancellation for small |t|; the three-term series
// keeps the relative error below ~2e-11 at the branch point.
double one_minus_sinc(double t) {
  if (std::abs(t) < 0.1) {
    double t2 = t * t;
    return t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0));
  }
  return 1.0 - std::sin(t) / t;
}

// Analytic tail of int_{|x|>L} u(x+d) u(x-d) dx for the hard model.
// The product of the two sincs splits into a non-oscillating 1/x^2 part,
// integrated exactly, and an oscillating part expanded by repeated
// integration by parts (remainder ~ 1/(k^4 L^5), far below 1e-10 at L=200).
double hard_overlap_tail(double sigma, double d, double L) {
  double a = kSqrt3 / sigma;
  double k = 2.0 * a;
  double t0 = (d > 1e-8 * sigma) ? std::atanh(d / L) / d : 1.0 / L;
  double x2 = L * L - d * d;
  double h0 = 1.0 / x2;
  double h1 = -2.0 * L / (x2 * x2);
  double h2 = (6.0 * L * L + 2.0 * d * d) / (x2 * x2 * x2);
  double h3 = -24.0 * L * (L * L + d * d) / (x2 * x2 * x2 * x2);
  double s = std::sin(k * L), c = std::cos(k * L);
  double iosc =
      -h0 * s / k - h1 * c / (k * k) + h2 * s / (k * k * k) + h3 * c / (k * k * k * k);
  return sigma / (kSqrt3 * kPi) * (std::cos(k * d) * t0 - iosc);
}

} // namespace

Aperture::Aperture(ApertureModel m, double s) : model(m), sigma(s) {
  if (!(s > 0.0)) throw std::invalid_argument("Aperture: sigma must be > 0");
}

double Aperture::u(double x) const {
  if (model == ApertureModel::Soft) {
    return std::pow(2.0 / (kPi * sigma * sigma), 0.25) *
           std::exp(-x * x / (sigma * sigma));
  }
  return std::pow(3.0, 0.25) / std::sqrt(kPi * sigma) * sinc(kSqrt3 * x / sigma);
}

double Aperture::u_prime(double x) const {
  if (model == ApertureModel::Soft) {
    return -(2.0 * x / (sigma * sigma)) * u(x);
  }
  double a = kSqrt3 / sigma;
  return std::pow(3.0, 0.25) / std::sqrt(kPi * sigma) * a * sinc_d1(a * x);
}

double Aperture::u_second(double x) const {
  if (model == ApertureModel::Soft) {
    double s2 = sigma * sigma;
    return (-2.0 / s2 + 4.0 * x * x / (s2 * s2)) * u(x);
  }
  double a = kSqrt3 / sigma;
  return std::pow(3.0, 0.25) / std::sqrt(kPi * sigma) * a * a * sinc_d2(a * x);
}

double Aperture::autocorr(double s, int order) const {
  double s2 = sigma * sigma;
  if (model == ApertureModel::Soft) {
    double g = std::exp(-s * s / (2.0 * s2));
    switch (order) {
      case 0: return g;
      case 1: return -(s / s2) * g;
      case 2: return (s * s / (s2 * s2) - 1.0 / s2) * g;
    }
  } else {
    double a = kSqrt3 / sigma;
    switch (order) {
      case 0: return sinc(a * s);
      case 1: return a * sinc_d1(a * s);
      case 2: return a * a * sinc_d2(a * s);
    }
  }
  throw std::invalid_argument("Aperture::autocorr: order must be 0..2");
}

double Aperture::one_minus_autocorr(double s) const {
  if (model == ApertureModel::Soft) {
    return -std::expm1(-s * s / (2.0 * sigma * sigma));
  }
  return one_minus_sinc(kSqrt3 * s / sigma);
}

double transfer(const Aperture& aperture, double x) { return aperture.u(x); }

double transfer_derivative(const Aperture& aperture, double x) {
  return aperture.u_prime(x);
}

double overlap(const Aperture& aperture, double d) {
  if (d < 0.0) throw std::invalid_argument("overlap: d must be >= 0");
  if (aperture.model == ApertureModel::Soft) {
    double s2 = aperture.sigma * aperture.sigma;
    return std::exp(-2.0 * d * d / s2);
  }
  double L = 200.0 * aperture.sigma;
  auto integrand = [&](double x) {
    return aperture.u(x + d) * aperture.u(x - d);
  };
  IntegrationResult r = integrate(integrand, -L, L, {.abs_tol = 1e-11});
  return r.value + hard_overlap_tail(aperture.sigma, d, L);
}

GammaPair eigenvalues_gamma(double chi) {
  if (std::abs(chi) > 1.0 + 1e-12) {
    throw std::invalid_argument("eigenvalues_gamma: |chi| must be <= 1");
  }
  return {0.5 * (1.0 + chi), 0.5 * (1.0 - chi)};
}

double detection_mode(const Aperture& aperture, double x) {
  return -aperture.sigma * aperture.u_prime(x);
}

SourceModel SourceModel::binary(double halfseparation, double centroid) {
  if (halfseparation < 0.0) {
    throw std::invalid_argument("SourceModel::binary: d must be >= 0");
  }
  return {{{centroid + halfseparation, 0.5}, {centroid - halfseparation, 0.5}}};
}

SourceModel SourceModel::single(double position) {
  return {{{position, 1.0}}};
}

double SourceModel::halfseparation() const {
  if (!is_binary()) {
    throw std::invalid_argument("halfseparation: binary source required");
  }
  return 0.5 * (points[0].position - points[1].position);
}

double SourceModel::centroid() const {
  double num = 0.0, den = 0.0;
  for (const auto& p : points) {
    num += p.weight * p.position;
    den += p.weight;
  }
  return num / den;
}

double coherence(const SourceModel& source, const Aperture& aperture, double x,
                 double xprime) {
  double acc = 0.0;
  for (const auto& p : source.points) {
    acc += p.weight * aperture.u(x - p.position) * aperture.u(xprime - p.position);
  }
  return acc;
}

namespace {

struct BinaryModes {
  double d, xc, chi, one_minus_chi;
  double norm_plus, norm_minus; // sqrt(2(1 +/- chi))
};

BinaryModes binary_modes(const Aperture& aperture, const SourceModel& source,
                         bool need_minus) {
  if (!source.is_binary()) {
    throw std::invalid_argument("eigenmode: binary source required");
  }
  BinaryModes m;
  m.d = source.halfseparation();
  m.xc = source.centroid();
  m.chi = aperture.autocorr(2.0 * m.d);
  m.one_minus_chi = aperture.one_minus_autocorr(2.0 * m.d);
  if (need_minus && m.one_minus_chi < 1e-14) {
    throw DegenerateModeError(
        "eigenmode: antisymmetric mode degenerate at d ~ 0; "
        "use detection_mode for the d -> 0 limit");
  }
  m.norm_plus = std::sqrt(2.0 * (1.0 + m.chi));
  m.norm_minus = std::sqrt(2.0 * m.one_minus_chi);
  return m;
}

} // namespace

double eigenmode(const Aperture& aperture, const SourceModel& source,
                 ModeSign sign, double x) {
  BinaryModes m = binary_modes(aperture, source, sign == ModeSign::Minus);
  double u1 = aperture.u(x - m.xc - m.d);
  double u2 = aperture.u(x - m.xc + m.d);
  if (sign == ModeSign::Plus) return (u1 + u2) / m.norm_plus;
  return (u1 - u2) / m.norm_minus;
}

double eigenmode_derivative(const Aperture& aperture,
                            const SourceModel& source, ModeSign sign, int wrt,
                            double x) {
  if (wrt != 0 && wrt != 1) {
    throw std::invalid_argument("eigenmode_derivative: wrt must be 0 (d) or 1 (xc)");
  }
  BinaryModes m = binary_modes(aperture, source, sign == ModeSign::Minus);
  double u1p = aperture.u_prime(x - m.xc - m.d);
  double u2p = aperture.u_prime(x - m.xc + m.d);
  double chi_d = 2.0 * aperture.autocorr(2.0 * m.d, 1); // d chi / d d
  if (sign == ModeSign::Plus) {
    double e = (aperture.u(x - m.xc - m.d) + aperture.u(x - m.xc + m.d)) / m.norm_plus;
    if (wrt == 0) return (-u1p + u2p) / m.norm_plus - e * chi_d / (2.0 * (1.0 + m.chi));
    return (-u1p - u2p) / m.norm_plus;
  }
  double e = (aperture.u(x - m.xc - m.d) - aperture.u(x - m.xc + m.d)) / m.norm_minus;
  if (wrt == 0) return (-u1p - u2p) / m.norm_minus + e * chi_d / (2.0 * m.one_minus_chi);
  return (-u1p + u2p) / m.norm_minus;
}

} // namespace srhd
