#include <doctest.h>

#include <cmath>
#include <numbers>

#include <srhd/optics.hpp>
#include <srhd/quadrature.hpp>

using namespace srhd;

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt3 = std::sqrt(3.0);

const Aperture kSoft{ApertureModel::Soft, 1.0};
const Aperture kHard{ApertureModel::Hard, 1.0};

// Truncation endpoint aligned with a node of sin(2 sqrt(3) L) so the
// oscillatory part of the hard-model tails vanishes; only the smooth
// 1/x^2 part remains and is added analytically below.
double node_aligned(double target, double sigma) {
  double halfperiod = kPi * sigma / (2.0 * kSqrt3);
  return std::round(target / halfperiod) * halfperiod;
}

// analytic 1/x^2 tail of int_{|x|>L} u(x-c)^2 dx for the hard model
double hard_u2_tail(double sigma, double c, double L) {
  return sigma / (2.0 * kSqrt3 * kPi) * (1.0 / (L - c) + 1.0 / (L + c));
}

// analytic tail of int_{|x|>L} u(x-d) u(x+d) dx (symmetric pair)
double hard_cross_tail(double sigma, double d, double L) {
  double a = kSqrt3 / sigma;
  double t0 = d > 1e-12 ? std::atanh(d / L) / d : 1.0 / L;
  return sigma / (kSqrt3 * kPi) * std::cos(2.0 * a * d) * t0;
}

double quad(const std::function<double(double)>& f, double a, double b,
            double tol = 1e-12) {
  return integrate(f, a, b, {.abs_tol = tol, .rel_tol = 1e-13}).value;
}

} // namespace

TEST_CASE("transfer function values at the origin") {
  CHECK(kSoft.u(0.0) == doctest::Approx(std::pow(2.0 / kPi, 0.25)).epsilon(1e-12));
  CHECK(kSoft.u(0.0) == doctest::Approx(0.8932438417).epsilon(1e-9));
  CHECK(kHard.u(0.0) ==
        doctest::Approx(std::pow(3.0, 0.25) / std::sqrt(kPi)).epsilon(1e-12));
  CHECK(kHard.u(0.0) == doctest::Approx(0.742515249286).epsilon(1e-9));
}

TEST_CASE("transfer function is even") {
  for (double x : {0.1, 0.7, 1.3, 2.9, 11.0}) {
    CHECK(kSoft.u(x) == doctest::Approx(kSoft.u(-x)).epsilon(1e-15));
    CHECK(kHard.u(x) == doctest::Approx(kHard.u(-x)).epsilon(1e-15));
  }
}

TEST_CASE("transfer derivative: closed form vs finite differences") {
  CHECK(transfer_derivative(kSoft, 0.0) == 0.0);
  CHECK(transfer_derivative(kHard, 0.0) == 0.0);
  CHECK(transfer_derivative(kSoft, 0.5) ==
        doctest::Approx(-2.0 * 0.5 * kSoft.u(0.5)).epsilon(1e-13));

  const double h = 1e-6;
  for (const Aperture& ap : {kSoft, kHard}) {
    for (double x : {0.05, 0.4, 1.1, 3.3}) {
      double fd = (ap.u(x + h) - ap.u(x - h)) / (2.0 * h);
      CHECK(ap.u_prime(x) == doctest::Approx(fd).epsilon(1e-7));
      double fd2 = (ap.u_prime(x + h) - ap.u_prime(x - h)) / (2.0 * h);
      CHECK(ap.u_second(x) == doctest::Approx(fd2).epsilon(1e-6));
    }
  }
}

TEST_CASE("sinc branches join smoothly at the series cutoff") {
  Aperture hard(ApertureModel::Hard, 1.0);
  for (double t : {0.9999e-4, 1.0001e-4}) {
    double x = t / kSqrt3;
    CHECK(hard.u(x) == doctest::Approx(hard.u(x * (1 + 1e-9))).epsilon(1e-10));
  }
  // derivative continuity across the cutoff
  double xa = 0.99e-4 / kSqrt3, xb = 1.01e-4 / kSqrt3;
  CHECK(hard.u_prime(xa) == doctest::Approx(hard.u_prime(xb)).epsilon(2e-2));
}

TEST_CASE("normalization: int u^2 = 1") {
  CHECK(quad([&](double x) { return kSoft.u(x) * kSoft.u(x); }, -40, 40) ==
        doctest::Approx(1.0).epsilon(1e-10));
  // hard model: overlap(0) is the tail-corrected quadrature of u^2
  CHECK(overlap(kHard, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("spread definition: sigma^2 int u'^2 = 1") {
  for (double sigma : {1.0, 0.7}) {
    Aperture soft(ApertureModel::Soft, sigma);
    double i = quad([&](double x) { return soft.u_prime(x) * soft.u_prime(x); },
                    -40 * sigma, 40 * sigma);
    CHECK(sigma * sigma * i == doctest::Approx(1.0).epsilon(1e-8));

    Aperture hard(ApertureModel::Hard, sigma);
    double L = node_aligned(200.0 * sigma, sigma);
    double q = quad([&](double x) { return hard.u_prime(x) * hard.u_prime(x); },
                    -L, L, 1e-11);
    double tail = kSqrt3 / (kPi * sigma * L); // 1/x^2 part of u'^2 beyond L
    CHECK(sigma * sigma * (q + tail) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("overlap closed form and quadrature routes agree") {
  CHECK(overlap(kSoft, 0.0) == 1.0);
  CHECK(overlap(kSoft, 0.5) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(overlap(kSoft, 0.1) == doctest::Approx(std::exp(-0.02)).epsilon(1e-12));
  // small-d expansion 1 - 2 d^2/sigma^2 within O(d^4)
  CHECK(overlap(kSoft, 0.1) == doctest::Approx(0.9802).epsilon(5e-5));

  // hard model: adaptive quadrature + tail correction vs the band-limited
  // autocorrelation identity sinc(2 sqrt(3) d / sigma)
  for (double d : {0.0, 0.05, 0.1, 0.3, 1.0, 2.0, 4.0}) {
    double closed = kHard.autocorr(2.0 * d);
    CHECK(overlap(kHard, d) == doctest::Approx(closed).epsilon(5e-9));
  }
  CHECK_THROWS_AS(overlap(kSoft, -0.1), std::invalid_argument);
}

TEST_CASE("overlap bounds and monotonicity") {
  double prev_soft = 1.1, prev_hard = 1.1;
  for (int i = 0; i <= 20; ++i) {
    double d = i * 0.05;
    double cs = overlap(kSoft, d);
    CHECK(cs > 0.0);
    CHECK(cs <= 1.0);
    double ch = kHard.autocorr(2.0 * d);
    CHECK(std::abs(ch) <= 1.0);
    if (d <= 1.0 && i > 0) {
      CHECK(cs < prev_soft);
      CHECK(ch < prev_hard);
    }
    prev_soft = cs;
    prev_hard = ch;
  }
}

TEST_CASE("small-d expansion regression bound") {
  // frozen constants: max |chi - (1 - 2d^2)| / d^4 over (0, 0.3] is
  // 2.0 (soft) and 1.2 (hard); asserted with a 5% margin
  for (int i = 1; i <= 30; ++i) {
    double d = 0.01 * i;
    CHECK(std::abs(overlap(kSoft, d) - (1.0 - 2.0 * d * d)) <= 2.1 * d * d * d * d);
    CHECK(std::abs(overlap(kHard, d) - (1.0 - 2.0 * d * d)) <= 1.26 * d * d * d * d);
  }
}

TEST_CASE("gamma eigenvalues") {
  GammaPair g = eigenvalues_gamma(1.0);
  CHECK(g.plus == 1.0);
  CHECK(g.minus == 0.0);
  g = eigenvalues_gamma(0.0);
  CHECK(g.plus == 0.5);
  CHECK(g.minus == 0.5);
  g = eigenvalues_gamma(0.9802);
  CHECK(g.plus == doctest::Approx(0.9901));
  CHECK(g.minus == doctest::Approx(0.0099));
  CHECK(g.plus + g.minus == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(eigenvalues_gamma(1.5), std::invalid_argument);
}

TEST_CASE("detection mode") {
  CHECK(detection_mode(kSoft, 0.0) == 0.0);
  CHECK(detection_mode(kHard, 0.0) == 0.0);
  double n = quad([&](double x) {
    return detection_mode(kSoft, x) * detection_mode(kSoft, x);
  }, -40, 40);
  CHECK(n == doctest::Approx(1.0).epsilon(1e-8));
  double c = quad([&](double x) { return kSoft.u(x) * detection_mode(kSoft, x); },
                  -40, 40);
  CHECK(std::abs(c) < 1e-10);
}

TEST_CASE("coherence function") {
  SourceModel coincident = SourceModel::binary(0.0, 0.3);
  double u0 = kSoft.u(0.0);
  CHECK(coherence(coincident, kSoft, 0.3, 0.3) == doctest::Approx(u0 * u0).epsilon(1e-14));

  SourceModel src = SourceModel::binary(0.2, 0.0);
  for (auto [x, xp] : {std::pair{0.1, -0.4}, {0.9, 0.3}, {-1.2, 2.0}}) {
    CHECK(coherence(src, kSoft, x, xp) ==
          doctest::Approx(coherence(src, kSoft, xp, x)).epsilon(1e-15));
  }
}

TEST_CASE("Karhunen-Loeve reconstruction of the coherence function") {
  // gamma_+ e_+(x) e_+(x') + gamma_- e_-(x) e_-(x') reproduces Gamma(x, x')
  for (const Aperture& ap : {kSoft, kHard}) {
    SourceModel src = SourceModel::binary(0.2, 0.1);
    GammaPair g = eigenvalues_gamma(ap.autocorr(0.4));
    for (auto [x, xp] : {std::pair{0.1, -0.1}, {0.35, 0.8}, {-0.9, 1.4}}) {
      double kl = g.plus * eigenmode(ap, src, ModeSign::Plus, x) *
                      eigenmode(ap, src, ModeSign::Plus, xp) +
                  g.minus * eigenmode(ap, src, ModeSign::Minus, x) *
                      eigenmode(ap, src, ModeSign::Minus, xp);
      CHECK(kl == doctest::Approx(coherence(src, ap, x, xp)).epsilon(1e-10));
    }
  }
  // spec example: soft, d=0.2, x=0.1, x'=-0.1
  SourceModel src = SourceModel::binary(0.2, 0.0);
  GammaPair g = eigenvalues_gamma(overlap(kSoft, 0.2));
  double kl = g.plus * eigenmode(kSoft, src, ModeSign::Plus, 0.1) *
                  eigenmode(kSoft, src, ModeSign::Plus, -0.1) +
              g.minus * eigenmode(kSoft, src, ModeSign::Minus, 0.1) *
                  eigenmode(kSoft, src, ModeSign::Minus, -0.1);
  CHECK(kl == doctest::Approx(coherence(src, kSoft, 0.1, -0.1)).epsilon(1e-10));
}

TEST_CASE("eigenmode values and degeneracy") {
  SourceModel src = SourceModel::binary(0.3, 0.2);
  CHECK(eigenmode(kSoft, src, ModeSign::Plus, 0.2) > 0.0);
  CHECK(std::abs(eigenmode(kSoft, src, ModeSign::Minus, 0.2)) < 1e-14);

  SourceModel degenerate = SourceModel::binary(0.0, 0.0);
  CHECK_THROWS_AS(eigenmode(kSoft, degenerate, ModeSign::Minus, 0.1),
                  DegenerateModeError);
  CHECK_NOTHROW(eigenmode(kSoft, degenerate, ModeSign::Plus, 0.1));
}

TEST_CASE("eigenmode orthonormality") {
  // soft model: direct quadrature
  for (double d : {0.05, 0.2, 1.0, 2.0}) {
    SourceModel src = SourceModel::binary(d, 0.0);
    for (ModeSign s : {ModeSign::Plus, ModeSign::Minus}) {
      double n = quad([&](double x) {
        double e = eigenmode(kSoft, src, s, x);
        return e * e;
      }, -40, 40);
      CHECK(n == doctest::Approx(1.0).epsilon(1e-8));
    }
    double ortho = quad([&](double x) {
      return eigenmode(kSoft, src, ModeSign::Plus, x) *
             eigenmode(kSoft, src, ModeSign::Minus, x);
    }, -40, 40);
    CHECK(std::abs(ortho) < 1e-8);
  }
  // hard model: node-aligned truncation plus the analytic 1/x^2 tails
  for (double d : {0.05, 0.2, 1.0, 2.0}) {
    SourceModel src = SourceModel::binary(d, 0.0);
    double L = node_aligned(200.0, 1.0);
    double chi = kHard.autocorr(2.0 * d);
    for (ModeSign s : {ModeSign::Plus, ModeSign::Minus}) {
      double q = quad([&](double x) {
        double e = eigenmode(kHard, src, s, x);
        return e * e;
      }, -L, L, 1e-11);
      double sign = (s == ModeSign::Plus) ? 1.0 : -1.0;
      double tail = (2.0 * hard_u2_tail(1.0, d, L) +
                     sign * 2.0 * hard_cross_tail(1.0, d, L)) /
                    (2.0 * (1.0 + sign * chi));
      CHECK(q + tail == doctest::Approx(1.0).epsilon(1e-6));
    }
    double ortho = quad([&](double x) {
      return eigenmode(kHard, src, ModeSign::Plus, x) *
             eigenmode(kHard, src, ModeSign::Minus, x);
    }, -L, L, 1e-11);
    CHECK(std::abs(ortho) < 1e-8); // odd integrand
  }
}

TEST_CASE("antisymmetric mode approaches the detection mode as d -> 0") {
  SourceModel src = SourceModel::binary(0.01, 0.0);
  for (double x : {0.2, 0.8, 1.7}) {
    CHECK(eigenmode(kSoft, src, ModeSign::Minus, x) ==
          doctest::Approx(detection_mode(kSoft, x)).epsilon(2e-4));
  }
}

TEST_CASE("mode derivatives: analytic vs finite differences") {
  const double h = 1e-6;
  for (const Aperture& ap : {kSoft, kHard}) {
    for (double x : {-0.7, 0.15, 1.2}) {
      for (ModeSign s : {ModeSign::Plus, ModeSign::Minus}) {
        double ed = eigenmode_derivative(ap, SourceModel::binary(0.3, 0.1), s, 0, x);
        double fd = (eigenmode(ap, SourceModel::binary(0.3 + h, 0.1), s, x) -
                     eigenmode(ap, SourceModel::binary(0.3 - h, 0.1), s, x)) /
                    (2.0 * h);
        CHECK(ed == doctest::Approx(fd).epsilon(1e-5));
        double ec = eigenmode_derivative(ap, SourceModel::binary(0.3, 0.1), s, 1, x);
        double fc = (eigenmode(ap, SourceModel::binary(0.3, 0.1 + h), s, x) -
                     eigenmode(ap, SourceModel::binary(0.3, 0.1 - h), s, x)) /
                    (2.0 * h);
        CHECK(ec == doctest::Approx(fc).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("cross mode-derivative integrals vanish") {
  // int e_- d_d e_+ dx = int e_+ d_d e_- dx = 0 (odd integrands)
  SourceModel src = SourceModel::binary(0.2, 0.0);
  for (const Aperture& ap : {kSoft, kHard}) {
    double i1 = quad([&](double x) {
      return eigenmode(ap, src, ModeSign::Minus, x) *
             eigenmode_derivative(ap, src, ModeSign::Plus, 0, x);
    }, -50, 50, 1e-10);
    double i2 = quad([&](double x) {
      return eigenmode(ap, src, ModeSign::Plus, x) *
             eigenmode_derivative(ap, src, ModeSign::Minus, 0, x);
    }, -50, 50, 1e-10);
    CHECK(std::abs(i1) < 1e-8);
    CHECK(std::abs(i2) < 1e-8);
  }
}

TEST_CASE("source model construction") {
  SourceModel b = SourceModel::binary(0.3, 1.0);
  CHECK(b.points[0].position - b.points[1].position == doctest::Approx(0.6));
  CHECK((b.points[0].position + b.points[1].position) / 2 == doctest::Approx(1.0));
  CHECK(b.points[0].weight + b.points[1].weight == 1.0);
  CHECK(b.halfseparation() == doctest::Approx(0.3));
  CHECK(b.centroid() == doctest::Approx(1.0));
  CHECK_THROWS_AS(SourceModel::binary(-0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Aperture(ApertureModel::Soft, 0.0), std::invalid_argument);
}
