#include <srhd/fisher.hpp>

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <srhd/quadrature.hpp>

namespace srhd {

namespace {

// Inner products among the displaced transfer functions b_l = u(x - x_l)
// and their spatial derivatives, over the chosen domain:
//   P00(l,m) = <b_l, b_m>,  P01(l,m) = <b_l, b_m'>,  P11(l,m) = <b_l', b_m'>.
struct GramBlocks {
  Eigen::Matrix2d P00, P01, P11;
};

GramBlocks gram_fullline(const Aperture& ap, double d, double xc) {
  const double x[2] = {xc + d, xc - d};
  // chi shares the cancellation-free evaluation used for gamma_-; an
  // inconsistency between the two is amplified by the near-cancelling
  // orthogonal projection in F2
  const double chi = 1.0 - ap.one_minus_autocorr(2.0 * d);
  GramBlocks g;
  for (int l = 0; l < 2; ++l) {
    for (int m = 0; m < 2; ++m) {
      double t = x[m] - x[l];
      g.P00(l, m) = (l == m) ? 1.0 : chi;
      g.P01(l, m) = -ap.autocorr(t, 1);
      g.P11(l, m) = -ap.autocorr(t, 2);
    }
  }
  return g;
}

GramBlocks gram_window(const Aperture& ap, double d, double xc,
                       const Window& w) {
  const double x[2] = {xc + d, xc - d};
  const IntegrateOptions opts{.abs_tol = 1e-11, .rel_tol = 1e-12};
  GramBlocks g;
  for (int l = 0; l < 2; ++l) {
    for (int m = 0; m < 2; ++m) {
      double xl = x[l], xm = x[m];
      g.P00(l, m) =
          integrate([&](double t) { return ap.u(t - xl) * ap.u(t - xm); },
                    w.lo, w.hi, opts)
              .value;
      g.P01(l, m) =
          integrate([&](double t) { return ap.u(t - xl) * ap.u_prime(t - xm); },
                    w.lo, w.hi, opts)
              .value;
      g.P11(l, m) = integrate(
                        [&](double t) {
                          return ap.u_prime(t - xl) * ap.u_prime(t - xm);
                        },
                        w.lo, w.hi, opts)
                        .value;
    }
  }
  return g;
}

// Karhunen-Loeve system of the rank-2 coherence kernel on the domain.
// Index 0 = symmetric mode, 1 = antisymmetric mode.
struct ModeSystem {
  GramBlocks gram;
  Eigen::Vector2d weights;
  double gamma[2];
  double vexcess[2]; // V_mu - 1 = snr * gamma_mu, formed without subtraction
  double var[2];     // V_mu
  Eigen::Vector2d chat[2];  // orthonormal coefficient eigenvectors
  Eigen::Vector2d alpha[2]; // mode expansion: e_mu = sum_l alpha[mu][l] b_l
  // derivative sign of b_l under theta_j: d/d d -> (-1, +1), d/d xc -> (-1, -1)
  double csign[2][2] = {{-1.0, 1.0}, {-1.0, -1.0}};

  double p01t(int l, int m) const { return gram.P01(m, l); } // <b_l', b_m>
};

ModeSystem make_modes(const Aperture& ap, double snr, const ThetaPair& th,
                      const Domain& domain) {
  if (!(th.d > 0.0)) {
    throw std::invalid_argument("fisher: d must be > 0 (modes degenerate)");
  }
  ModeSystem ms;
  ms.weights << 0.5, 0.5;
  if (std::holds_alternative<FullLine>(domain)) {
    ms.gram = gram_fullline(ap, th.d, th.xc);
    // exact eigensystem of the symmetric binary source; gamma_- formed
    // from 1 - chi without cancellation
    double one_minus = ap.one_minus_autocorr(2.0 * th.d);
    ms.gamma[0] = 1.0 - 0.5 * one_minus;
    ms.gamma[1] = 0.5 * one_minus;
    const double r = 1.0 / std::sqrt(2.0);
    ms.chat[0] << r, r;
    ms.chat[1] << r, -r;
  } else {
    const Window& win = std::get<Window>(domain);
    ms.gram = gram_window(ap, th.d, th.xc, win);
    Eigen::Matrix2d b = ms.weights.cwiseSqrt().asDiagonal() * ms.gram.P00 *
                        ms.weights.cwiseSqrt().asDiagonal();
    if (std::abs(0.5 * (win.lo + win.hi) - th.xc) < 1e-12 * ap.sigma) {
      // window centered on the centroid: parity fixes the eigenvectors as
      // (1, +/-1)/sqrt(2) for every d, including through gamma crossings
      // where a generic solver would return an arbitrary basis
      const double r = 1.0 / std::sqrt(2.0);
      ms.chat[0] << r, r;
      ms.chat[1] << r, -r;
      ms.gamma[0] = ms.chat[0].dot(b * ms.chat[0]);
      ms.gamma[1] = ms.chat[1].dot(b * ms.chat[1]);
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(b);
      // symmetric mode = eigenvector with same-sign components
      int sym = (eig.eigenvectors()(0, 0) * eig.eigenvectors()(1, 0) > 0) ? 0 : 1;
      for (int k = 0; k < 2; ++k) {
        int src = (k == 0) ? sym : 1 - sym;
        ms.gamma[k] = eig.eigenvalues()(src);
        ms.chat[k] = eig.eigenvectors().col(src);
        if (ms.chat[k](0) < 0) ms.chat[k] = -ms.chat[k];
      }
    }
    if (!(ms.gamma[1] > 0.0)) {
      throw std::invalid_argument("fisher: window modes degenerate");
    }
  }
  for (int k = 0; k < 2; ++k) {
    ms.vexcess[k] = snr * ms.gamma[k];
    ms.var[k] = ms.vexcess[k] + 1.0;
    ms.alpha[k] = ms.weights.cwiseSqrt().cwiseProduct(ms.chat[k]) /
                  std::sqrt(ms.gamma[k]);
  }
  return ms;
}

// d(Gram P00)/d theta_j in the b basis
Eigen::Matrix2d gram_derivative(const ModeSystem& ms, int j) {
  Eigen::Matrix2d dg;
  for (int l = 0; l < 2; ++l) {
    for (int m = 0; m < 2; ++m) {
      dg(l, m) = ms.csign[j][l] * ms.p01t(l, m) + ms.csign[j][m] * ms.gram.P01(l, m);
    }
  }
  return dg;
}

} // namespace

CovarianceModel CovarianceBuilder::build(const ThetaPair& theta) const {
  return build_covariance(SourceModel::binary(theta.d, theta.xc), aperture,
                          grid_at(theta.xc), snr);
}

FisherResult fisher_dense(const CovarianceBuilder& builder,
                          const ThetaPair& theta,
                          const DerivativeScheme& scheme) {
  if (!(theta.d > 0.0)) throw std::invalid_argument("fisher_dense: d must be > 0");
  if (builder.pixel_count > 2000) {
    throw std::invalid_argument("fisher_dense: M <= 2000 required for dense path");
  }
  const DetectorGrid grid = builder.grid_at(theta.xc);
  const int M = grid.pixel_count;
  const double pitch = grid.pitch();
  const Aperture& ap = builder.aperture;

  auto cov_at = [&](double d, double xc) {
    Eigen::MatrixXd c =
        builder.snr *
        build_gamma(SourceModel::binary(d, xc), ap, grid).dense();
    c.diagonal().array() += 1.0;
    return c;
  };

  Eigen::MatrixXd c = cov_at(theta.d, theta.xc);
  Eigen::LLT<Eigen::MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("fisher_dense: covariance factorization failed");
  }

  std::array<Eigen::MatrixXd, 2> dc;
  if (std::holds_alternative<Analytic>(scheme)) {
    const double x1 = theta.xc + theta.d, x2 = theta.xc - theta.d;
    Eigen::MatrixXd u(M, 2), up(M, 2);
    for (int i = 0; i < M; ++i) {
      double x = grid.pixel_center(i);
      u(i, 0) = ap.u(x - x1);
      u(i, 1) = ap.u(x - x2);
      up(i, 0) = ap.u_prime(x - x1);
      up(i, 1) = ap.u_prime(x - x2);
    }
    Eigen::Vector2d w(0.5, 0.5);
    for (int j = 0; j < 2; ++j) {
      Eigen::MatrixXd du = up;
      du.col(0) *= -1.0;
      if (j == 1) du.col(1) *= -1.0; // centroid moves both sources together
      Eigen::MatrixXd half = builder.snr * pitch * (du * w.asDiagonal() * u.transpose());
      dc[j] = half + half.transpose();
    }
  } else {
    const double h = std::get<FiniteDiff>(scheme).step;
    if (!(h > 0.0) || theta.d - h <= 0.0) {
      throw std::invalid_argument("fisher_dense: invalid finite-difference step");
    }
    dc[0] = (cov_at(theta.d + h, theta.xc) - cov_at(theta.d - h, theta.xc)) / (2.0 * h);
    dc[1] = (cov_at(theta.d, theta.xc + h) - cov_at(theta.d, theta.xc - h)) / (2.0 * h);
  }

  std::array<Eigen::MatrixXd, 2> g;
  for (int j = 0; j < 2; ++j) g[j] = llt.solve(dc[j]);

  FisherResult res;
  res.method = FisherMethod::DenseNumeric;
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) {
      double v = 0.5 * (g[i].array() * g[j].transpose().array()).sum();
      res.matrix(i, j) = v;
      res.matrix(j, i) = v;
    }
  }
  return res;
}

FisherResult fisher_decomposed(const Aperture& aperture, double snr,
                               const ThetaPair& theta, const Domain& domain) {
  if (!(snr > 0.0)) throw std::invalid_argument("fisher_decomposed: snr must be > 0");
  ModeSystem ms = make_modes(aperture, snr, theta, domain);
  const Eigen::Vector2d sw = ms.weights.cwiseSqrt();

  Eigen::Matrix2d db[2];
  double dvar[2][2]; // [j][mu]
  for (int j = 0; j < 2; ++j) {
    db[j] = sw.asDiagonal() * gram_derivative(ms, j) * sw.asDiagonal();
    for (int mu = 0; mu < 2; ++mu) {
      dvar[j][mu] = snr * ms.chat[mu].dot(db[j] * ms.chat[mu]);
    }
  }

  // F1: change of the principal variances
  Eigen::Matrix2d f1 = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) {
      double acc = 0.0;
      for (int mu = 0; mu < 2; ++mu) {
        acc += dvar[i][mu] * dvar[j][mu] / (ms.var[mu] * ms.var[mu]);
      }
      f1(i, j) = f1(j, i) = 0.5 * acc;
    }
  }

  // <d_j b_l, e_mu>; the mode-rotation and normalization parts of d e_mu
  // lie inside span{b} and drop out under the orthogonal projector, so F2
  // only needs basis-function derivatives.
  auto proj = [&](int j, int l, int mu) {
    double acc = 0.0;
    for (int m = 0; m < 2; ++m) acc += ms.alpha[mu](m) * ms.gram.P01(m, l);
    return ms.csign[j][l] * acc;
  };

  Eigen::Matrix2d f2 = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) {
      double tot = 0.0;
      for (int mu = 0; mu < 2; ++mu) {
        double acc = 0.0;
        for (int l = 0; l < 2; ++l) {
          for (int m = 0; m < 2; ++m) {
            double val = ms.csign[i][l] * ms.csign[j][m] * ms.gram.P11(l, m);
            for (int nu = 0; nu < 2; ++nu) val -= proj(i, l, nu) * proj(j, m, nu);
            acc += ms.alpha[mu](l) * ms.alpha[mu](m) * val;
          }
        }
        tot += ms.vexcess[mu] * ms.vexcess[mu] / ms.var[mu] * acc;
      }
      f2(i, j) = f2(j, i) = tot;
    }
  }

  // F3 via z_j = <e_-, (d_j Gamma) e_+> = (gamma_+ - gamma_-) <e_-, d_j e_+>,
  // which stays finite through eigenvalue crossings.
  auto mode_b = [&](int mu, int l) {
    double acc = 0.0;
    for (int m = 0; m < 2; ++m) acc += ms.alpha[mu](m) * ms.gram.P00(m, l);
    return acc;
  };
  double z[2];
  for (int j = 0; j < 2; ++j) {
    double acc = 0.0;
    for (int l = 0; l < 2; ++l) {
      acc += ms.weights(l) * (proj(j, l, 1) * mode_b(0, l) + mode_b(1, l) * proj(j, l, 0));
    }
    z[j] = acc;
  }
  Eigen::Matrix2d f3 = Eigen::Matrix2d::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) {
      double v = snr * snr / (ms.var[0] * ms.var[1]) * z[i] * z[j];
      f3(i, j) = f3(j, i) = v;
    }
  }

  FisherResult res;
  res.method = FisherMethod::Decomposed;
  res.terms = {f1, f2, f3};
  res.matrix = f1 + f2 + f3;
  return res;
}

double fisher_d_subrayleigh_approx(double snr, double d, double sigma) {
  if (!(snr > 0.0) || d < 0.0) {
    throw std::invalid_argument("fisher_d_subrayleigh_approx: need snr > 0, d >= 0");
  }
  double t = std::sqrt(snr) * d / sigma;
  double t2 = t * t;
  double f = 2.0 * t2 / ((1.0 + t2) * (1.0 + t2));
  return snr / (sigma * sigma) * f;
}

double fisher_c_subrayleigh_approx(double snr, double d, double sigma) {
  if (!(snr > 0.0) || d < 0.0) {
    throw std::invalid_argument("fisher_c_subrayleigh_approx: need snr > 0, d >= 0");
  }
  double s2 = sigma * sigma;
  return snr / s2 / (1.0 + 1.0 / snr) / (1.0 + snr * d * d / s2);
}

FisherAsymptotes fisher_asymptotes(double snr, double sigma,
                                   const Aperture& aperture) {
  double s2 = sigma * sigma;
  FisherAsymptotes a;
  a.large_d_saturation = snr / (s2 * (1.0 + 2.0 / snr));
  double bracket = (aperture.model == ApertureModel::Soft) ? 2.0 / (s2 * s2)
                                                           : 0.8 / (s2 * s2);
  a.small_d_R_coefficient = snr / (1.0 + 1.0 / snr) * bracket;
  a.small_d_cR_scaling = "snr^2 d^4 / sigma^6";
  return a;
}

} // namespace srhd
