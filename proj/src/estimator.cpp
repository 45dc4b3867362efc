#include <srhd/estimator.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <srhd/errors.hpp>
#include <srhd/parallel.hpp>

namespace srhd {

namespace {

// int u(x - a) v(x - xi) dx = sigma g'(xi - a)
double mode_coupling(const Aperture& ap, double s) {
  return ap.sigma * ap.autocorr(s, 1);
}

Eigen::VectorXd smooth5(const Eigen::VectorXd& v) {
  const int n = static_cast<int>(v.size());
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    int lo = std::max(0, i - 2), hi = std::min(n - 1, i + 2);
    out[i] = v.segment(lo, hi - lo + 1).mean();
  }
  return out;
}

struct Refined {
  double x;
  double v;
};

// parabola through the three points around k; requires convexity
Refined refine_parabolic(const Eigen::VectorXd& xi, const Eigen::VectorXd& v,
                         int k) {
  double y0 = v[k - 1], y1 = v[k], y2 = v[k + 1];
  double denom = y0 - 2.0 * y1 + y2;
  if (denom <= 0.0) return {xi[k], y1};
  double delta = 0.5 * (y0 - y2) / denom;
  double step = xi[k + 1] - xi[k];
  return {xi[k] + delta * step, y1 - 0.25 * (y0 - y2) * delta};
}

} // namespace

VarianceCurve analytic_variance_curve(const SourceModel& source,
                                      const Aperture& aperture, double snr,
                                      const Eigen::VectorXd& xi_grid) {
  VarianceCurve c;
  c.xi = xi_grid;
  c.values.resize(xi_grid.size());
  for (Eigen::Index k = 0; k < xi_grid.size(); ++k) {
    double acc = 0.0;
    for (const auto& p : source.points) {
      double m = mode_coupling(aperture, xi_grid[k] - p.position);
      acc += p.weight * m * m;
    }
    c.values[k] = snr * acc + 1.0;
  }
  c.n_samples = 0;
  return c;
}

double analytic_variance_at_centroid(const Aperture& aperture, double snr,
                                     double d) {
  double m = mode_coupling(aperture, d);
  return snr * m * m + 1.0;
}

VarianceCurve mode_variance_sweep(const SampleSet& set,
                                  const Aperture& aperture,
                                  const Eigen::VectorXd& xi_grid) {
  const auto& grid = set.grid;
  const double lo = grid.center - grid.half_width;
  const double hi = grid.center + grid.half_width;
  if (xi_grid.size() > 0 &&
      (xi_grid.minCoeff() < lo || xi_grid.maxCoeff() > hi)) {
    throw std::invalid_argument("mode_variance_sweep: xi outside detector domain");
  }
  const int M = grid.pixel_count;
  const int K = static_cast<int>(xi_grid.size());
  const double sq_pitch = std::sqrt(grid.pitch());

  Eigen::MatrixXd modes(M, K);
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < M; ++i) {
      modes(i, k) = sq_pitch * detection_mode(aperture, grid.pixel_center(i) - xi_grid[k]);
    }
  }
  Eigen::MatrixXd proj = set.samples * modes; // N x K

  const Eigen::Index n = set.samples.rows();
  VarianceCurve c;
  c.xi = xi_grid;
  c.n_samples = static_cast<int>(n);
  c.values.resize(K);
  for (int k = 0; k < K; ++k) {
    double mean = proj.col(k).mean();
    c.values[k] = (proj.col(k).array() - mean).square().sum() / static_cast<double>(n - 1);
  }
  return c;
}

CentroidEstimate estimate_centroid(const VarianceCurve& curve) {
  const int K = static_cast<int>(curve.xi.size());
  if (K < 5) throw std::invalid_argument("estimate_centroid: curve too short");
  const Eigen::VectorXd& v = curve.values;

  // interior local maxima, strongest two
  std::vector<int> maxima;
  for (int k = 1; k < K - 1; ++k) {
    if (v[k] >= v[k - 1] && v[k] > v[k + 1]) maxima.push_back(k);
  }
  std::sort(maxima.begin(), maxima.end(),
            [&](int a, int b) { return v[a] > v[b]; });

  // noise floor is 1; the chi^2 standard error of a variance estimate is
  // V sqrt(2/N) (analytic curves are exact, se = 0)
  auto stderr_at = [&](int k) {
    return curve.n_samples > 0 ? v[k] * std::sqrt(2.0 / curve.n_samples) : 0.0;
  };

  if (maxima.size() >= 2) {
    int k1 = std::min(maxima[0], maxima[1]);
    int k2 = std::max(maxima[0], maxima[1]);
    bool prominent = v[k1] - 1.0 > 3.0 * stderr_at(k1) &&
                     v[k2] - 1.0 > 3.0 * stderr_at(k2) && k2 > k1 + 1;
    if (prominent) {
      int kmin = k1;
      for (int k = k1; k <= k2; ++k) {
        if (v[k] < v[kmin]) kmin = k;
      }
      if (kmin > 0 && kmin < K - 1) {
        Refined r = refine_parabolic(curve.xi, v, kmin);
        return {r.x, r.v, CurveQuality::CleanTwoLobe};
      }
    }
  }

  // fallback: smoothed minimum over the central half of the sweep
  Eigen::VectorXd vs = smooth5(v);
  int lo = K / 4, hi = 3 * K / 4;
  int kmin = lo;
  for (int k = lo; k < hi; ++k) {
    if (vs[k] < vs[kmin]) kmin = k;
  }
  bool interior = kmin > 0 && kmin < K - 1 && vs[kmin] <= vs[kmin - 1] &&
                  vs[kmin] <= vs[kmin + 1];
  if (!interior) {
    throw EstimationError("estimate_centroid: no interior variance minimum");
  }
  Refined r = refine_parabolic(curve.xi, vs, kmin);
  return {r.x, r.v, CurveQuality::FallbackSmoothed};
}

double estimate_halfseparation(double v_at_centroid, double snr,
                               const Aperture& aperture,
                               InversionMethod method) {
  if (!(snr > 0.0)) {
    throw std::invalid_argument("estimate_halfseparation: snr must be > 0");
  }
  const double sigma = aperture.sigma;
  if (v_at_centroid <= 1.0) return 0.0; // statistical fluctuation below the floor

  if (method == InversionMethod::ApproxFormula) {
    return sigma * std::sqrt((v_at_centroid - 1.0) / snr);
  }

  // V(d) is strictly increasing on [0, sigma] for both models
  if (v_at_centroid > analytic_variance_at_centroid(aperture, snr, sigma)) {
    throw EstimationError("estimate_halfseparation: variance above invertible range");
  }
  double lo = 0.0, hi = sigma;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * sigma; ++it) {
    double mid = 0.5 * (lo + hi);
    if (analytic_variance_at_centroid(aperture, snr, mid) < v_at_centroid) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

double resolve(double v, double fallback) { return v > 0.0 ? v : fallback; }

ParameterStats stats_for(const std::vector<double>& x, double truth, int n_samples) {
  ParameterStats s;
  const auto r = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= r;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    double c = v - mean;
    m2 += c * c;
    m4 += c * c * c * c;
  }
  double var = m2 / (r - 1.0);
  m4 /= r;
  s.mean = mean;
  s.stddev = std::sqrt(var);
  s.bias = mean - truth;
  s.mean_se = s.stddev / std::sqrt(r);
  s.precision = 1.0 / (n_samples * var);
  // delta method: sd(P) = sd(s^2) / (N s^4), with the fourth-moment
  // estimator of the variance of a sample variance
  double var_of_var = std::max(0.0, (m4 - var * var * (r - 3.0) / (r - 1.0)) / r);
  s.precision_err = std::sqrt(var_of_var) / (n_samples * var * var);
  return s;
}

} // namespace

RealizationRecord run_single_realization(const Protocol& protocol,
                                         std::uint64_t stream) {
  const Aperture& ap = protocol.aperture;
  const double sigma = ap.sigma;
  const double sweep_hw = resolve(protocol.sweep_half_width, 2.0 * sigma);
  const double step = resolve(protocol.sweep_step, 0.02 * sigma);

  SampleSet set = sample_quadratures(protocol.source, ap, protocol.grid,
                                     protocol.snr, protocol.samples,
                                     protocol.seed, stream);

  // coarse, noise-tolerant centroid prior: excess-variance-weighted mean
  // pixel position
  const auto& q = set.samples;
  double wsum = 0.0, xsum = 0.0;
  for (int i = 0; i < protocol.grid.pixel_count; ++i) {
    double excess = q.col(i).squaredNorm() / static_cast<double>(q.rows()) - 1.0;
    if (excess > 0.0) {
      wsum += excess;
      xsum += excess * protocol.grid.pixel_center(i);
    }
  }
  double prior = wsum > 0.0 ? xsum / wsum : protocol.grid.center;
  // keep the sweep inside the detector
  double pmax = protocol.grid.center + protocol.grid.half_width - sweep_hw - step;
  double pmin = protocol.grid.center - protocol.grid.half_width + sweep_hw + step;
  prior = std::clamp(prior, std::min(pmin, protocol.grid.center),
                     std::max(pmax, protocol.grid.center));

  const int K = static_cast<int>(std::lround(2.0 * sweep_hw / step)) + 1;
  Eigen::VectorXd xi(K);
  for (int k = 0; k < K; ++k) xi[k] = prior - sweep_hw + k * step;

  VarianceCurve curve = mode_variance_sweep(set, ap, xi);
  CentroidEstimate ce = estimate_centroid(curve);
  double dhat = estimate_halfseparation(ce.v_min, protocol.snr, ap, protocol.method);
  return {stream, ce.centroid, dhat, ce.v_min, ce.quality};
}

ExperimentResult collect_realizations(const Protocol& protocol) {
  if (protocol.realizations < 2) {
    throw std::invalid_argument("collect_realizations: R >= 2 required");
  }
  const int r = protocol.realizations;
  std::vector<RealizationRecord> slots(r);
  std::vector<char> ok(r, 0);
  parallel_for(
      r,
      [&](int i) {
        try {
          slots[i] = run_single_realization(protocol, static_cast<std::uint64_t>(i));
          ok[i] = 1;
        } catch (const EstimationError&) {
          ok[i] = 0;
        }
      },
      protocol.threads);

  ExperimentResult res;
  for (int i = 0; i < r; ++i) {
    if (!ok[i]) {
      ++res.failed;
      continue;
    }
    res.records.push_back(slots[i]);
    if (slots[i].quality == CurveQuality::FallbackSmoothed) ++res.fallback_count;
  }
  return res;
}

void summarize(const Protocol& protocol, ExperimentResult& result) {
  if (result.records.size() < 2) {
    throw ProtocolError("run_experiment: fewer than two successful realizations");
  }
  std::vector<double> ds, xs;
  ds.reserve(result.records.size());
  xs.reserve(result.records.size());
  for (const auto& rec : result.records) {
    ds.push_back(rec.halfsep);
    xs.push_back(rec.centroid);
  }
  double true_d = protocol.source.is_binary() ? protocol.source.halfseparation() : 0.0;
  result.halfsep = stats_for(ds, true_d, protocol.samples);
  result.centroid = stats_for(xs, protocol.source.centroid(), protocol.samples);
}

ExperimentResult run_experiment(const Protocol& protocol) {
  ExperimentResult res = collect_realizations(protocol);
  if (res.failed > 0.2 * protocol.realizations) {
    throw ProtocolError("run_experiment: more than 20% of realizations failed");
  }
  summarize(protocol, res);
  return res;
}

} // namespace srhd
