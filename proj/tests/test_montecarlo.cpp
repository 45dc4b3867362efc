#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <srhd/montecarlo.hpp>
#include <srhd/rng.hpp>

using namespace srhd;

namespace {

const Aperture kSoft{ApertureModel::Soft, 1.0};

// dense multivariate-normal oracle: q = L z + n with C = L L^T
Eigen::MatrixXd cholesky_samples(const Eigen::MatrixXd& cov, int n,
                                 std::uint64_t seed) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  Eigen::MatrixXd l = llt.matrixL();
  NormalSampler gauss(seed);
  Eigen::MatrixXd out(n, cov.rows());
  Eigen::VectorXd z(cov.rows());
  for (int r = 0; r < n; ++r) {
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = gauss();
    out.row(r) = (l * z).transpose();
  }
  return out;
}

Eigen::MatrixXd covariance_of(const Eigen::MatrixXd& rows) {
  Eigen::RowVectorXd mean = rows.colwise().mean();
  Eigen::MatrixXd c = rows.rowwise() - mean;
  return c.transpose() * c / double(rows.rows() - 1);
}

} // namespace

TEST_CASE("reproducibility: identical seed, bit-identical samples") {
  DetectorGrid grid(0.0, 4.0, 64);
  SourceModel src = SourceModel::binary(0.2, 0.0);
  SampleSet a = sample_quadratures(src, kSoft, grid, 100.0, 50, 42, 7);
  SampleSet b = sample_quadratures(src, kSoft, grid, 100.0, 50, 42, 7);
  CHECK((a.samples - b.samples).cwiseAbs().maxCoeff() == 0.0);
  SampleSet c = sample_quadratures(src, kSoft, grid, 100.0, 50, 42, 8);
  CHECK((a.samples - c.samples).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("pure-noise samples have identity covariance") {
  DetectorGrid grid(0.0, 4.0, 40);
  // snr ~ 0: signal contribution suppressed entirely
  SampleSet s = sample_quadratures(SourceModel::binary(0.2, 0.0), kSoft, grid,
                                   1e-30, 20000, 3, 0);
  Eigen::MatrixXd c = covariance_of(s.samples);
  double band = 5.0 * std::sqrt(2.0 / 20000.0);
  for (int i = 0; i < 40; ++i) {
    CHECK(std::abs(c(i, i) - 1.0) < band);
    for (int j = 0; j < i; ++j) CHECK(std::abs(c(i, j)) < 5.0 / std::sqrt(20000.0));
  }
}

TEST_CASE("empirical mean stays within the statistical bound") {
  DetectorGrid grid(0.0, 4.0, 100);
  SampleSet s = sample_quadratures(SourceModel::binary(0.2, 0.0), kSoft, grid,
                                   100.0, 5000, 11, 0);
  double norm = s.samples.colwise().mean().norm();
  CHECK(norm <= 5.0 * std::sqrt(100.0 / 5000.0));
}

TEST_CASE("empirical principal variances approach snr gamma_pm + 1") {
  DetectorGrid grid(0.0, 4.0, 200);
  double snr = 100.0, d = 0.2;
  SampleSet s = sample_quadratures(SourceModel::binary(d, 0.0), kSoft, grid,
                                   snr, 100000, 9, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance_of(s.samples));
  double chi = std::exp(-2.0 * d * d);
  double vplus = snr * (1 + chi) / 2 + 1, vminus = snr * (1 - chi) / 2 + 1;
  CHECK(eig.eigenvalues()[199] == doctest::Approx(vplus).epsilon(0.03));
  CHECK(eig.eigenvalues()[198] == doctest::Approx(vminus).epsilon(0.03));
}

TEST_CASE("structured sampler is statistically indistinguishable from the "
          "Cholesky oracle") {
  DetectorGrid grid(0.0, 4.0, 60);
  double snr = 100.0;
  SourceModel src = SourceModel::binary(0.2, 0.0);
  int n = 40000;
  SampleSet s = sample_quadratures(src, kSoft, grid, snr, n, 17, 0);
  CovarianceModel cm = build_covariance(src, kSoft, grid, snr);
  Eigen::MatrixXd cov = cm.cov_dense();
  Eigen::MatrixXd oracle = cholesky_samples(cov, n, stream_seed(18, 0));

  Eigen::MatrixXd c1 = covariance_of(s.samples);
  Eigen::MatrixXd c2 = covariance_of(oracle);
  // two-sample z-test per element, 5 sigma
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j <= i; ++j) {
      double var_elem = (cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / n;
      double z = (c1(i, j) - c2(i, j)) / std::sqrt(2.0 * var_elem);
      CHECK(std::abs(z) < 5.0);
    }
  }
}

TEST_CASE("empirical covariance basics") {
  DetectorGrid grid(0.0, 4.0, 8);
  SampleSet s;
  s.grid = grid;
  s.samples = Eigen::MatrixXd::Ones(2, 8); // two identical rows
  CHECK(empirical_covariance(s).cwiseAbs().maxCoeff() == 0.0);
  s.samples = Eigen::MatrixXd::Ones(1, 8);
  CHECK_THROWS_AS(empirical_covariance(s), std::invalid_argument);
}

TEST_CASE("empirical covariance error decays as 1/sqrt(N)") {
  DetectorGrid grid(0.0, 4.0, 100);
  SourceModel src = SourceModel::binary(0.2, 0.0);
  double snr = 100.0;
  Eigen::MatrixXd cov = build_covariance(src, kSoft, grid, snr).cov_dense();
  double prev = -1.0;
  for (int n : {1000, 10000, 100000}) {
    SampleSet s = sample_quadratures(src, kSoft, grid, snr, n, 5, 0);
    double err = (empirical_covariance(s) - cov).norm();
    if (prev > 0.0) {
      double ratio = prev / err;
      CHECK(ratio > 2.0);  // consistent with sqrt(10) ~ 3.16
      CHECK(ratio < 5.0);
    }
    prev = err;
  }
}

TEST_CASE("sample dump round trip") {
  DetectorGrid grid(0.1, 3.5, 32);
  SampleSet s = sample_quadratures(SourceModel::binary(0.15, 0.1), kSoft, grid,
                                   50.0, 20, 1234, 3);
  auto path = std::filesystem::temp_directory_path() / "srhd_samples_test.bin";
  write_samples(path.string(), s);
  SampleSet r = read_samples(path.string());
  CHECK((r.samples - s.samples).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.seed == s.seed);
  CHECK(r.grid.pixel_count == 32);
  CHECK(r.grid.center == doctest::Approx(0.1));
  CHECK(r.meta.snr == doctest::Approx(50.0));
  CHECK(r.meta.halfseparation == doctest::Approx(0.15));
  std::filesystem::remove(path);
  CHECK_THROWS(read_samples("/nonexistent/srhd.bin"));
}

TEST_CASE("sampling rejects invalid counts") {
  DetectorGrid grid(0.0, 4.0, 16);
  CHECK_THROWS_AS(sample_quadratures(SourceModel::binary(0.1, 0.0), kSoft, grid,
                                     10.0, 0, 1, 0),
                  std::invalid_argument);
}
