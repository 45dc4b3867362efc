#include <srhd/montecarlo.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <srhd/rng.hpp>

namespace srhd {

static_assert(std::endian::native == std::endian::little,
              "sample dump assumes a little-endian host");

SampleSet sample_quadratures(const SourceModel& source,
                             const Aperture& aperture,
                             const DetectorGrid& grid, double snr,
                             int n_samples, std::uint64_t seed,
                             std::uint64_t stream) {
  if (n_samples < 1) {
    throw std::invalid_argument("sample_quadratures: n_samples >= 1 required");
  }
  const int M = grid.pixel_count;
  const int L = static_cast<int>(source.points.size());

  Eigen::MatrixXd modes(L, M); // u_l sampled on the grid, one row per source
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < M; ++i) {
      modes(l, i) = aperture.u(grid.pixel_center(i) - source.points[l].position);
    }
  }

  NormalSampler gauss(stream_seed(seed, stream));
  const double amp = std::sqrt(2.0 * grid.pitch());

  SampleSet set;
  set.samples.resize(n_samples, M);
  Eigen::VectorXd re(L);
  for (int n = 0; n < n_samples; ++n) {
    for (int l = 0; l < L; ++l) {
      double scale = std::sqrt(snr * source.points[l].weight / 2.0);
      re[l] = scale * gauss();
      gauss(); // imaginary part; drops out of the measured quadrature
    }
    for (int i = 0; i < M; ++i) {
      set.samples(n, i) = amp * re.dot(modes.col(i)) + gauss();
    }
  }

  set.grid = grid;
  set.seed = seed;
  set.meta = {aperture.model, aperture.sigma,
              source.is_binary() ? source.halfseparation() : 0.0,
              source.centroid(), snr};
  return set;
}

Eigen::MatrixXd empirical_covariance(const SampleSet& set) {
  const Eigen::Index n = set.samples.rows();
  if (n < 2) throw std::invalid_argument("empirical_covariance: N >= 2 required");
  Eigen::RowVectorXd mean = set.samples.colwise().mean();
  Eigen::MatrixXd centered = set.samples.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(n - 1);
}

namespace {

constexpr char kMagic[8] = {'S', 'R', 'H', 'D', 'S', 'M', 'P', '1'};
constexpr std::uint32_t kFormatVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

} // namespace

void write_samples(const std::string& path, const SampleSet& set) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_samples: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  put(os, kFormatVersion);
  put(os, static_cast<std::uint32_t>(set.samples.cols()));
  put(os, static_cast<std::uint64_t>(set.samples.rows()));
  put(os, set.seed);
  put(os, static_cast<std::uint8_t>(set.meta.model));
  put(os, set.meta.sigma);
  put(os, set.meta.halfseparation);
  put(os, set.meta.centroid);
  put(os, set.meta.snr);
  put(os, set.grid.center);
  put(os, set.grid.half_width);
  for (Eigen::Index r = 0; r < set.samples.rows(); ++r) {
    os.write(reinterpret_cast<const char*>(set.samples.row(r).eval().data()),
             static_cast<std::streamsize>(sizeof(double) * set.samples.cols()));
  }
  if (!os) throw std::runtime_error("write_samples: short write to " + path);
}

SampleSet read_samples(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_samples: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("read_samples: bad magic in " + path);
  }
  if (get<std::uint32_t>(is) != kFormatVersion) {
    throw std::runtime_error("read_samples: unsupported format version");
  }
  auto m = get<std::uint32_t>(is);
  auto n = get<std::uint64_t>(is);
  SampleSet set;
  set.seed = get<std::uint64_t>(is);
  set.meta.model = static_cast<ApertureModel>(get<std::uint8_t>(is));
  set.meta.sigma = get<double>(is);
  set.meta.halfseparation = get<double>(is);
  set.meta.centroid = get<double>(is);
  set.meta.snr = get<double>(is);
  double center = get<double>(is);
  double half_width = get<double>(is);
  set.grid = DetectorGrid(center, half_width, static_cast<int>(m));
  set.samples.resize(static_cast<Eigen::Index>(n), m);
  std::vector<double> row(m);
  for (std::uint64_t r = 0; r < n; ++r) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double) * m));
    for (std::uint32_t i = 0; i < m; ++i) set.samples(static_cast<Eigen::Index>(r), i) = row[i];
  }
  if (!is) throw std::runtime_error("read_samples: truncated file " + path);
  return set;
}

} // namespace srhd
