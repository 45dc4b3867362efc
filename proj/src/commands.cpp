#include <srhd/commands.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include <srhd/detector.hpp>
#include <srhd/estimator.hpp>
#include <srhd/fisher.hpp>
#include <srhd/parallel.hpp>
#include <srhd/rng.hpp>
#include <srhd/version.hpp>

namespace srhd {

namespace {

std::vector<double> parse_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open output file " + p.string());
  return os;
}

void write_header(std::ostream& os, const RunConfig& c, const std::string& cmd) {
  os << "# tool = srhd " << kVersion << "\n";
  os << "# command = " << cmd << "\n";
  os << "# rng = " << kRngDescriptor << "\n";
  os << "# model = " << c.model << "\n";
  os << "# sigma = " << fmt(c.sigma) << "\n";
  os << "# snr =";
  for (double s : c.snr_list) os << " " << fmt(s);
  os << "\n";
  os << "# d_grid = " << c.d_grid_spec << "\n";
  os << "# xc = " << fmt(c.xc) << "\n";
  os << "# pixels = " << c.pixels << "\n";
  os << "# pixel_width = " << fmt(c.pixel_width) << "\n";
  os << "# realizations = " << c.realizations << "\n";
  os << "# samples = " << c.samples << "\n";
  os << "# seed = " << c.seed << "\n";
}

DetectorGrid grid_for(const RunConfig& c) {
  DetectorGrid g(c.xc, c.half_width(), c.pixels);
  if (!g.resolves(c.sigma)) {
    std::fprintf(stderr,
                 "warning: pixel width %.4g sigma exceeds the 0.1 sigma "
                 "validity regime\n",
                 c.pixel_width);
  }
  return g;
}

nlohmann::json header_json(const RunConfig& c, const std::string& cmd) {
  return {{"tool", std::string("srhd ") + kVersion},
          {"command", cmd},
          {"rng", kRngDescriptor},
          {"model", c.model},
          {"sigma", c.sigma},
          {"snr", c.snr_list},
          {"d_grid", c.d_grid_spec},
          {"xc", c.xc},
          {"pixels", c.pixels},
          {"pixel_width", c.pixel_width},
          {"realizations", c.realizations},
          {"samples", c.samples},
          {"seed", c.seed}};
}

} // namespace

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  size_t b = s.find_last_not_of(" \t");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

} // namespace

void apply_config_file(const std::string& path, RunConfig& config) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto where = [&] { return path + ":" + std::to_string(lineno); };
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config " + where() + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "model") config.model = val;
      else if (key == "sigma") config.sigma = std::stod(val);
      else if (key == "snr") {
        config.snr_list.clear();
        std::stringstream ss(val);
        std::string tok;
        while (std::getline(ss, tok, ',')) config.snr_list.push_back(std::stod(tok));
      } else if (key == "d-grid") config.d_grid_spec = val;
      else if (key == "xc") config.xc = std::stod(val);
      else if (key == "pixels") config.pixels = std::stoi(val);
      else if (key == "pixel-width") config.pixel_width = std::stod(val);
      else if (key == "realizations") config.realizations = std::stoi(val);
      else if (key == "samples") config.samples = std::stoi(val);
      else if (key == "seed") config.seed = std::stoull(val);
      else if (key == "out") config.out_dir = val;
      else if (key == "format") config.format = val;
      else if (key == "threads") config.threads = static_cast<unsigned>(std::stoul(val));
      else if (key == "curves") config.demo_curves = std::stoi(val);
      else throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config " + where() + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("config " + where() + ": value out of range");
    }
  }
}

std::vector<double> RunConfig::d_grid() const {
  if (d_grid_spec.rfind("log:", 0) == 0) {
    std::string body = d_grid_spec.substr(4);
    for (auto& ch : body) {
      if (ch == ':') ch = ',';
    }
    std::vector<double> parts = parse_list(body);
    if (parts.size() != 3 || parts[0] <= 0 || parts[1] <= parts[0] || parts[2] < 2) {
      throw std::invalid_argument("d_grid: expected log:min:max:count");
    }
    int n = static_cast<int>(parts[2]);
    std::vector<double> out(n);
    double la = std::log(parts[0]), lb = std::log(parts[1]);
    for (int i = 0; i < n; ++i) {
      out[i] = std::exp(la + (lb - la) * i / (n - 1));
    }
    return out;
  }
  std::vector<double> out = parse_list(d_grid_spec);
  if (out.empty()) throw std::invalid_argument("d_grid: empty grid");
  for (size_t i = 0; i + 1 < out.size(); ++i) {
    if (out[i + 1] <= out[i]) {
      throw std::invalid_argument("d_grid: values must be ascending");
    }
  }
  return out;
}

Aperture RunConfig::aperture_for(const std::string& m) const {
  if (m == "soft") return Aperture(ApertureModel::Soft, sigma);
  if (m == "hard") return Aperture(ApertureModel::Hard, sigma);
  throw std::invalid_argument("unknown aperture model: " + m);
}

std::vector<std::string> RunConfig::models() const {
  if (model == "both") return {"soft", "hard"};
  aperture_for(model); // validate
  return {model};
}

std::vector<std::string> run_fisher_scan(const RunConfig& config) {
  const std::vector<double> dgrid = config.d_grid();
  const std::vector<std::string> models = config.models();

  struct Row {
    std::string model;
    double snr, d;
    double dd_dense, dd_dec, d_sr, d_r, cc_dense, c_sr, c_r, d_approx, c_approx;
  };
  std::vector<Row> rows(models.size() * config.snr_list.size() * dgrid.size());

  parallel_for(
      static_cast<int>(rows.size()),
      [&](int idx) {
        size_t nd = dgrid.size();
        size_t ns = config.snr_list.size();
        size_t mi = idx / (ns * nd);
        size_t si = (idx / nd) % ns;
        size_t di = idx % nd;
        Aperture ap = config.aperture_for(models[mi]);
        double snr = config.snr_list[si];
        double d = dgrid[di] * config.sigma;
        ThetaPair theta{d, config.xc};

        CovarianceBuilder builder{ap, snr, config.half_width(), config.pixels};
        FisherResult dense = fisher_dense(builder, theta);
        FisherResult dec = fisher_decomposed(ap, snr, theta);
        Row& r = rows[idx];
        r.model = models[mi];
        r.snr = snr;
        r.d = dgrid[di];
        r.dd_dense = dense.matrix(0, 0);
        r.cc_dense = dense.matrix(1, 1);
        r.dd_dec = dec.matrix(0, 0);
        r.d_sr = dec.d_subrayleigh();
        r.d_r = dec.d_rayleigh();
        r.c_sr = dec.c_subrayleigh();
        r.c_r = dec.c_rayleigh();
        r.d_approx = fisher_d_subrayleigh_approx(snr, d, config.sigma);
        r.c_approx = fisher_c_subrayleigh_approx(snr, d, config.sigma);
      },
      config.threads);

  std::filesystem::create_directories(config.out_dir);
  const bool json = config.format == "json";
  std::filesystem::path out = std::filesystem::path(config.out_dir) /
                              (json ? "fisher_scan.json" : "fisher_scan.csv");
  std::ofstream os = open_out(out);
  if (json) {
    nlohmann::json doc;
    doc["meta"] = header_json(config, "fisher-scan");
    doc["rows"] = nlohmann::json::array();
    for (const Row& r : rows) {
      doc["rows"].push_back({{"model", r.model},
                             {"snr", r.snr},
                             {"d_over_sigma", r.d},
                             {"f_dd_dense", r.dd_dense},
                             {"f_dd_decomposed", r.dd_dec},
                             {"f_d_sr", r.d_sr},
                             {"f_d_r", r.d_r},
                             {"f_cc_dense", r.cc_dense},
                             {"f_c_sr", r.c_sr},
                             {"f_c_r", r.c_r},
                             {"f_d_sr_approx", r.d_approx},
                             {"f_c_sr_approx", r.c_approx}});
    }
    os << doc.dump(2) << "\n";
  } else {
    write_header(os, config, "fisher-scan");
    os << "model,snr,d_over_sigma,f_dd_dense,f_dd_decomposed,f_d_sr,f_d_r,"
          "f_cc_dense,f_c_sr,f_c_r,f_d_sr_approx,f_c_sr_approx\n";
    for (const Row& r : rows) {
      os << r.model << ',' << fmt(r.snr) << ',' << fmt(r.d) << ',' << fmt(r.dd_dense)
         << ',' << fmt(r.dd_dec) << ',' << fmt(r.d_sr) << ',' << fmt(r.d_r) << ','
         << fmt(r.cc_dense) << ',' << fmt(r.c_sr) << ',' << fmt(r.c_r) << ','
         << fmt(r.d_approx) << ',' << fmt(r.c_approx) << '\n';
    }
  }
  return {out.string()};
}

namespace {

nlohmann::json stats_json(const ParameterStats& s) {
  return {{"mean", s.mean},         {"stddev", s.stddev},
          {"bias", s.bias},         {"mean_se", s.mean_se},
          {"precision", s.precision}, {"precision_err", s.precision_err}};
}

std::string point_tag(double snr, double d_over_sigma) {
  std::string t = "S" + fmt(snr) + "_d" + fmt(d_over_sigma);
  for (auto& ch : t) {
    if (ch == '.') ch = 'p';
  }
  return t;
}

void write_realizations_csv(const std::filesystem::path& path,
                            const RunConfig& config,
                            const ExperimentResult& res, std::uint64_t seed) {
  std::ofstream os = open_out(path);
  write_header(os, config, "simulate");
  os << "stream,stream_seed,xc_hat,d_hat,v_min,flag\n";
  for (const auto& rec : res.records) {
    os << rec.stream << ',' << stream_seed(seed, rec.stream) << ','
       << fmt(rec.centroid) << ',' << fmt(rec.halfsep) << ',' << fmt(rec.v_min)
       << ','
       << (rec.quality == CurveQuality::CleanTwoLobe ? "clean_two_lobe"
                                                     : "fallback_smoothed")
       << '\n';
  }
}

} // namespace

std::vector<std::string> run_simulate(const RunConfig& config) {
  if (config.model == "both") {
    throw std::invalid_argument("simulate: pick one aperture model");
  }
  const Aperture ap = config.aperture_for(config.model);
  std::filesystem::create_directories(config.out_dir);
  std::vector<std::string> written;

  nlohmann::json summary;
  summary["tool"] = std::string("srhd ") + kVersion;
  summary["rng"] = kRngDescriptor;
  summary["config"] = {{"model", config.model},
                       {"sigma", config.sigma},
                       {"snr", config.snr_list},
                       {"d_grid", config.d_grid()},
                       {"xc", config.xc},
                       {"pixels", config.pixels},
                       {"pixel_width", config.pixel_width},
                       {"realizations", config.realizations},
                       {"samples", config.samples},
                       {"seed", config.seed}};
  summary["points"] = nlohmann::json::array();

  for (double snr : config.snr_list) {
    for (double dsig : config.d_grid()) {
      Protocol proto;
      proto.realizations = config.realizations;
      proto.samples = config.samples;
      proto.grid = grid_for(config);
      proto.source = SourceModel::binary(dsig * config.sigma, config.xc);
      proto.aperture = ap;
      proto.snr = snr;
      proto.seed = config.seed;
      proto.threads = config.threads;

      ExperimentResult res = collect_realizations(proto);
      auto csv = std::filesystem::path(config.out_dir) /
                 ("realizations_" + point_tag(snr, dsig) + ".csv");
      write_realizations_csv(csv, config, res, config.seed);
      written.push_back(csv.string());

      if (res.failed > 0.2 * proto.realizations) {
        // partial results are on disk; propagate the protocol failure
        throw ProtocolError("simulate: more than 20% of realizations failed at " +
                            point_tag(snr, dsig));
      }
      summarize(proto, res);
      nlohmann::json pt;
      pt["snr"] = snr;
      pt["d_over_sigma"] = dsig;
      pt["records"] = res.records.size();
      pt["failed"] = res.failed;
      pt["fallback"] = res.fallback_count;
      pt["halfsep"] = stats_json(res.halfsep);
      pt["centroid"] = stats_json(res.centroid);
      summary["points"].push_back(pt);
    }
  }

  auto sj = std::filesystem::path(config.out_dir) / "summary.json";
  std::ofstream os = open_out(sj);
  os << summary.dump(2) << "\n";
  written.push_back(sj.string());
  return written;
}

std::vector<std::string> run_sweep_demo(const RunConfig& config) {
  if (config.model == "both") {
    throw std::invalid_argument("sweep-demo: pick one aperture model");
  }
  const Aperture ap = config.aperture_for(config.model);
  const double snr = config.snr_list.front();
  const double d = config.d_grid().front() * config.sigma;
  const SourceModel source = SourceModel::binary(d, config.xc);
  const DetectorGrid grid = grid_for(config);

  const double step = 0.02 * config.sigma;
  const int k = static_cast<int>(std::lround(4.0 * config.sigma / step)) + 1;
  Eigen::VectorXd xi(k);
  for (int i = 0; i < k; ++i) xi[i] = config.xc - 2.0 * config.sigma + i * step;

  VarianceCurve analytic = analytic_variance_curve(source, ap, snr, xi);
  std::vector<VarianceCurve> emp(config.demo_curves);
  parallel_for(
      config.demo_curves,
      [&](int i) {
        SampleSet set = sample_quadratures(source, ap, grid, snr,
                                           config.samples, config.seed,
                                           static_cast<std::uint64_t>(i));
        emp[i] = mode_variance_sweep(set, ap, xi);
      },
      config.threads);

  std::filesystem::create_directories(config.out_dir);
  const bool json = config.format == "json";
  auto path = std::filesystem::path(config.out_dir) /
              (json ? "sweep_demo.json" : "sweep_demo.csv");
  std::ofstream os = open_out(path);
  if (json) {
    nlohmann::json doc;
    doc["meta"] = header_json(config, "sweep-demo");
    doc["xi"] = std::vector<double>(xi.data(), xi.data() + k);
    doc["v_analytic"] = std::vector<double>(analytic.values.data(),
                                            analytic.values.data() + k);
    doc["v_real"] = nlohmann::json::array();
    for (const auto& curve : emp) {
      doc["v_real"].push_back(
          std::vector<double>(curve.values.data(), curve.values.data() + k));
    }
    os << doc.dump(2) << "\n";
  } else {
    write_header(os, config, "sweep-demo");
    os << "xi,v_analytic";
    for (int i = 0; i < config.demo_curves; ++i) os << ",v_real_" << i + 1;
    os << "\n";
    for (int row = 0; row < k; ++row) {
      os << fmt(xi[row]) << ',' << fmt(analytic.values[row]);
      for (int i = 0; i < config.demo_curves; ++i) os << ',' << fmt(emp[i].values[row]);
      os << "\n";
    }
  }
  return {path.string()};
}

} // namespace srhd
