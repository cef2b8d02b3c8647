#include "mirrorstrat/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#ifndef MIRRORSTRAT_VERSION
#define MIRRORSTRAT_VERSION "0.0.0"
#endif

namespace mirrorstrat {

namespace {

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }

std::string opt_bool(const std::optional<bool>& v) { return v ? (*v ? "1" : "0") : ""; }

// Minimal SVG chart: linear axes, polylines and bars.
class Chart {
 public:
  Chart(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void line(std::vector<std::pair<double, double>> pts, bool dashed = false) {
    for (const auto& [x, y] : pts) extend(x, y);
    series_.push_back({std::move(pts), dashed, static_cast<int>(series_.size())});
  }
  void line(std::vector<std::pair<double, double>> pts, bool dashed, int color) {
    for (const auto& [x, y] : pts) extend(x, y);
    series_.push_back({std::move(pts), dashed, color});
  }
  void bar(double x, double height) {
    extend(x - 0.5, 0.0);
    extend(x + 0.5, height);
    bars_.emplace_back(x, height);
  }
  void legend(std::string text) { legend_.push_back(std::move(text)); }

  std::string render() const {
    double x0 = xmin_, x1 = xmax_, y0 = std::min(0.0, ymin_), y1 = ymax_;
    if (!(x1 > x0)) { x0 -= 1.0; x1 += 1.0; }
    if (!(y1 > y0)) y1 = y0 + 1.0;
    auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); };
    auto sy = [&](double y) { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += text(kWidth / 2, 20, title_, "middle", 14);
    s += text(kWidth / 2, kHeight - 8, xlabel_, "middle");
    s += "<text x=\"16\" y=\"" + num(kHeight / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kHeight / 2) + ")\">" + escape(ylabel_) + "</text>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(sy(y0)) + "\" x2=\"" + num(kWidth - kRight) +
         "\" y2=\"" + num(sy(y0)) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
         num(kHeight - kBottom) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double xv = x0 + (x1 - x0) * t / 4.0;
      const double yv = y0 + (y1 - y0) * t / 4.0;
      s += text(sx(xv), kHeight - kBottom + 16, tick(xv), "middle");
      s += text(kLeft - 6, sy(yv) + 4, tick(yv), "end");
    }
    for (const auto& [x, h] : bars_) {
      const double left = sx(x - 0.4), right = sx(x + 0.4);
      s += "<rect x=\"" + num(left) + "\" y=\"" + num(sy(h)) + "\" width=\"" + num(right - left) +
           "\" height=\"" + num(sy(0.0) - sy(h)) + "\" fill=\"#4a78b5\"/>\n";
    }
    for (const auto& ser : series_) {
      s += "<polyline fill=\"none\" stroke=\"" + color(ser.color) + "\" stroke-width=\"1.5\"";
      if (ser.dashed) s += " stroke-dasharray=\"5,4\"";
      s += " points=\"";
      for (const auto& [x, y] : ser.points) s += num(sx(x)) + "," + num(sy(y)) + " ";
      s += "\"/>\n";
    }
    for (std::size_t i = 0; i < legend_.size(); ++i) {
      const double y = kTop + 14.0 * static_cast<double>(i);
      s += "<rect x=\"" + num(kWidth - kRight - 110) + "\" y=\"" + num(y - 8) +
           "\" width=\"10\" height=\"3\" fill=\"" + color(static_cast<int>(i)) + "\"/>\n";
      s += text(kWidth - kRight - 96, y, legend_[i], "start");
    }
    s += "</svg>\n";
    return s;
  }

 private:
  static constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 20, kTop = 36, kBottom = 44;

  struct Series {
    std::vector<std::pair<double, double>> points;
    bool dashed;
    int color;
  };

  void extend(double x, double y) {
    xmin_ = std::min(xmin_, x);
    xmax_ = std::max(xmax_, x);
    ymin_ = std::min(ymin_, y);
    ymax_ = std::max(ymax_, y);
  }
  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }
  static std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  static std::string color(int i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[static_cast<std::size_t>(i) % 10];
  }
  static std::string escape(const std::string& t) {
    std::string out;
    for (char c : t) {
      if (c == '<') out += "&lt;";
      else if (c == '>') out += "&gt;";
      else if (c == '&') out += "&amp;";
      else out += c;
    }
    return out;
  }
  static std::string text(double x, double y, const std::string& t, const char* anchor, int size = 12) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
           "\" font-size=\"" + std::to_string(size) + "\">" + escape(t) + "</text>\n";
  }

  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
  std::vector<std::pair<double, double>> bars_;
  std::vector<std::string> legend_;
  double xmin_ = std::numeric_limits<double>::infinity();
  double xmax_ = -std::numeric_limits<double>::infinity();
  double ymin_ = std::numeric_limits<double>::infinity();
  double ymax_ = -std::numeric_limits<double>::infinity();
};

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["regularizer"] = family_name(c.family);
  j["N"] = c.unknowns;
  j["P"] = c.measurements;
  j["block_size"] = c.block_size;
  j["side"] = c.side;
  j["r0_target"] = c.r0_target;
  j["noise_std"] = c.noise_std;
  j["lambda_rule"] = c.lambda_rule == LambdaRule::kFixed ? "fixed" : "proportional";
  j["lambda"] = c.lambda;
  j["c0"] = c.c0;
  j["lambda_floor"] = c.lambda_floor;
  j["trials"] = c.trials;
  j["master_seed"] = c.master_seed;
  j["phi_scaling"] = c.phi_scaling == PhiScaling::kUnit ? "unit" : "normalized";
  j["solver"] = solver_name(c.solver);
  j["gamma_factor"] = c.gamma_factor;
  j["tau"] = c.tau;
  j["path_iters"] = c.path_iters;
  j["stop_tol"] = c.stop_tol;
  j["reference_tol"] = c.reference_tol;
  j["reference_max_iters"] = c.reference_max_iters;
  j["certificate_max_iters"] = c.certificate.max_iters;
  j["certificate_tol"] = c.certificate.tol;
  j["r0_grid"] = c.r0_grid;
  j["delta_grid"] = c.delta_grid;
  return j;
}

}  // namespace

const char* version() noexcept { return MIRRORSTRAT_VERSION; }

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string histogram_csv(const ExperimentResult& result) {
  std::string s = "delta,count\n";
  for (const auto& [delta, count] : result.histogram) s += std::to_string(delta) + "," + std::to_string(count) + "\n";
  return s;
}

std::string trials_csv(const ExperimentResult& result) {
  std::string s =
      "trial,seed,valid,lambda,r0_x0,r0_hat,delta,delta_star,unique,sandwich,iterations,"
      "stratum_x0,stratum_hat,stratum_upper\n";
  for (const auto& t : result.trials) {
    s += std::to_string(t.trial) + "," + std::to_string(t.seed) + "," + (t.valid ? "1" : "0") + "," +
         format_real(t.lambda) + "," + std::to_string(t.r0_x0) + "," + std::to_string(t.r0_hat) + "," +
         std::to_string(t.delta) + "," + opt_int(t.delta_star) + "," + (t.unique ? "1" : "0") + "," +
         opt_bool(t.sandwich) + "," + std::to_string(t.iterations) + "," + t.stratum_x0 + "," +
         t.stratum_hat + "," + t.stratum_upper + "\n";
  }
  return s;
}

std::string paths_csv(const ExperimentResult& result) {
  std::string s = "trial,k,r0,stratum\n";
  for (const auto& p : result.paths) {
    for (std::size_t k = 0; k < p.r0.size(); ++k) {
      s += std::to_string(p.trial) + "," + std::to_string(k + 1) + "," + std::to_string(p.r0[k]) + "," +
           p.strata[k] + "\n";
    }
  }
  return s;
}

std::string path_bounds_csv(const ExperimentResult& result) {
  std::string s = "trial,lower,upper\n";
  for (const auto& p : result.paths) {
    s += std::to_string(p.trial) + "," + std::to_string(p.lower_bound) + "," +
         (p.upper_bound ? std::to_string(*p.upper_bound) : "") + "\n";
  }
  return s;
}

std::string phase_csv(const ExperimentResult& result) {
  std::string s = "r0,delta,rho,n_certified,n_trials\n";
  for (const auto& r : result.phase) {
    s += std::to_string(r.r0) + "," + std::to_string(r.delta) + "," + format_real(r.rho) + "," +
         std::to_string(r.n_certified) + "," + std::to_string(r.n_trials) + "\n";
  }
  return s;
}

std::string trace_csv(const SolverTrace& trace) {
  std::string s = "k,objective,r0,stratum,residual\n";
  for (const auto& r : trace.records) {
    s += std::to_string(r.k) + "," + format_real(r.objective) + "," + std::to_string(r.r0) + "," +
         r.stratum + "," + format_real(r.residual) + "\n";
  }
  return s;
}

std::string histogram_svg(const ExperimentResult& result) {
  Chart chart("Complexity index excess", "delta = R0(x_hat) - R0(x0)", "trials");
  for (const auto& [delta, count] : result.histogram) chart.bar(delta, count);
  return chart.render();
}

std::string paths_svg(const ExperimentResult& result) {
  Chart chart("R0 of the iterates", "iteration k", "R0(x_k)");
  const std::size_t shown = std::min<std::size_t>(result.paths.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    const PathTrace& p = result.paths[i];
    if (p.r0.empty()) continue;
    std::vector<std::pair<double, double>> pts;
    pts.reserve(p.r0.size());
    for (std::size_t k = 0; k < p.r0.size(); ++k) pts.emplace_back(k + 1.0, static_cast<double>(p.r0[k]));
    const double kmax = static_cast<double>(p.r0.size());
    const int c = static_cast<int>(i);
    chart.line(std::move(pts), false, c);
    chart.line({{1.0, static_cast<double>(p.lower_bound)}, {kmax, static_cast<double>(p.lower_bound)}}, true, c);
    if (p.upper_bound) {
      const double u = static_cast<double>(*p.upper_bound);
      chart.line({{1.0, u}, {kmax, u}}, true, c);
    }
  }
  return chart.render();
}

std::string phase_svg(const ExperimentResult& result) {
  Chart chart("Proportion certified with delta* <= delta", "R0(x0)", "rho");
  std::vector<int> deltas;
  for (const auto& r : result.phase)
    if (std::find(deltas.begin(), deltas.end(), r.delta) == deltas.end()) deltas.push_back(r.delta);
  for (int d : deltas) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : result.phase)
      if (r.delta == d) pts.emplace_back(r.r0, r.rho);
    chart.line(std::move(pts));
    chart.legend("delta = " + std::to_string(d));
  }
  return chart.render();
}

std::string trace_svg(const SolverTrace& trace) {
  Chart chart("Solver trace", "iteration k", "R0(x_k)");
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : trace.records) pts.emplace_back(r.k, static_cast<double>(r.r0));
  chart.line(std::move(pts));
  return chart.render();
}

std::string manifest_json(const std::string& experiment, const ExperimentResult& result) {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["software"] = "mirrorstrat";
  j["version"] = version();
  j["config"] = config_json(result.config);
  j["tolerances"] = {{"primal_zero_tol", result.config.tolerances.primal_zero_tol},
                     {"dual_saturation_tol", result.config.tolerances.dual_saturation_tol},
                     {"injectivity_threshold", result.config.injectivity_threshold},
                     {"certificate_feasibility_tol", 1e-6}};
  j["lambda_default_note"] =
      "c0 = 0.4 calibrated so that c0 * E|w| matches lambda = 0.28 at noise 0.1, P = 50; not a published value";
  j["seed_derivation"] =
      experiment == "transition"
          ? "trial seed = derive_seed(derive_seed(master_seed, r0), trial); phi/x0/w use derive_seed(trial seed, 0/1/2)"
          : "trial seed = derive_seed(master_seed, trial); phi/x0/w use derive_seed(trial seed, 0/1/2)";
  std::vector<std::uint64_t> seeds;
  seeds.reserve(result.trials.size());
  for (const auto& t : result.trials) seeds.push_back(t.seed);
  j["seeds"] = seeds;
  int valid = 0;
  for (const auto& t : result.trials) valid += t.valid ? 1 : 0;
  j["valid_trials"] = valid;
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << contents;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<std::filesystem::path> write_experiment(const std::filesystem::path& dir,
                                                    const std::string& experiment,
                                                    const ExperimentResult& result) {
  std::vector<std::pair<std::string, std::string>> files;
  if (experiment == "hist") {
    files = {{"histogram.csv", histogram_csv(result)}, {"histogram.svg", histogram_svg(result)}};
  } else if (experiment == "path") {
    files = {{"paths.csv", paths_csv(result)},
             {"paths_bounds.csv", path_bounds_csv(result)},
             {"paths.svg", paths_svg(result)}};
  } else if (experiment == "transition") {
    files = {{"phase.csv", phase_csv(result)}, {"phase.svg", phase_svg(result)}};
  } else {
    throw std::invalid_argument("unknown experiment '" + experiment + "'");
  }
  files.emplace_back("trials.csv", trials_csv(result));
  files.emplace_back("meta.json", manifest_json(experiment, result));
  std::vector<std::filesystem::path> written;
  for (const auto& [name, contents] : files) {
    write_text(dir / name, contents);
    written.push_back(dir / name);
  }
  return written;
}

}  // namespace mirrorstrat
