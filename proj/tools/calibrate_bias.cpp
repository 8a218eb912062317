// Fits the grid-bias coefficients c in estimate - oracle = c sqrt(dt) for
// the slope battery at mu = 1, h = 1, and writes them as JSON. The numbers
// baked into default_bias_coefficients come from this tool.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hslopes/montecarlo.hpp"

int main(int argc, char** argv) {
  CLI::App app{"grid-bias calibration for the slope battery"};
  std::string out_path = "calibration/bias_mu1_h1.json";
  std::uint64_t seed = 1000;
  double scale = 1.0;
  app.add_option("--output,-o", out_path)->capture_default_str();
  app.add_option("--seed", seed, "seeds used here must differ from acceptance seeds")
      ->capture_default_str();
  app.add_option("--scale", scale, "multiply replica counts, for quick runs")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  using hslopes::HarvestConfig;
  const double alpha = 0.5;
  // Coarser grids are cheaper per slope, so they get more replicas.
  const std::vector<std::pair<double, std::size_t>> plan = {{1e-3, 1000}, {4e-4, 400}, {1e-4, 200}};

  nlohmann::ordered_json report;
  report["mu"] = 1.0;
  report["h"] = 1.0;
  report["alpha"] = alpha;
  report["seed"] = seed;
  std::map<std::string, double> sxy, sxx;
  const auto oracles = hslopes::battery_oracles({1.0, 1.0}, alpha);
  nlohmann::ordered_json points = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < plan.size(); ++i) {
    HarvestConfig cfg;
    cfg.spec = {1.0, 1.0};
    cfg.dt = plan[i].first;
    cfg.replicas = std::max<std::size_t>(2, static_cast<std::size_t>(scale * plan[i].second));
    cfg.seed = seed + i;
    const auto est = hslopes::battery_estimates(hslopes::harvest_slopes(cfg), alpha);
    nlohmann::ordered_json p;
    p["dt"] = cfg.dt;
    p["replicas"] = cfg.replicas;
    for (const auto& [name, e] : est) {
      const double x = std::sqrt(cfg.dt);
      const double dev = e.estimate - oracles.at(name);
      p["checks"][name] = {{"estimate", e.estimate}, {"std_error", e.std_error}, {"n", e.n},
                           {"scaled_bias", dev / x}, {"scaled_std_error", e.std_error / x}};
      if (e.std_error > 0.0) {
        const double w = 1.0 / (e.std_error * e.std_error);
        sxy[name] += w * x * dev;
        sxx[name] += w * x * x;
      }
    }
    points.push_back(p);
    std::cerr << "dt " << cfg.dt << " done\n";
  }
  for (const auto& [name, s] : sxx) {
    report["c"][name] = sxy[name] / s;
    report["c_std_error"][name] = 1.0 / std::sqrt(s);
  }
  report["points"] = points;
  std::ofstream f(out_path);
  if (!f) {
    std::cerr << "cannot write " << out_path << '\n';
    return 2;
  }
  f << report.dump(2) << '\n';
  std::cout << report["c"].dump(2) << '\n' << report["c_std_error"].dump(2) << '\n';
  return 0;
}
