#include "hslopes/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "hslopes/conditioned.hpp"
#include "hslopes/error.hpp"
#include "hslopes/extrema.hpp"
#include "hslopes/formulas.hpp"
#include "hslopes/montecarlo.hpp"
#include "hslopes/palm.hpp"
#include "hslopes/sinai.hpp"

namespace hslopes::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct RunConfig {
  std::string subcommand;
  std::string config_file;
  std::string output;
  bool no_timestamp = false;

  double mu = 1.0;
  double h = 1.0;
  std::uint64_t seed = 7;
  unsigned threads = 0;
  double dt = 1e-4;
  double z_max = 4.0;
  double ks_level = 0.01;

  // formulas
  std::string name;
  bool list = false;
  double alpha = 0.5;
  double lambda = 0.0;
  double x = 0.5;
  double y = 1.0;
  double t = 0.1;

  // extract
  std::string input = "-";
  std::string mode = "auto";
  std::string slopes_out;
  std::string report_out;

  // verify
  double horizon_cycles = 100.0;
  std::size_t replicas = 20;
  std::string samples_csv;

  // sde
  std::string eps = "0.05,0.1,0.2";
  std::size_t n_paths = 2000;
  double probe_time = 0.1;
  double stop_time = 100.0;
  std::string functionals = "duration,value_at_t,max_level";
  double marginal_x = 0.0;
  double marginal_t = 0.1;
  std::size_t marginal_paths = 10000;
  std::string durations_csv;

  // palm
  std::size_t pool_size = 10000;
  std::size_t direct_replicas = 2000;
  std::size_t stationary = 10000;
  std::size_t per_side = 2;
  std::string covering_csv;

  // sinai
  double delta = 0.05;
  double gamma = 10.0;
  std::uint64_t n_sites = 10'000'000;
  std::string omega_law = "uniform_logodds";
  double tolerance = 0.10;
  int doubling_levels = 0;

  ModelSpec spec() const { return {mu, h}; }
};

ordered_json config_json(const RunConfig& c) {
  ordered_json j;
  j["subcommand"] = c.subcommand;
  j["mu"] = c.mu;
  j["h"] = c.h;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  if (c.subcommand == "formulas") {
    j["name"] = c.name;
    j["alpha"] = c.alpha;
    j["lambda"] = c.lambda;
    j["x"] = c.x;
    j["y"] = c.y;
    j["t"] = c.t;
  } else if (c.subcommand == "extract") {
    j["input"] = c.input;
    j["mode"] = c.mode;
    j["slopes"] = c.slopes_out;
  } else if (c.subcommand == "verify") {
    j["dt"] = c.dt;
    j["horizon_cycles"] = c.horizon_cycles;
    j["replicas"] = c.replicas;
    j["alpha"] = c.alpha;
    j["z_max"] = c.z_max;
    j["ks_level"] = c.ks_level;
  } else if (c.subcommand == "sde") {
    j["dt"] = c.dt;
    j["eps"] = c.eps;
    j["n_paths"] = c.n_paths;
    j["probe_time"] = c.probe_time;
    j["stop_time"] = c.stop_time;
    j["functionals"] = c.functionals;
    j["marginal_x"] = c.marginal_x;
    j["marginal_t"] = c.marginal_t;
    j["marginal_paths"] = c.marginal_paths;
    j["z_max"] = c.z_max;
    j["ks_level"] = c.ks_level;
  } else if (c.subcommand == "palm") {
    j["dt"] = c.dt;
    j["pool_size"] = c.pool_size;
    j["direct_replicas"] = c.direct_replicas;
    j["stationary"] = c.stationary;
    j["per_side"] = c.per_side;
    j["z_max"] = c.z_max;
    j["ks_level"] = c.ks_level;
  } else if (c.subcommand == "sinai") {
    j["delta"] = c.delta;
    j["gamma"] = c.gamma;
    j["n_sites"] = c.n_sites;
    j["omega_law"] = c.omega_law;
    j["tolerance"] = c.tolerance;
    j["doubling_levels"] = c.doubling_levels;
  }
  return j;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ordered_json to_json(const EstimatorReport& r) {
  ordered_json j;
  j["name"] = r.name;
  j["estimate"] = r.estimate;
  j["std_error"] = r.std_error;
  j["n"] = r.n;
  if (r.oracle) j["oracle"] = *r.oracle;
  if (r.z) j["z"] = *r.z;
  j["allowance"] = r.allowance;
  j["pass"] = r.pass;
  return j;
}

ordered_json to_json(const CoveringStats& s) {
  ordered_json j;
  j["n"] = s.n;
  j["freq_up"] = s.freq_up;
  j["freq_down"] = s.freq_down;
  j["len_gamma0_up"] = to_json(s.len_gamma0_up);
  j["len_gamma0_down"] = to_json(s.len_gamma0_down);
  j["x1_up"] = to_json(s.x1_up);
  j["x1_down"] = to_json(s.x1_down);
  j["x1_histogram"] = {{"width", s.x1_histogram.width}, {"counts", s.x1_histogram.counts}};
  return j;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
  f.precision(17);
  return f;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string("bad ") + what + " value '" + item + "'");
    }
  }
  if (v.empty()) throw InvalidArgument(std::string("empty ") + what + " list");
  return v;
}

// Report envelope shared by every subcommand.
struct Report {
  ordered_json body;
  bool pass = true;
};

// ---- formulas --------------------------------------------------------------

using FormulaFn = std::function<double(const RunConfig&)>;

const std::map<std::string, FormulaFn>& formula_table() {
  static const std::map<std::string, FormulaFn> table = [] {
    std::map<std::string, FormulaFn> t;
    auto moment = [&t](const char* name, double SlopeMoments::*field) {
      t[name] = [field](const RunConfig& c) { return slope_moments(c.spec()).*field; };
    };
    moment("mean_minus_beta", &SlopeMoments::mean_minus_beta);
    moment("mean_excess_up", &SlopeMoments::mean_excess_up);
    moment("mean_excess_down", &SlopeMoments::mean_excess_down);
    moment("mean_len_up", &SlopeMoments::mean_len_up);
    moment("mean_len_down", &SlopeMoments::mean_len_down);
    moment("mean_cycle", &SlopeMoments::mean_cycle);
    moment("prob_cover_up", &SlopeMoments::prob_cover_up);
    moment("prob_cover_down", &SlopeMoments::prob_cover_down);
    t["hat_alpha"] = [](const RunConfig& c) { return alpha_hat(c.alpha, c.mu).hat_alpha; };
    t["exponent_sigma"] = [](const RunConfig& c) {
      return laplace_building_blocks(c.alpha, c.spec()).exponent_sigma;
    };
    t["laplace_sigma_given_beta"] = [](const RunConfig& c) {
      return laplace_sigma_given_beta(c.alpha, c.x, c.spec());
    };
    t["laplace_sigma"] = [](const RunConfig& c) { return laplace_sigma(c.alpha, c.spec()); };
    t["laplace_tau_minus_sigma"] = [](const RunConfig& c) {
      return laplace_tau_minus_sigma(c.alpha, c.spec());
    };
    t["laplace_slope_up"] = [](const RunConfig& c) {
      return laplace_slope(c.alpha, c.lambda, Direction::Up, c.spec());
    };
    t["laplace_slope_down"] = [](const RunConfig& c) {
      return laplace_slope(c.alpha, c.lambda, Direction::Down, c.spec());
    };
    t["laplace_cycle"] = [](const RunConfig& c) { return laplace_cycle(c.alpha, c.spec()); };
    t["cycle_boundary_alpha"] = [](const RunConfig& c) { return cycle_boundary_alpha(c.spec()); };
    for (HittingKind k : {HittingKind::exit_below, HittingKind::exit_above,
                          HittingKind::from_y_to_0_before_h, HittingKind::from_y_to_h_before_0,
                          HittingKind::prob_0_first, HittingKind::prob_h_first,
                          HittingKind::ruin_transform, HittingKind::ruin_mean}) {
      t[to_string(k)] = [k](const RunConfig& c) {
        return hitting_laplace(k, {c.alpha, c.x, c.y}, c.spec());
      };
    }
    t["scale_w"] = [](const RunConfig& c) { return scale_w(c.spec(), c.x); };
    t["scale_w_alpha"] = [](const RunConfig& c) { return scale_w_alpha(c.alpha, c.spec(), c.x); };
    t["scale_z_alpha"] = [](const RunConfig& c) { return scale_z_alpha(c.alpha, c.spec(), c.x); };
    t["n_up"] = [](const RunConfig& c) { return ito_rates(c.alpha, c.spec()).n_up; };
    t["excursion_exponent"] = [](const RunConfig& c) {
      return ito_rates(c.alpha, c.spec()).excursion_exponent;
    };
    t["conditional_hit_laplace"] = [](const RunConfig& c) {
      return ito_rates(c.alpha, c.spec()).conditional_hit_laplace;
    };
    t["qt_density"] = [](const RunConfig& c) { return qt_density(c.t, c.x, c.y, c.spec()); };
    t["conditioned_hit_laplace"] = [](const RunConfig& c) {
      return conditioned_hit_laplace(c.alpha, c.x, c.spec());
    };
    t["conditioned_hit_mean"] = [](const RunConfig& c) { return conditioned_hit_mean(c.spec()); };
    return t;
  }();
  return table;
}

// Short names accepted for table entries.
const std::map<std::string, std::string>& formula_aliases() {
  static const std::map<std::string, std::string> a = {{"mango", "laplace_cycle"}};
  return a;
}

Report run_formulas(const RunConfig& c) {
  Report r;
  const auto& table = formula_table();
  if (c.list) {
    ordered_json names = ordered_json::array();
    for (const auto& [n, f] : table) names.push_back(n);
    r.body["names"] = names;
    r.body["aliases"] = formula_aliases();
    return r;
  }
  if (c.name.empty()) throw InvalidArgument("formulas needs --name (or --list)");
  std::string name = c.name;
  if (const auto it = formula_aliases().find(name); it != formula_aliases().end()) name = it->second;
  const auto it = table.find(name);
  if (it == table.end()) throw InvalidArgument("unknown formula '" + c.name + "'");
  c.spec().validate();

  r.body["name"] = name;
  r.body["params"] = {{"mu", c.mu}, {"h", c.h}, {"alpha", c.alpha}, {"lambda", c.lambda},
                      {"x", c.x},   {"y", c.y}, {"t", c.t}};
  try {
    r.body["value"] = it->second(c);
    r.body["domain_ok"] = true;
  } catch (const DomainError& e) {
    r.body["value"] = nullptr;
    r.body["domain_ok"] = false;
    r.body["condition"] = e.condition();
    if (e.boundary()) r.body["boundary_alpha"] = *e.boundary();
    r.pass = false;
  } catch (const Unsupported& e) {
    r.body["value"] = nullptr;
    r.body["domain_ok"] = false;
    r.body["condition"] = e.what();
    r.pass = false;
  }
  return r;
}

// ---- extract ---------------------------------------------------------------

SweepMode parse_mode(const std::string& m) {
  if (m == "auto") return SweepMode::Auto;
  if (m == "max") return SweepMode::SeekMax;
  if (m == "min") return SweepMode::SeekMin;
  throw InvalidArgument("mode must be auto, max or min");
}

bool parse_row(const std::string& line, double& t, double& v) {
  const auto comma = line.find(',');
  if (comma == std::string::npos) return false;
  try {
    std::size_t a = 0;
    std::size_t b = 0;
    const std::string ts = line.substr(0, comma);
    const std::string vs = line.substr(comma + 1);
    t = std::stod(ts, &a);
    v = std::stod(vs, &b);
    auto blank = [](const std::string& s, std::size_t from) {
      return s.find_first_not_of(" \t\r", from) == std::string::npos;
    };
    return blank(ts, a) && blank(vs, b);
  } catch (const std::exception&) {
    return false;
  }
}

Report run_extract(const RunConfig& c, std::istream& in, std::ostream& out) {
  if (!(c.h > 0.0) || !std::isfinite(c.h)) throw InvalidArgument("h must be positive");
  const SweepMode mode = parse_mode(c.mode);
  std::ifstream file;
  std::istream* src = &in;
  if (c.input != "-") {
    file.open(c.input);
    if (!file) throw InvalidArgument("cannot read '" + c.input + "'");
    src = &file;
  }
  std::ofstream slopes;
  if (!c.slopes_out.empty()) {
    slopes = open_out(c.slopes_out);
    slopes << "t_start,t_end,direction,length,height,excess\n";
  }
  std::ofstream extrema_file;
  if (!c.output.empty()) extrema_file = open_out(c.output);
  std::ostream& ext = c.output.empty() ? out : extrema_file;
  ext.precision(17);
  ext << "t,value,kind\n";

  StreamingDetector det(c.h, mode);
  std::optional<HExtremum> prev;
  bool anchor = true;
  std::size_t rows = 0;
  std::size_t n_extrema = 0;
  std::size_t line_no = 0;
  for (std::string line; std::getline(*src, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    double t = 0.0;
    double v = 0.0;
    if (!parse_row(line, t, v)) {
      if (rows == 0 && line_no == 1) continue;  // header
      throw InvalidArgument("line " + std::to_string(line_no) + " is not 't,value'");
    }
    ++rows;
    const auto e = det.push(t, v);
    if (!e) continue;
    // The first confirmed point is pinned to the start of the data.
    if (anchor) {
      anchor = false;
      continue;
    }
    ++n_extrema;
    ext << e->time << ',' << e->level << ',' << to_string(e->kind) << '\n';
    if (prev && slopes.is_open()) {
      const Slope s = make_slope(*prev, *e, c.h);
      slopes << s.start.time << ',' << s.end.time << ',' << to_string(s.direction) << ','
             << s.length << ',' << s.height << ',' << s.excess << '\n';
    }
    prev = e;
  }
  Report r;
  r.body["rows"] = rows;
  r.body["extrema"] = n_extrema;
  return r;
}

// ---- verify ----------------------------------------------------------------

Report run_verify(const RunConfig& c) {
  BatteryConfig bc;
  bc.harvest.spec = c.spec();
  bc.harvest.dt = c.dt;
  bc.harvest.horizon_cycles = c.horizon_cycles;
  bc.harvest.replicas = c.replicas;
  bc.harvest.seed = c.seed;
  bc.harvest.threads = c.threads;
  bc.alpha = c.alpha;
  bc.z_max = c.z_max;
  bc.ks_level = c.ks_level;
  bc.harvest.validate();
  alpha_hat(c.alpha, c.mu);

  const Harvest harvest = harvest_slopes(bc.harvest);
  const VerificationReport rep = verify_harvest(harvest, bc);
  if (!c.samples_csv.empty()) {
    auto f = open_out(c.samples_csv);
    f << "direction,length,height,excess\n";
    for (const auto* side : {&harvest.up, &harvest.down})
      for (const auto& s : *side)
        f << to_string(s.direction) << ',' << s.length << ',' << s.height << ',' << s.excess << '\n';
  }
  Report r;
  r.pass = rep.pass;
  r.body["n_up"] = rep.n_up;
  r.body["n_down"] = rep.n_down;
  r.body["n_covering"] = rep.n_covering;
  r.body["bias"] = {{"source", rep.config.bias->source}, {"c", rep.config.bias->c}};
  ordered_json checks = ordered_json::array();
  for (const auto& ch : rep.checks) checks.push_back(to_json(ch));
  r.body["checks"] = checks;
  ordered_json ks = ordered_json::array();
  for (const auto& k : rep.ks)
    ks.push_back({{"name", k.name}, {"statistic", k.statistic}, {"p_value", k.p_value},
                  {"n", k.n}, {"reference_mean", k.reference_mean}, {"pass", k.pass}});
  r.body["ks"] = ks;
  return r;
}

// ---- sde -------------------------------------------------------------------

Report run_sde(const RunConfig& c) {
  const ModelSpec spec = c.spec();
  spec.require_nonzero_drift();
  if (!(c.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (c.n_paths < 2) throw InvalidArgument("n_paths must be at least 2");
  const auto eps_values = parse_list(c.eps, "eps");
  for (double e : eps_values)
    if (!(e > 0.0 && e < spec.h)) throw InvalidArgument("eps values must lie in (0, h)");
  std::vector<std::string> wanted;
  {
    std::stringstream ss(c.functionals);
    for (std::string f; std::getline(ss, f, ',');) {
      if (f != "duration" && f != "value_at_t" && f != "max_level")
        throw InvalidArgument("unknown functional '" + f + "'");
      wanted.push_back(f);
    }
  }
  std::ofstream csv;
  if (!c.durations_csv.empty()) {
    csv = open_out(c.durations_csv);
    csv << "eps,sampler,duration\n";
  }

  Report r;
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < eps_values.size(); ++k) {
    const double eps = eps_values[k];
    const std::uint64_t base = derive_seed(c.seed, k);

    RngStream rs = spawn_stream(derive_seed(base, 0), 0);
    std::vector<PathSummary> rejected;
    std::size_t attempts = 0;
    for (std::size_t i = 0; i < c.n_paths; ++i) {
      auto res = doob_rejection(rs, spec, c.dt, eps, c.probe_time);
      attempts += res.attempts;
      rejected.push_back(res.path.summary);
    }
    std::vector<PathSummary> sde;
    SdeOptions o;
    o.dt = c.dt;
    o.eps0 = eps;
    o.probe_time = c.probe_time;
    o.stop_time = c.stop_time;
    for (std::size_t i = 0; i < c.n_paths; ++i) {
      RngStream s = spawn_stream(derive_seed(base, 1), i);
      sde.push_back(integrate_coth_sde(s, spec, o).summary);
    }
    const auto halved = sde_eps_study(spec, c.dt, {eps / 2.0}, c.n_paths, derive_seed(base, 1));

    // Successes among attempts: n / attempts with geometric spread.
    const double n = static_cast<double>(c.n_paths);
    const double rate = n / static_cast<double>(attempts);
    EstimatorReport acc;
    acc.name = "acceptance_rate";
    acc.estimate = rate;
    acc.std_error = rate * std::sqrt((1.0 - rate) / n);
    acc.n = attempts;
    acc = judge(acc, scale_w(spec, eps) / scale_w(spec, spec.h), c.z_max,
                rejection_rate_allowance(spec, c.dt, eps));
    r.pass = r.pass && acc.pass;

    const LawComparison cmp = compare_laws(rejected, sde);
    ordered_json fs = ordered_json::array();
    for (const auto& f : cmp.functionals) {
      const bool checked = std::find(wanted.begin(), wanted.end(), f.functional) != wanted.end();
      if (!checked) continue;
      const bool pass = f.p_value > c.ks_level;
      r.pass = r.pass && pass;
      fs.push_back({{"functional", f.functional}, {"mean_rejection", f.mean_a}, {"mean_sde", f.mean_b},
                    {"ks_statistic", f.ks_statistic}, {"p_value", f.p_value}, {"pass", pass}});
    }
    if (csv.is_open()) {
      for (const auto& s : rejected) csv << eps << ",rejection," << s.duration << '\n';
      for (const auto& s : sde)
        if (!s.censored) csv << eps << ",sde," << s.duration << '\n';
    }
    std::size_t censored = 0;
    for (const auto& s : sde) censored += s.censored;
    rows.push_back({{"eps", eps},
                    {"acceptance", to_json(acc)},
                    {"n_rejection", cmp.n_a},
                    {"n_sde", cmp.n_b},
                    {"sde_censored", censored},
                    {"comparisons", fs},
                    {"sde_duration_mean_half_eps", to_json(halved.front().duration)}});
  }
  r.body["rows"] = rows;

  if (c.marginal_x > 0.0) {
    SdeOptions o;
    o.dt = c.dt;
    o.eps0 = c.marginal_x;
    o.absorb = false;
    o.stop_time = c.marginal_t;
    o.probe_time = c.marginal_t;
    if (!(c.marginal_x < spec.h)) throw InvalidArgument("marginal-x must lie in (0, h)");
    std::vector<double> v;
    for (std::size_t i = 0; i < c.marginal_paths; ++i) {
      RngStream s = spawn_stream(derive_seed(c.seed, 1000), i);
      v.push_back(integrate_coth_sde(s, spec, o).summary.value_at_t);
    }
    const auto chi = qt_chi_square(v, c.marginal_t, c.marginal_x, spec, 30);
    const bool pass = chi.p_value > c.ks_level;
    r.pass = r.pass && pass;
    r.body["marginal"] = {{"x", c.marginal_x},      {"t", c.marginal_t},   {"n", v.size()},
                          {"chi_square", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value},
                          {"pass", pass}};
  }
  return r;
}

// ---- palm ------------------------------------------------------------------

Report run_palm(const RunConfig& c) {
  const ModelSpec spec = c.spec();
  spec.require_nonzero_drift();
  if (!(c.dt > 0.0)) throw InvalidArgument("dt must be positive");
  if (c.pool_size < 1000) throw InvalidArgument("pool_size must be at least 1000");
  if (c.direct_replicas < 2 || c.stationary < 2)
    throw InvalidArgument("need at least two sequences per construction");

  const SlopePool pool = build_pool(spec, c.dt, c.pool_size, derive_seed(c.seed, 0), c.threads);
  const auto direct = sample_direct(spec, c.dt, c.direct_replicas, derive_seed(c.seed, 1), c.threads);
  RngStream s = spawn_stream(derive_seed(c.seed, 2), 0);
  std::vector<MarkedSequence> stationary;
  stationary.reserve(c.stationary);
  for (std::size_t i = 0; i < c.stationary; ++i) stationary.push_back(sample_stationary(s, pool, c.per_side));
  const PalmComparison cmp = compare_constructions(direct, stationary, pool, spec);

  auto freq_check = [&](const char* name, const CoveringStats& st) {
    EstimatorReport e;
    e.name = name;
    e.estimate = st.freq_up;
    e.n = st.n;
    e.std_error = std::sqrt(cmp.oracle_cover_up * (1.0 - cmp.oracle_cover_up) / static_cast<double>(st.n));
    return judge(e, cmp.oracle_cover_up, c.z_max, 0.0);
  };
  const auto fd = freq_check("cover_up_direct", cmp.direct);
  const auto fs = freq_check("cover_up_stationary", cmp.stationary);
  const bool agree = std::abs(cmp.freq_z) <= c.z_max;
  const bool ks = cmp.x1_ks_p > c.ks_level;
  const bool bias_d = cmp.length_bias_z_direct > c.z_max;
  const bool bias_s = cmp.length_bias_z_stationary > c.z_max;

  Report r;
  r.pass = fd.pass && fs.pass && agree && ks && bias_d && bias_s;
  r.body["oracle_cover_up"] = cmp.oracle_cover_up;
  r.body["pool"] = {{"size", c.pool_size},
                    {"mean_len_up", pool.mean_length(Direction::Up)},
                    {"mean_len_down", pool.mean_length(Direction::Down)},
                    {"cover_up", pool.cover_probability(Direction::Up)}};
  r.body["direct"] = to_json(cmp.direct);
  r.body["stationary"] = to_json(cmp.stationary);
  ordered_json checks = ordered_json::array();
  checks.push_back(to_json(fd));
  checks.push_back(to_json(fs));
  auto simple = [&](const char* name, const char* key, double value, bool pass) {
    ordered_json j;
    j["name"] = name;
    j[key] = value;
    j["pass"] = pass;
    checks.push_back(j);
  };
  simple("cover_up_agreement", "z", cmp.freq_z, agree);
  simple("x1_two_sample_ks", "p_value", cmp.x1_ks_p, ks);
  simple("length_bias_direct", "z", cmp.length_bias_z_direct, bias_d);
  simple("length_bias_stationary", "z", cmp.length_bias_z_stationary, bias_s);
  r.body["checks"] = checks;
  if (!c.covering_csv.empty()) {
    auto f = open_out(c.covering_csv);
    f << "construction,origin_kind,x1,len_gamma0\n";
    for (const std::vector<MarkedSequence>* set : {&direct, &std::as_const(stationary)})
      for (const auto& m : *set)
        f << (set == &direct ? "direct" : "stationary") << ',' << to_string(m.origin_kind()) << ','
          << m.x1() << ',' << m.marks[m.origin].length << '\n';
  }
  return r;
}

// ---- sinai -----------------------------------------------------------------

ordered_json to_json(const SinaiRecord& rec) {
  ordered_json j;
  j["delta"] = rec.config.delta;
  j["gamma"] = rec.config.gamma;
  j["n_sites"] = rec.config.n_sites;
  j["mu"] = rec.mu;
  j["h"] = rec.h;
  ordered_json q = ordered_json::array();
  for (const auto& [e, o] : {std::pair{&rec.zeta_up, rec.oracle_zeta_up},
                             std::pair{&rec.zeta_down, rec.oracle_zeta_down},
                             std::pair{&rec.len_up, rec.oracle_len_up},
                             std::pair{&rec.len_down, rec.oracle_len_down}}) {
    auto row = to_json(*e);
    row["oracle"] = o;
    row["relative_error"] = e->estimate / o - 1.0;
    q.push_back(row);
  }
  j["quantities"] = q;
  j["max_relative_error"] = rec.max_relative_error();
  return j;
}

Report run_sinai(const RunConfig& c) {
  SinaiConfig sc;
  sc.delta = c.delta;
  sc.gamma = c.gamma;
  sc.n_sites = c.n_sites;
  sc.seed = c.seed;
  sc.omega_law = parse_omega_law(c.omega_law);
  sc.validate();
  if (c.doubling_levels < 0) throw InvalidArgument("doubling-levels must be non-negative");

  Report r;
  const SinaiRecord rec = sinai_experiment(sc);
  r.body["result"] = to_json(rec);
  r.pass = rec.max_relative_error() <= c.tolerance;
  r.body["tolerance"] = c.tolerance;
  if (c.doubling_levels > 0) {
    SinaiConfig next = sc;
    next.gamma *= 2.0;
    next.delta /= 2.0;
    next.n_sites *= 4;
    ordered_json study = ordered_json::array();
    for (const auto& s : gamma_doubling_study(next, c.doubling_levels)) study.push_back(to_json(s));
    r.body["doubling_study"] = study;
  }
  return r;
}

// ---- argument handling -----------------------------------------------------

void add_common(CLI::App& sub, RunConfig& c) {
  sub.add_option("--mu", c.mu, "drift parameter (the motion is B - mu t)")->capture_default_str();
  sub.add_option("--h", c.h, "threshold h > 0")->capture_default_str();
  sub.add_option("--seed", c.seed, "master seed")->envname("HSLOPES_SEED")->capture_default_str();
  sub.add_option("--threads", c.threads, "worker threads, 0 = all cores")->capture_default_str();
  sub.add_option("--output,-o", c.output, "write the JSON report here instead of stdout");
  sub.add_flag("--no-timestamp", c.no_timestamp, "omit the generation time from the report");
  sub.add_option("--config", c.config_file, "JSON file of option values");
}

// Turns {"key": value, ...} into "--key value" pairs.
std::vector<std::string> config_args(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot read config '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw InvalidArgument("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : j.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (flag == "--config" || flag == "--subcommand") continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_string()) {
      out.insert(out.end(), {flag, value.get<std::string>()});
    } else if (value.is_number()) {
      out.insert(out.end(), {flag, value.dump()});
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.get<std::string>() : v.dump());
      out.insert(out.end(), {flag, joined});
    } else {
      throw InvalidArgument("config value for '" + key + "' has an unsupported type");
    }
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  RunConfig c;
  CLI::App app{"h-extrema and h-slopes of drifted Brownian motion", "hslopes"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  // -h would clash with the threshold flag --h.
  app.set_help_flag("--help", "print this help and exit");

  auto* formulas = app.add_subcommand("formulas", "evaluate a closed-form law");
  add_common(*formulas, c);
  formulas->add_option("--name", c.name, "formula name (see --list)");
  formulas->add_flag("--list", c.list, "list formula names");
  formulas->add_option("--alpha", c.alpha)->capture_default_str();
  formulas->add_option("--lambda", c.lambda)->capture_default_str();
  formulas->add_option("--x", c.x)->capture_default_str();
  formulas->add_option("--y", c.y)->capture_default_str();
  formulas->add_option("--t", c.t)->capture_default_str();

  auto* extract = app.add_subcommand("extract", "h-extrema of a (t,value) CSV series");
  add_common(*extract, c);
  extract->add_option("--input,-i", c.input, "CSV file, '-' for stdin")->capture_default_str();
  extract->add_option("--mode", c.mode, "auto, max or min")->capture_default_str();
  extract->add_option("--slopes", c.slopes_out, "also write slopes CSV here");
  extract->add_option("--report", c.report_out, "also write a JSON summary here");

  auto* verify = app.add_subcommand("verify", "slope statistics battery against exact laws");
  add_common(*verify, c);
  verify->add_option("--dt", c.dt)->capture_default_str();
  verify->add_option("--horizon-cycles", c.horizon_cycles)->capture_default_str();
  verify->add_option("--replicas", c.replicas)->capture_default_str();
  verify->add_option("--alpha", c.alpha)->capture_default_str();
  verify->add_option("--z-max", c.z_max)->capture_default_str();
  verify->add_option("--ks-level", c.ks_level)->capture_default_str();
  verify->add_option("--samples-csv", c.samples_csv, "raw slope samples");

  auto* sde = app.add_subcommand("sde", "conditioned diffusion: rejection sampler vs SDE");
  add_common(*sde, c);
  sde->add_option("--dt", c.dt)->capture_default_str();
  sde->add_option("--eps", c.eps, "comma-separated start levels")->capture_default_str();
  sde->add_option("--n-paths", c.n_paths)->capture_default_str();
  sde->add_option("--probe-time", c.probe_time)->capture_default_str();
  sde->add_option("--stop-time", c.stop_time)->capture_default_str();
  sde->add_option("--functionals", c.functionals)->capture_default_str();
  sde->add_option("--marginal-x", c.marginal_x, "if > 0, also test X_t from this start")->capture_default_str();
  sde->add_option("--marginal-t", c.marginal_t)->capture_default_str();
  sde->add_option("--marginal-paths", c.marginal_paths)->capture_default_str();
  sde->add_option("--z-max", c.z_max)->capture_default_str();
  sde->add_option("--ks-level", c.ks_level)->capture_default_str();
  sde->add_option("--durations-csv", c.durations_csv);

  auto* palm = app.add_subcommand("palm", "covering slope: direct paths vs stationary construction");
  add_common(*palm, c);
  palm->add_option("--dt", c.dt)->capture_default_str();
  palm->add_option("--pool-size", c.pool_size)->capture_default_str();
  palm->add_option("--direct-replicas", c.direct_replicas)->capture_default_str();
  palm->add_option("--stationary", c.stationary)->capture_default_str();
  palm->add_option("--per-side", c.per_side)->capture_default_str();
  palm->add_option("--z-max", c.z_max)->capture_default_str();
  palm->add_option("--ks-level", c.ks_level)->capture_default_str();
  palm->add_option("--csv", c.covering_csv);

  auto* sinai = app.add_subcommand("sinai", "Gamma-slopes of a Sinai potential");
  add_common(*sinai, c);
  sinai->add_option("--delta", c.delta)->capture_default_str();
  sinai->add_option("--gamma", c.gamma)->capture_default_str();
  sinai->add_option("--n-sites", c.n_sites)->capture_default_str();
  sinai->add_option("--omega-law", c.omega_law, "uniform_logodds or rademacher")->capture_default_str();
  sinai->add_option("--tolerance", c.tolerance)->capture_default_str();
  sinai->add_option("--doubling-levels", c.doubling_levels)->capture_default_str();

  // Config values go right after the subcommand so command-line flags,
  // parsed later, win.
  std::vector<std::string> argv = args;
  try {
    for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
      if (argv[i] != "--config") continue;
      const auto extra = config_args(argv[i + 1]);
      std::size_t at = 0;
      for (std::size_t k = 0; k < argv.size(); ++k)
        if (app.get_subcommand_no_throw(argv[k])) {
          at = k + 1;
          break;
        }
      argv.insert(argv.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
      break;
    }
  } catch (const InvalidArgument& e) {
    err << "hslopes: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "hslopes: " << e.what() << "\n\n" << app.help();
    return kExitConfigError;
  }
  c.subcommand = app.get_subcommands().front()->get_name();

  Report rep;
  try {
    if (c.subcommand == "formulas") rep = run_formulas(c);
    else if (c.subcommand == "extract") rep = run_extract(c, in, out);
    else if (c.subcommand == "verify") rep = run_verify(c);
    else if (c.subcommand == "sde") rep = run_sde(c);
    else if (c.subcommand == "palm") rep = run_palm(c);
    else rep = run_sinai(c);
  } catch (const InvalidArgument& e) {
    err << "hslopes: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const DomainError& e) {
    err << "hslopes: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Unsupported& e) {
    err << "hslopes: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const HorizonTooShort& e) {
    err << "hslopes: " << e.what() << '\n';
    return kExitConfigError;
  }

  ordered_json report;
  report["schema"] = 1;
  report["command"] = c.subcommand;
  if (!c.no_timestamp) report["generated_at"] = utc_now();
  report["config"] = config_json(c);
  report["pass"] = rep.pass;
  for (auto& [k, v] : rep.body.items()) report[k] = v;
  const std::string text = report.dump(2) + "\n";

  // extract streams CSV to stdout; its JSON summary only goes to a file.
  const std::string& target = c.subcommand == "extract" ? c.report_out : c.output;

  try {
    if (!target.empty()) {
      auto f = open_out(target);
      f << text;
    } else if (c.subcommand != "extract") {
      out << text;
    }
  } catch (const InvalidArgument& e) {
    err << "hslopes: " << e.what() << '\n';
    return kExitConfigError;
  }
  return rep.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace hslopes::cli
