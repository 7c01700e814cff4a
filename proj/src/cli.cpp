#include "sdelab/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "sdelab/config.hpp"
#include "sdelab/coupling.hpp"
#include "sdelab/error.hpp"
#include "sdelab/integrators.hpp"
#include "sdelab/metrics.hpp"
#include "sdelab/rate_lab.hpp"
#include "sdelab/test_functions.hpp"

namespace sdelab {

namespace {

constexpr int kBandMiss = 2;

// Flag storage shared by the subcommands; each subcommand registers only the
// flags it reads.
struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string summary;
  std::string dt;
  std::size_t samples = 0;
  std::size_t budget = 0;
  double T = 0.0;
  std::string scheme;
  std::string problem;
  std::string function;
  std::string metric;
  std::string band;
  std::size_t reference_draws = 0;
  unsigned workers = 0;
  std::string x;
  int s = 0;
  int order = 0;
  double alpha = 0.0;
  std::string eps;
  std::string x_grid;
  std::string dictionary;
  std::string mollifier;
  double dt_min = 0.0, dt_max = 0.0;
  std::vector<std::string> inputs;
};

struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, CLI::Option*> opts;
  bool given(const std::string& name) const {
    auto it = opts.find(name);
    return it != opts.end() && it->second->count() > 0;
  }
};

nlohmann::json parse_json_flag(const std::string& flag, const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(flag, std::string("not valid JSON: ") + e.what());
  }
}

std::vector<double> list_flag(const std::string& flag, const std::string& text) {
  try {
    return parse_real_list(text);
  } catch (const std::exception& e) {
    throw ConfigError(flag, e.what());
  }
}

// Config file first, then flags on top.
ExperimentConfig resolve(const std::string& name, const Command& c, const Flags& f) {
  ExperimentConfig cfg = c.given("--config") ? ExperimentConfig::load(f.config) : ExperimentConfig{};
  if (!cfg.command.empty() && cfg.command != name)
    throw ConfigError("command", "config is for '" + cfg.command + "', not '" + name + "'");
  cfg.command = name;
  if (c.given("--seed")) cfg.seed = f.seed;
  if (c.given("--out")) cfg.out = f.out;
  if (c.given("--dt")) cfg.dt = list_flag("--dt", f.dt);
  if (c.given("--samples")) cfg.samples = f.samples;
  if (c.given("--budget")) cfg.budget = f.budget;
  if (c.given("--T")) cfg.T = f.T;
  if (c.given("--scheme")) cfg.scheme = f.scheme;
  if (c.given("--problem")) cfg.problem = parse_json_flag("--problem", f.problem);
  if (c.given("--function")) cfg.function = parse_json_flag("--function", f.function);
  if (c.given("--metric")) cfg.metric = f.metric;
  if (c.given("--band")) {
    cfg.band = list_flag("--band", f.band);
    if (cfg.band->size() != 2) throw ConfigError("--band", "expected lo,hi");
  }
  if (c.given("--reference-draws")) cfg.reference_draws = f.reference_draws;
  if (c.given("--workers")) cfg.workers = f.workers;
  if (c.given("--x")) cfg.x = list_flag("--x", f.x);
  if (c.given("--s")) cfg.s = f.s;
  if (c.given("--order")) cfg.order = f.order;
  if (c.given("--alpha")) cfg.alpha = f.alpha;
  if (c.given("--eps")) cfg.eps = list_flag("--eps", f.eps);
  if (c.given("--x-grid")) {
    const auto v = list_flag("--x-grid", f.x_grid);
    if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2])) throw ConfigError("--x-grid", "expected lo,hi,count");
    cfg.x_grid = {v[0], v[1], static_cast<std::size_t>(v[2])};
  }
  if (c.given("--dictionary")) {
    std::ifstream in(f.dictionary);
    if (!in) throw ConfigError("--dictionary", "cannot open '" + f.dictionary + "'");
    try {
      cfg.dictionary = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("--dictionary", e.what());
    }
  }
  if (c.given("--mollifier")) cfg.mollifier = parse_json_flag("--mollifier", f.mollifier);
  if (c.given("inputs")) cfg.inputs = f.inputs;
  return cfg;
}

SdeProblem problem_of(const ExperimentConfig& cfg) {
  if (cfg.problem.empty()) throw ConfigError("problem", "missing");
  return problem_from_json(cfg.problem);
}

SchemeIncrement scheme_of(const SdeProblem& p, const ExperimentConfig& cfg) {
  try {
    return scheme_by_name(p, cfg.scheme);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("scheme", e.what());
  }
}

void need_dt(const ExperimentConfig& cfg) {
  if (cfg.dt.empty()) throw ConfigError("dt", "missing");
}

DiscreteMeasure load_measure(const ExperimentConfig& cfg, std::size_t k, nlohmann::json* subsample_seed = nullptr) {
  if (cfg.inputs.size() <= k) throw ConfigError("inputs", "expected " + std::to_string(k + 1) + " measure files");
  DiscreteMeasure m = read_measure_csv(cfg.inputs[k]);
  if (subsample_seed) *subsample_seed = nullptr;
  if (cfg.budget > 0 && m.size() > cfg.budget) {
    const std::uint64_t seed = derive_seed(cfg.seed, k);
    m = m.subsample(cfg.budget, seed);
    if (subsample_seed) *subsample_seed = seed;
  }
  return m;
}

nlohmann::json real_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

struct Outcome {
  std::string line;
  nlohmann::json record = nlohmann::json::object();
  int status = 0;
};

void write_summary(const ExperimentConfig& cfg, const Flags& f, const Command& c, Outcome& o) {
  std::string path = c.given("--summary") ? f.summary : (cfg.out.empty() ? "" : cfg.out + ".summary.json");
  if (path.empty()) return;
  o.record["command"] = cfg.command;
  o.record["config"] = cfg.to_json();
  o.record["status"] = o.status;
  o.record["line"] = o.line;
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << o.record.dump(2) << '\n';
}

// Fit plus band evaluation shared by the series commands.
void summarize_series(const ExperimentConfig& cfg, const ErrorSeries& series, Outcome& o, bool lower_only,
                      const FitWindow& window = {}) {
  if (!cfg.out.empty()) write_series_csv(cfg.out, series);
  nlohmann::json entries = nlohmann::json::array();
  std::vector<double> floors;
  for (const auto& e : series.entries) {
    entries.push_back({{"dt", e.dt},
                       {"error", e.error},
                       {"std_error", real_or_null(e.std_error)},
                       {"floor", real_or_null(e.floor)},
                       {"samples", e.samples},
                       {"seed", e.seed},
                       {"usable", usable_for_fit(e)}});
  }
  o.record["kind"] = series.kind;
  o.record["label"] = series.label;
  o.record["entries"] = entries;
  o.record["budget"] = series.budget;
  if (std::isfinite(series.reference)) {
    o.record["reference"] = series.reference;
    o.record["reference_std_error"] = series.reference_std_error;
  }
  std::ostringstream line;
  line << series.kind << ' ' << series.label;
  std::optional<RateFit> fit;
  try {
    fit = fit_rate(series, window);
  } catch (const std::invalid_argument& e) {
    o.record["fit_error"] = e.what();
    line << " fit: " << e.what();
  }
  if (fit) {
    o.record["slope"] = fit->slope;
    o.record["intercept"] = fit->intercept;
    o.record["residual_sum"] = fit->residual_sum;
    o.record["used"] = fit->used;
    o.record["leverage"] = fit->leverage;
    o.record["window"] = {real_or_null(fit->window.dt_min), real_or_null(fit->window.dt_max)};
    line << " slope=" << format_real(fit->slope) << " intercept=" << format_real(fit->intercept)
         << " used=" << fit->used.size() << '/' << series.entries.size();
  }
  if (!series.entries.empty() && std::isfinite(series.entries.front().floor))
    line << " floor=" << format_real(series.entries.front().floor);
  if (series.budget > 0) line << " budget=" << series.budget;
  if (cfg.band) {
    const double lo = (*cfg.band)[0], hi = (*cfg.band)[1];
    const bool pass = fit && fit->slope >= lo && (lower_only || fit->slope <= hi);
    o.record["band"] = *cfg.band;
    o.record["pass"] = pass;
    std::ostringstream band;
    band << '[' << lo << ',';
    if (lower_only) band << "inf";
    else band << hi;
    band << ']';
    line << " band=" << band.str() << ' '
         << (pass ? "pass" : "miss");
    if (!pass) o.status = kBandMiss;
  }
  o.line = line.str();
}

// ---------------------------------------------------------------- subcommands

Outcome cmd_simulate(const ExperimentConfig& cfg) {
  const SdeProblem p = problem_of(cfg);
  need_dt(cfg);
  const DiscretePath path = simulate_path(p, scheme_of(p, cfg), cfg.dt.front(), cfg.T, NoiseStream(cfg.seed, 0));
  if (!cfg.out.empty()) write_path_csv(cfg.out, path);
  Outcome o;
  std::ostringstream line;
  line << "simulate " << p.label << " steps=" << path.times.size() - 1 << " X(T)=";
  const auto last = path.state(path.times.size() - 1);
  for (std::size_t i = 0; i < last.size(); ++i) line << (i ? "," : "") << format_real(last[i]);
  o.line = line.str();
  o.record["terminal"] = std::vector<double>(last.begin(), last.end());
  return o;
}

Outcome cmd_cloud(const ExperimentConfig& cfg) {
  const SdeProblem p = problem_of(cfg);
  DiscreteMeasure cloud = DiscreteMeasure::uniform(1, std::vector<double>{0.0});
  if (cfg.scheme == "analytic") {
    cloud = sample_analytic_cloud(p, cfg.T, cfg.samples, cfg.seed, cfg.workers);
  } else {
    need_dt(cfg);
    cloud = sample_terminal_cloud(p, scheme_of(p, cfg), cfg.dt.front(), cfg.T, cfg.samples, cfg.seed, cfg.workers);
  }
  if (!cfg.out.empty()) write_measure_csv(cfg.out, cloud);
  Outcome o;
  std::vector<double> mean(cloud.dim(), 0.0);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t d = 0; d < cloud.dim(); ++d) mean[d] += cloud.coord(i, d);
  std::ostringstream line;
  line << "cloud " << p.label << " M=" << cloud.size() << " mean=";
  for (std::size_t d = 0; d < mean.size(); ++d) {
    mean[d] /= static_cast<double>(cloud.size());
    line << (d ? "," : "") << format_real(mean[d]);
  }
  o.line = line.str();
  o.record["mean"] = mean;
  return o;
}

Outcome cmd_distance(const ExperimentConfig& cfg, bool prokhorov) {
  const DiscreteMeasure a = load_measure(cfg, 0), b = load_measure(cfg, 1);
  const double v = prokhorov ? prokhorov_exact(a, b) : wasserstein1(a, b);
  Outcome o;
  o.line = format_real(v);
  o.record["value"] = v;
  o.record["atoms"] = {a.size(), b.size()};
  if (prokhorov) o.record["exact"] = format_exact(prokhorov_exact_result(a, b).value);
  return o;
}

Outcome cmd_beta(const ExperimentConfig& cfg) {
  const DiscreteMeasure a = load_measure(cfg, 0), b = load_measure(cfg, 1);
  const std::vector<TestFunction> dict =
      cfg.dictionary.empty() ? default_dictionary(a, b, cfg.order) : dictionary_from_json(cfg.dictionary, a.dim());
  const double v = beta_lower(a, b, cfg.order, dict);
  Outcome o;
  o.line = format_real(v);
  o.record["beta_lower"] = v;
  o.record["order"] = cfg.order;
  o.record["dictionary_size"] = dict.size();
  return o;
}

Outcome cmd_mollify(const ExperimentConfig& cfg) {
  if (cfg.mollifier.empty()) throw ConfigError("mollifier", "missing");
  nlohmann::json spec = cfg.mollifier;
  spec["family"] = "mollified";
  if (!spec.contains("order")) spec["order"] = cfg.order;
  std::size_t dim = 1;
  if (spec.contains("shapes") && spec["shapes"].is_array() && !spec["shapes"].empty()) {
    const auto& s0 = spec["shapes"][0];
    if (s0.contains("center") && s0["center"].is_array()) dim = s0["center"].size();
    else if (s0.contains("lo") && s0["lo"].is_array()) dim = s0["lo"].size();
  }
  const TestFunction f = test_function_from_json(spec, dim);
  std::vector<double> pts;
  if (!cfg.inputs.empty()) {
    const DiscreteMeasure m = read_measure_csv(cfg.inputs.front());
    if (m.dim() != dim) throw ConfigError("inputs", "points have the wrong dimension");
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < m.size(); ++i) {
      m.point(i, x);
      pts.insert(pts.end(), x.begin(), x.end());
    }
  } else {
    if (dim != 1) throw ConfigError("inputs", "points file needed outside 1D");
    pts = cfg.x_grid.points();
  }
  const std::size_t n = pts.size() / dim;
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = f(std::span<const double>(pts.data() + i * dim, dim));
  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out);
    if (!out) throw Error("cannot write '" + cfg.out + "'");
    for (std::size_t d = 0; d < dim; ++d) out << 'x' << d + 1 << ',';
    out << "f\n";
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) out << format_real(pts[i * dim + d]) << ',';
      out << format_real(vals[i]) << '\n';
    }
  }
  Outcome o;
  std::ostringstream line;
  line << "mollify " << f.label << " points=" << n << " norm_bound(l=" << f.order
       << ")=" << format_real(f.norm_bound());
  o.line = line.str();
  o.record["norm_bounds"] = f.norm_bounds;
  return o;
}

Outcome cmd_couple(const ExperimentConfig& cfg) {
  nlohmann::json seed_a, seed_b;
  const DiscreteMeasure a = load_measure(cfg, 0, &seed_a), b = load_measure(cfg, 1, &seed_b);
  const ProkhorovResult rho = prokhorov_exact_result(a, b);
  const double alpha = cfg.alpha ? *cfg.alpha : rho.upper();
  const CouplingPlan plan = strassen_couple(a, b, alpha);
  const double tail = coupled_tail(plan, alpha);
  if (!cfg.out.empty())
    write_plan_csv(cfg.out, plan,
                   {{"mu", cfg.inputs[0]}, {"nu", cfg.inputs[1]}, {"mu_subsample_seed", seed_a},
                    {"nu_subsample_seed", seed_b}, {"alpha", alpha}, {"tail", tail},
                    {"prokhorov", format_exact(rho.value)}});
  Outcome o;
  std::ostringstream line;
  line << "couple alpha=" << format_real(alpha) << " tail=" << format_real(tail)
       << " prokhorov=" << format_real(to_double(rho.value)) << " mean_distance=" << format_real(coupled_mean_distance(plan))
       << " entries=" << plan.entries.size();
  o.line = line.str();
  o.record["alpha"] = alpha;
  o.record["tail"] = tail;
  o.record["tail_exact"] = format_exact(coupled_tail_exact(plan, alpha));
  o.record["mean_distance"] = coupled_mean_distance(plan);
  return o;
}

Outcome cmd_weak(const ExperimentConfig& cfg) {
  const SdeProblem p = problem_of(cfg);
  need_dt(cfg);
  if (cfg.function.empty()) throw ConfigError("function", "missing");
  const TestFunction f = test_function_from_json(cfg.function, p.dim);
  WeakErrorOptions opts;
  opts.reference_draws = cfg.reference_draws;
  opts.workers = cfg.workers;
  const ErrorSeries s = std::isnan(f.kappa)
                            ? weak_error_series(p, scheme_of(p, cfg), f, cfg.dt, cfg.T, cfg.samples, cfg.seed, opts)
                            : local_lipschitz_weak_error(p, scheme_of(p, cfg), f, cfg.dt, cfg.T, cfg.samples,
                                                         cfg.seed, opts);
  Outcome o;
  summarize_series(cfg, s, o, false);
  return o;
}

Outcome cmd_strong(const ExperimentConfig& cfg) {
  const SdeProblem p = problem_of(cfg);
  need_dt(cfg);
  const ErrorSeries s = strong_error_series(p, cfg.dt, cfg.T, cfg.samples, cfg.seed, cfg.workers);
  Outcome o;
  summarize_series(cfg, s, o, false);
  return o;
}

Outcome cmd_metric_rate(const ExperimentConfig& cfg) {
  const SdeProblem p = problem_of(cfg);
  need_dt(cfg);
  MetricSeriesOptions opts;
  opts.budget = cfg.budget;
  opts.workers = cfg.workers;
  ErrorSeries s;
  if (cfg.metric == "prokhorov") s = prokhorov_error_series(p, scheme_of(p, cfg), cfg.dt, cfg.T, cfg.samples, cfg.seed, opts);
  else if (cfg.metric == "wasserstein")
    s = wasserstein_error_series(p, scheme_of(p, cfg), cfg.dt, cfg.T, cfg.samples, cfg.seed, opts);
  else throw ConfigError("metric", "expected prokhorov or wasserstein");
  Outcome o;
  // Upper-bound rates: only the lower edge of the band is enforced.
  summarize_series(cfg, s, o, true);
  return o;
}

Outcome cmd_moment_defect(const ExperimentConfig& cfg) {
  const SdeProblem p = problem_of(cfg);
  need_dt(cfg);
  const std::vector<double> x = cfg.x.empty() ? p.initial : cfg.x;
  if (x.size() != p.dim) throw ConfigError("x", "wrong dimension");
  if (cfg.s < 1 || cfg.s > 3) throw ConfigError("s", "must be 1, 2 or 3");
  const SchemeIncrement scheme = scheme_of(p, cfg);
  ErrorSeries s;
  s.kind = "moment-defect";
  s.label = p.label + "/" + scheme.label + "/s=" + std::to_string(cfg.s);
  for (double dt : cfg.dt) {
    ErrorEntry e;
    e.dt = dt;
    e.error = moment_defect(p, scheme, x, cfg.s, dt);
    e.std_error = 0.0;
    e.exact = true;
    s.entries.push_back(e);
  }
  Outcome o;
  summarize_series(cfg, s, o, true);
  return o;
}

Outcome cmd_sv_check(const ExperimentConfig& cfg) {
  const SdeProblem p = problem_of(cfg);
  need_dt(cfg);
  if (p.dim != 1) throw ConfigError("x_grid", "sv-check grids are one-dimensional");
  std::vector<std::vector<double>> grid;
  for (double v : cfg.x_grid.points()) grid.push_back({v});
  const std::vector<double> eps = cfg.eps.empty() ? std::vector<double>{0.05} : cfg.eps;
  const SvReport r = sv_check(p, scheme_of(p, cfg), grid, cfg.dt, eps, cfg.samples, cfg.seed);
  if (!cfg.out.empty()) {
    std::ofstream out(cfg.out);
    if (!out) throw Error("cannot write '" + cfg.out + "'");
    out << "condition,dt,value\n";
    for (const auto& c : r.conditions)
      for (std::size_t t = 0; t < r.dts.size(); ++t)
        out << c.name << ',' << format_real(r.dts[t]) << ',' << format_real(c.values[t]) << '\n';
  }
  Outcome o;
  std::ostringstream line;
  line << "sv-check " << p.label << (r.exact ? " exact" : " monte-carlo");
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : r.conditions) {
    line << ' ' << c.name << '=' << (c.converging ? "converging" : "violated") << '('
         << format_real(c.values.back()) << ')';
    conds.push_back({{"name", c.name}, {"values", c.values}, {"violations", c.violations}, {"converging", c.converging}});
  }
  o.line = line.str();
  o.record["conditions"] = conds;
  o.record["dt"] = r.dts;
  return o;
}

Outcome cmd_fit(const ExperimentConfig& cfg, const Command& c, const Flags& f) {
  if (cfg.inputs.empty()) throw ConfigError("inputs", "expected a series CSV");
  const ErrorSeries s = read_series_csv(cfg.inputs.front());
  FitWindow w;
  if (c.given("--dt-min")) w.dt_min = f.dt_min;
  if (c.given("--dt-max")) w.dt_max = f.dt_max;
  ExperimentConfig local = cfg;
  local.out.clear();
  Outcome o;
  summarize_series(local, s, o, false, w);
  return o;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak SDE integrators, Prokhorov and Wasserstein distances, and convergence-rate experiments",
               "sdelab"};
  app.require_subcommand(1);
  Flags f;
  std::map<std::string, Command> cmds;

  auto add = [&](const std::string& name, const std::string& help, const std::vector<std::string>& flags,
                 int inputs = 0) {
    Command c;
    c.app = app.add_subcommand(name, help);
    auto opt = [&](const std::string& flag, auto& target, const std::string& text) {
      c.opts[flag] = c.app->add_option(flag, target, text);
    };
    for (const auto& fl : flags) {
      if (fl == "--config") opt(fl, f.config, "JSON experiment config; flags override its entries");
      else if (fl == "--seed") opt(fl, f.seed, "Random seed (U64)");
      else if (fl == "--out") opt(fl, f.out, "Output file; the summary record goes to OUT.summary.json");
      else if (fl == "--summary") opt(fl, f.summary, "Summary record path (overrides OUT.summary.json)");
      else if (fl == "--dt") opt(fl, f.dt, "Step sizes: comma list or 2^a..2^b");
      else if (fl == "--samples") opt(fl, f.samples, "Sample count M");
      else if (fl == "--budget") opt(fl, f.budget, "Atom budget for flow-based metrics (0 = no subsampling)");
      else if (fl == "--T") opt(fl, f.T, "Terminal time");
      else if (fl == "--scheme") opt(fl, f.scheme, "strong_em | weak_em | weak_em_sign | exact");
      else if (fl == "--problem") opt(fl, f.problem, "Problem as JSON, e.g. {\"problem\":\"ou\",\"theta\":1,...}");
      else if (fl == "--function") opt(fl, f.function, "Test function as JSON, e.g. {\"family\":\"monomial\",\"alpha\":[2]}");
      else if (fl == "--metric") opt(fl, f.metric, "prokhorov | wasserstein");
      else if (fl == "--band") opt(fl, f.band, "Acceptance band lo,hi for the fitted slope");
      else if (fl == "--reference-draws") opt(fl, f.reference_draws, "Exact-law draws when E f(X(T)) has no closed form");
      else if (fl == "--workers") opt(fl, f.workers, "Worker threads (0 = all cores)");
      else if (fl == "--x") opt(fl, f.x, "Point x as a comma list");
      else if (fl == "--s") opt(fl, f.s, "Moment order s (1..3)");
      else if (fl == "--order") opt(fl, f.order, "Smoothness order l");
      else if (fl == "--alpha") opt(fl, f.alpha, "Coupling threshold (default: the Prokhorov distance, rounded up)");
      else if (fl == "--eps") opt(fl, f.eps, "Jump thresholds eps as a comma list");
      else if (fl == "--x-grid") opt(fl, f.x_grid, "Grid lo,hi,count");
      else if (fl == "--dictionary") opt(fl, f.dictionary, "JSON file with a test-function dictionary");
      else if (fl == "--mollifier") opt(fl, f.mollifier, "Mollified indicator as JSON: {\"shapes\":[...],\"epsilon\":e}");
      else if (fl == "--dt-min") opt(fl, f.dt_min, "Fit window lower dt");
      else if (fl == "--dt-max") opt(fl, f.dt_max, "Fit window upper dt");
    }
    if (inputs > 0) c.opts["inputs"] = c.app->add_option("inputs", f.inputs, "Input files")->expected(0, inputs);
    cmds[name] = c;
  };

  const std::vector<std::string> sim = {"--config", "--seed", "--out", "--summary", "--dt", "--T", "--scheme", "--problem"};
  add("simulate", "Simulate one path and write t,x1.. CSV", sim);
  add("cloud", "Sample M terminal states (scheme 'analytic' draws the exact law)",
      {"--config", "--seed", "--out", "--summary", "--dt", "--T", "--scheme", "--problem", "--samples", "--workers"});
  const std::vector<std::string> pair = {"--config", "--seed", "--out", "--summary", "--budget"};
  add("prokhorov", "Exact Prokhorov distance between two measure CSVs", pair, 2);
  add("wasserstein", "Wasserstein-1 distance between two measure CSVs", pair, 2);
  add("beta", "Certified lower bound of beta_l between two measure CSVs",
      {"--config", "--seed", "--out", "--summary", "--budget", "--order", "--dictionary"}, 2);
  add("mollify", "Evaluate a mollified indicator on a 1D grid or a points CSV",
      {"--config", "--out", "--summary", "--order", "--mollifier", "--x-grid"}, 1);
  add("couple", "Strassen coupling at threshold alpha; writes i,j,weight CSV",
      {"--config", "--seed", "--out", "--summary", "--budget", "--alpha"}, 2);
  add("weak-error", "Weak-error series and rate fit",
      {"--config", "--seed", "--out", "--summary", "--dt", "--samples", "--T", "--scheme", "--problem", "--function",
       "--band", "--reference-draws", "--workers"});
  add("strong-error", "Strong (RMS) error series against the same-noise exact solution",
      {"--config", "--seed", "--out", "--summary", "--dt", "--samples", "--T", "--problem", "--band", "--workers"});
  add("metric-rate", "Prokhorov or Wasserstein error series with measured noise floor",
      {"--config", "--seed", "--out", "--summary", "--dt", "--samples", "--budget", "--T", "--scheme", "--problem",
       "--metric", "--band", "--workers"});
  add("moment-defect", "Moment defects over a dt grid and their slope",
      {"--config", "--out", "--summary", "--dt", "--problem", "--scheme", "--x", "--s", "--band"});
  add("sv-check", "Stroock-Varadhan coefficient diagnostics",
      {"--config", "--seed", "--out", "--summary", "--dt", "--samples", "--problem", "--scheme", "--x-grid", "--eps"});
  add("fit", "Fit a log-log rate to a series CSV", {"--summary", "--band", "--dt-min", "--dt-max"}, 1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    for (auto& [name, c] : cmds) {
      if (!c.app->parsed()) continue;
      const ExperimentConfig cfg = resolve(name, c, f);
      Outcome o;
      if (name == "simulate") o = cmd_simulate(cfg);
      else if (name == "cloud") o = cmd_cloud(cfg);
      else if (name == "prokhorov") o = cmd_distance(cfg, true);
      else if (name == "wasserstein") o = cmd_distance(cfg, false);
      else if (name == "beta") o = cmd_beta(cfg);
      else if (name == "mollify") o = cmd_mollify(cfg);
      else if (name == "couple") o = cmd_couple(cfg);
      else if (name == "weak-error") o = cmd_weak(cfg);
      else if (name == "strong-error") o = cmd_strong(cfg);
      else if (name == "metric-rate") o = cmd_metric_rate(cfg);
      else if (name == "moment-defect") o = cmd_moment_defect(cfg);
      else if (name == "sv-check") o = cmd_sv_check(cfg);
      else if (name == "fit") o = cmd_fit(cfg, c, f);
      out << o.line << '\n';
      write_summary(cfg, f, c, o);
      return o.status;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace sdelab
