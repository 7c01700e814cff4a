#include "sdelab/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sdelab/error.hpp"

namespace sdelab {

std::vector<double> XGrid::points() const {
  if (count == 0) throw ConfigError("x_grid", "count must be positive");
  if (!(lo <= hi)) throw ConfigError("x_grid", "lo must not exceed hi");
  if (count == 1) return {lo};
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(i + 1 == count ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  return out;
}

namespace {

double to_real(const std::string& s, const std::string& whole) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw std::invalid_argument("bad number '" + s + "' in '" + whole + "'");
  return v;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  static const std::regex range(R"(\s*2\^(-?\d+)\s*\.\.\s*2\^(-?\d+)\s*)");
  std::smatch m;
  if (std::regex_match(text, m, range)) {
    const int a = std::stoi(m[1]), b = std::stoi(m[2]);
    std::vector<double> out;
    const int step = a <= b ? 1 : -1;
    for (int k = a;; k += step) {
      out.push_back(std::ldexp(1.0, k));
      if (k == b) break;
    }
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
    out.push_back(to_real(item, text));
  }
  if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
  return out;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = {
      {"command", command},
      {"problem", problem},
      {"scheme", scheme},
      {"function", function},
      {"dictionary", dictionary},
      {"mollifier", mollifier},
      {"metric", metric},
      {"dt", dt},
      {"T", T},
      {"samples", samples},
      {"seed", seed},
      {"budget", budget},
      {"reference_draws", reference_draws},
      {"x", x},
      {"x_grid", {{"lo", x_grid.lo}, {"hi", x_grid.hi}, {"count", x_grid.count}}},
      {"eps", eps},
      {"s", s},
      {"order", order},
      {"inputs", inputs},
      {"out", out},
      {"workers", workers},
  };
  if (alpha) j["alpha"] = *alpha;
  if (band) j["band"] = *band;
  return j;
}

namespace {

template <typename T>
T get(const nlohmann::json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(key, std::string("wrong type: ") + e.what());
  }
}

std::vector<double> real_list(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (v.is_string()) {
    try {
      return parse_real_list(v.get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(key, e.what());
    }
  }
  if (!v.is_array()) throw ConfigError(key, "expected a list of numbers or a '2^a..2^b' range");
  for (const auto& x : v)
    if (!x.is_number()) throw ConfigError(key, "expected numbers");
  return v.get<std::vector<double>>();
}

std::uint64_t unsigned_value(const nlohmann::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  // 1e6 style counts.
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw ConfigError(key, "expected a nonnegative integer");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  static const std::set<std::string> known = {
      "command", "problem", "scheme", "function", "dictionary", "mollifier", "metric", "dt", "T", "samples",
      "seed", "budget", "reference_draws", "x", "x_grid", "eps", "s", "order", "alpha", "band", "inputs", "out",
      "workers"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError(key, "unknown key");
  ExperimentConfig c;
  if (j.contains("command")) c.command = get<std::string>(j, "command");
  if (j.contains("problem")) {
    c.problem = j.at("problem");
    if (!c.problem.is_object()) throw ConfigError("problem", "expected an object");
  }
  if (j.contains("scheme")) c.scheme = get<std::string>(j, "scheme");
  if (j.contains("function")) {
    c.function = j.at("function");
    if (!c.function.is_object()) throw ConfigError("function", "expected an object");
  }
  if (j.contains("dictionary")) {
    c.dictionary = j.at("dictionary");
    if (!c.dictionary.is_array()) throw ConfigError("dictionary", "expected an array");
  }
  if (j.contains("mollifier")) {
    c.mollifier = j.at("mollifier");
    if (!c.mollifier.is_object()) throw ConfigError("mollifier", "expected an object");
  }
  if (j.contains("metric")) c.metric = get<std::string>(j, "metric");
  if (j.contains("dt")) c.dt = real_list(j, "dt");
  if (j.contains("T")) c.T = get<double>(j, "T");
  if (j.contains("samples")) c.samples = unsigned_value(j, "samples");
  if (j.contains("seed")) c.seed = unsigned_value(j, "seed");
  if (j.contains("budget")) c.budget = unsigned_value(j, "budget");
  if (j.contains("reference_draws")) c.reference_draws = unsigned_value(j, "reference_draws");
  if (j.contains("x")) c.x = real_list(j, "x");
  if (j.contains("x_grid")) {
    const auto& g = j.at("x_grid");
    if (!g.is_object()) throw ConfigError("x_grid", "expected {lo, hi, count}");
    for (const auto& [key, value] : g.items())
      if (key != "lo" && key != "hi" && key != "count") throw ConfigError("x_grid." + key, "unknown key");
    if (g.contains("lo")) c.x_grid.lo = get<double>(g, "lo");
    if (g.contains("hi")) c.x_grid.hi = get<double>(g, "hi");
    if (g.contains("count")) c.x_grid.count = unsigned_value(g, "count");
  }
  if (j.contains("eps")) c.eps = real_list(j, "eps");
  if (j.contains("s")) c.s = get<int>(j, "s");
  if (j.contains("order")) c.order = get<int>(j, "order");
  if (j.contains("alpha")) c.alpha = get<double>(j, "alpha");
  if (j.contains("band")) {
    c.band = real_list(j, "band");
    if (c.band->size() != 2 || !((*c.band)[0] <= (*c.band)[1])) throw ConfigError("band", "expected [lo, hi]");
  }
  if (j.contains("inputs")) c.inputs = get<std::vector<std::string>>(j, "inputs");
  if (j.contains("out")) c.out = get<std::string>(j, "out");
  if (j.contains("workers")) c.workers = static_cast<unsigned>(unsigned_value(j, "workers"));
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("--config", "'" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << to_json().dump(2) << '\n';
}

}  // namespace sdelab
