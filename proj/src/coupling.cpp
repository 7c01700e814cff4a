#include "sdelab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sdelab/metrics.hpp"
#include "sdelab/transport.hpp"

namespace sdelab {

namespace {

CouplingPlan make_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::vector<FlowEntry> entries,
                       std::int64_t denominator) {
  std::sort(entries.begin(), entries.end(),
            [](const FlowEntry& a, const FlowEntry& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  CouplingPlan plan;
  for (const FlowEntry& e : entries) {
    if (e.mass == 0) continue;
    if (!plan.entries.empty() && plan.entries.back().i == e.i && plan.entries.back().j == e.j)
      plan.entries.back().mass += e.mass;
    else
      plan.entries.push_back(e);
  }
  plan.mu = std::make_shared<const DiscreteMeasure>(mu);
  plan.nu = std::make_shared<const DiscreteMeasure>(nu);
  plan.denominator = denominator;
  std::vector<double> a(mu.dim()), b(nu.dim());
  for (const FlowEntry& e : plan.entries) {
    mu.point(e.i, a);
    nu.point(e.j, b);
    plan.distance.push_back(point_distance(a.data(), b.data(), mu.dim()));
  }
  return plan;
}

}  // namespace

CouplingInfeasible::CouplingInfeasible(double alpha, Exact min_tail)
    : Error("no coupling with tail mass <= " + format_real(alpha) + " at threshold " + format_real(alpha) +
            "; minimum achievable tail is " + format_exact(min_tail) + " (" + format_real(to_double(min_tail)) + ")"),
      min_tail_(std::move(min_tail)) {}

CouplingPlan strassen_couple(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double alpha) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("measures have different dimensions");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  const DistanceTable table = distance_table(mu, nu);
  const IntegerMasses masses = integer_masses(mu, nu);
  IntegerFlow flow = threshold_flow(mu, nu, table, masses, alpha);
  const Exact tail = Exact(masses.total - flow.value) / Exact(masses.total);
  if (tail > to_exact(alpha)) throw CouplingInfeasible(alpha, tail);

  std::vector<std::int64_t> row = masses.row, col = masses.col;
  for (const FlowEntry& e : flow.entries) {
    row[e.i] -= e.mass;
    col[e.j] -= e.mass;
  }
  std::size_t i = 0, j = 0;
  while (true) {
    while (i < row.size() && row[i] == 0) ++i;
    while (j < col.size() && col[j] == 0) ++j;
    if (i == row.size() || j == col.size()) break;
    const std::int64_t f = std::min(row[i], col[j]);
    flow.entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), f});
    row[i] -= f;
    col[j] -= f;
  }
  return make_plan(mu, nu, std::move(flow.entries), masses.total);
}

CouplingPlan min_cost_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const DistanceTable table = distance_table(mu, nu);
  const IntegerMasses masses = integer_masses(mu, nu);
  return make_plan(mu, nu, min_cost_transport(table, masses).entries, masses.total);
}

bool marginals_exact(const CouplingPlan& plan) {
  const std::size_t m = plan.mu->size(), n = plan.nu->size();
  std::vector<std::int64_t> row(m, 0), col(n, 0);
  for (const FlowEntry& e : plan.entries) {
    if (e.mass < 0) return false;
    row[e.i] += e.mass;
    col[e.j] += e.mass;
  }
  const Exact L(plan.denominator);
  for (std::size_t i = 0; i < m; ++i)
    if (Exact(row[i]) / L != plan.mu->weight(i)) return false;
  for (std::size_t j = 0; j < n; ++j)
    if (Exact(col[j]) / L != plan.nu->weight(j)) return false;
  return true;
}

double coupled_mean_distance(const CouplingPlan& plan) {
  double acc = 0.0;
  for (std::size_t k = 0; k < plan.entries.size(); ++k)
    acc += static_cast<double>(plan.entries[k].mass) * plan.distance[k];
  return acc / static_cast<double>(plan.denominator);
}

Exact coupled_tail_exact(const CouplingPlan& plan, double threshold) {
  std::int64_t mass = 0;
  for (std::size_t k = 0; k < plan.entries.size(); ++k)
    if (plan.distance[k] > threshold) mass += plan.entries[k].mass;
  return Exact(mass) / Exact(plan.denominator);
}

double coupled_tail(const CouplingPlan& plan, double threshold) {
  return to_double(coupled_tail_exact(plan, threshold));
}

double holder_chain_bound(const CouplingPlan& plan, double alpha, double q1, double q2) {
  if (!(q1 > 1.0) || !(q2 > 1.0) || std::fabs(1.0 / q1 + 1.0 / q2 - 1.0) > 1e-12)
    throw std::invalid_argument("Hoelder exponents must satisfy 1/q1 + 1/q2 = 1 with q1 > 1");
  if (coupled_tail_exact(plan, alpha) > to_exact(alpha))
    throw std::invalid_argument("plan tail at alpha exceeds alpha");
  double moment = 0.0;
  for (std::size_t k = 0; k < plan.entries.size(); ++k)
    moment += static_cast<double>(plan.entries[k].mass) * std::pow(plan.distance[k], q1);
  moment /= static_cast<double>(plan.denominator);
  return std::pow(moment, 1.0 / q1) * std::pow(alpha, 1.0 / q2) + alpha;
}

void write_plan_csv(const std::string& path, const CouplingPlan& plan, const nlohmann::json& sidecar) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "i,j,weight\n";
  for (std::size_t k = 0; k < plan.entries.size(); ++k)
    out << plan.entries[k].i << ',' << plan.entries[k].j << ','
        << format_real(static_cast<double>(plan.entries[k].mass) / static_cast<double>(plan.denominator)) << '\n';
  if (!out) throw Error("write failed for " + path);
  nlohmann::json meta = sidecar;
  meta["denominator"] = plan.denominator;
  meta["entries"] = plan.entries.size();
  meta["rows"] = plan.mu->size();
  meta["cols"] = plan.nu->size();
  std::ofstream side(path + ".json");
  side << meta.dump(2) << '\n';
  if (!side) throw Error("write failed for " + path + ".json");
}

}  // namespace sdelab
