#include "sdelab/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

#include "sdelab/kernels.hpp"
#include "sdelab/transport.hpp"

namespace sdelab {

namespace {

void check_dims(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("measures have different dimensions");
  if (mu.size() == 0 || nu.size() == 0) throw std::invalid_argument("empty measure");
}

// 1 - M / L <= t, exactly.
bool feasible(std::int64_t moved, std::int64_t total, double t) {
  return Exact(total - moved) <= to_exact(t) * Exact(total);
}

}  // namespace

IntegerFlow threshold_flow(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DistanceTable& table,
                           const IntegerMasses& masses, double t) {
  if (mu.dim() == 1) return greedy_threshold_flow_1d(mu, nu, masses, t);
  return dinic_threshold_flow(table, masses, t);
}

ProkhorovResult prokhorov_exact_result(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_dims(mu, nu);
  const DistanceTable table = distance_table(mu, nu);
  const IntegerMasses masses = integer_masses(mu, nu);
  std::vector<double> cand(table.d);
  cand.push_back(0.0);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  // 1 - M(t) - t is nonincreasing; find the first feasible candidate.
  std::size_t lo = 0, hi = cand.size() - 1;
  if (feasible(threshold_flow(mu, nu, table, masses, cand[0]).value, masses.total, cand[0])) {
    hi = 0;
  } else {
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (feasible(threshold_flow(mu, nu, table, masses, cand[mid]).value, masses.total, cand[mid])) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  ProkhorovResult out;
  out.threshold = cand[hi];
  Exact best = std::min(Exact(1), to_exact(cand[hi]));
  if (hi > 0) {
    const std::int64_t before = threshold_flow(mu, nu, table, masses, cand[hi - 1]).value;
    best = std::min(best, Exact(masses.total - before) / Exact(masses.total));
  }
  out.value = best;
  return out;
}

double prokhorov_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return to_double(prokhorov_exact_result(mu, nu).value);
}

Exact prokhorov_bruteforce_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_dims(mu, nu);
  const std::size_t dim = mu.dim();
  // Union support with per-point masses of both measures.
  std::map<std::vector<double>, std::size_t> index;
  std::vector<std::vector<double>> pts;
  const IntegerMasses masses = integer_masses(mu, nu);
  std::vector<std::int64_t> wmu, wnu;
  auto add = [&](const DiscreteMeasure& m, std::size_t a, std::int64_t w, bool first) {
    std::vector<double> p(dim);
    m.point(a, p);
    auto [it, inserted] = index.emplace(p, pts.size());
    if (inserted) {
      pts.push_back(p);
      wmu.push_back(0);
      wnu.push_back(0);
    }
    (first ? wmu : wnu)[it->second] += w;
  };
  for (std::size_t a = 0; a < mu.size(); ++a) add(mu, a, masses.row[a], true);
  for (std::size_t b = 0; b < nu.size(); ++b) add(nu, b, masses.col[b], false);
  const std::size_t N = pts.size();
  if (N > 20) throw std::invalid_argument("brute-force Prokhorov needs total support <= 20");
  std::vector<double> D(N * N);
  for (std::size_t u = 0; u < N; ++u)
    for (std::size_t v = 0; v < N; ++v) D[u * N + v] = point_distance(pts[u].data(), pts[v].data(), dim);

  const Exact L(masses.total);
  Exact worst = 0;
  std::vector<std::pair<double, std::int64_t>> reach;
  for (int dir = 0; dir < 2; ++dir) {
    const auto& P = dir == 0 ? wmu : wnu;
    const auto& Q = dir == 0 ? wnu : wmu;
    for (std::uint32_t A = 1; A < (1u << N); ++A) {
      std::int64_t PA = 0;
      for (std::size_t u = 0; u < N; ++u)
        if (A >> u & 1u) PA += P[u];
      if (PA == 0) continue;
      reach.clear();
      for (std::size_t v = 0; v < N; ++v) {
        if (Q[v] == 0) continue;
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u < N; ++u)
          if (A >> u & 1u) d = std::min(d, D[u * N + v]);
        reach.emplace_back(d, Q[v]);
      }
      std::sort(reach.begin(), reach.end());
      // inf over e of max(e, P(A) - Q(A^e)), attained at 0 or a reach distance.
      std::int64_t covered = 0;
      std::size_t k = 0;
      while (k < reach.size() && reach[k].first <= 0.0) covered += reach[k++].second;
      Exact best = Exact(std::max<std::int64_t>(PA - covered, 0)) / L;
      while (k < reach.size()) {
        const double e = reach[k].first;
        while (k < reach.size() && reach[k].first == e) covered += reach[k++].second;
        const Exact value = std::max(to_exact(e), Exact(std::max<std::int64_t>(PA - covered, 0)) / L);
        best = std::min(best, value);
      }
      worst = std::max(worst, best);
    }
  }
  return std::min(worst, Exact(1));
}

double prokhorov_bruteforce(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return to_double(prokhorov_bruteforce_value(mu, nu));
}

double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_dims(mu, nu);
  if (mu.dim() == 1 && mu.is_uniform() && nu.is_uniform() && mu.size() == nu.size()) {
    std::vector<double> a(mu.soa(), mu.soa() + mu.size()), b(nu.soa(), nu.soa() + nu.size());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return kernels::active().abs_diff_sum(a.data(), b.data(), a.size()) / static_cast<double>(a.size());
  }
  const DistanceTable table = distance_table(mu, nu);
  const IntegerMasses masses = integer_masses(mu, nu);
  return plan_cost(table, min_cost_transport(table, masses), masses.total);
}

}  // namespace sdelab
