#include "sdelab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "sdelab/kernels.hpp"

namespace sdelab {

DistanceTable distance_table(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("measures have different dimensions");
  const std::size_t m = mu.size(), n = nu.size();
  if (static_cast<double>(m) * static_cast<double>(n) > 6.4e7)
    throw std::invalid_argument("distance table exceeds the flow budget; subsample the measures");
  DistanceTable t;
  t.rows = m;
  t.cols = n;
  t.d.resize(m * n);
  const auto& k = kernels::active();
  std::vector<double> p(mu.dim());
  for (std::size_t i = 0; i < m; ++i) {
    mu.point(i, p);
    k.distances(p.data(), nu.soa(), n, n, nu.dim(), t.d.data() + i * n);
  }
  return t;
}

double point_distance(const double* a, const double* b, std::size_t dim) {
  if (dim == 1) return std::fabs(a[0] - b[0]);
  double acc = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    acc = acc + diff * diff;
  }
  return std::sqrt(acc);
}

IntegerMasses integer_masses(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  IntegerMasses out;
  if (mu.is_uniform() && nu.is_uniform()) {
    const std::int64_t m = static_cast<std::int64_t>(mu.size()), n = static_cast<std::int64_t>(nu.size());
    const std::int64_t L = std::lcm(m, n);
    out.row.assign(mu.size(), L / m);
    out.col.assign(nu.size(), L / n);
    out.total = L;
    return out;
  }
  const std::vector<Exact> a = mu.weights(), b = nu.weights();
  BigInt L = common_denominator(a);
  const BigInt Lb = common_denominator(b);
  L = L / boost::multiprecision::gcd(L, Lb) * Lb;
  const Exact scale(L);
  for (const Exact& w : a) out.row.push_back(to_int64(w * scale));
  for (const Exact& w : b) out.col.push_back(to_int64(w * scale));
  out.total = to_int64(scale);
  return out;
}

Dinic::Dinic(std::size_t nodes) : adj_(nodes), level_(nodes), it_(nodes) {}

std::size_t Dinic::add_edge(std::size_t from, std::size_t to, std::int64_t capacity) {
  const std::size_t id = edges_.size();
  edges_.push_back({to, capacity});
  edges_.push_back({from, 0});
  original_.push_back(capacity);
  original_.push_back(0);
  adj_[from].push_back(id);
  adj_[to].push_back(id + 1);
  return id;
}

bool Dinic::bfs(std::size_t s, std::size_t t) {
  std::fill(level_.begin(), level_.end(), -1);
  std::queue<std::size_t> q;
  level_[s] = 0;
  q.push(s);
  while (!q.empty()) {
    const std::size_t v = q.front();
    q.pop();
    for (std::size_t id : adj_[v]) {
      const Edge& e = edges_[id];
      if (e.cap > 0 && level_[e.to] < 0) {
        level_[e.to] = level_[v] + 1;
        q.push(e.to);
      }
    }
  }
  return level_[t] >= 0;
}

std::int64_t Dinic::dfs(std::size_t v, std::size_t t, std::int64_t pushed) {
  if (v == t) return pushed;
  for (std::size_t& k = it_[v]; k < adj_[v].size(); ++k) {
    const std::size_t id = adj_[v][k];
    Edge& e = edges_[id];
    if (e.cap <= 0 || level_[e.to] != level_[v] + 1) continue;
    const std::int64_t got = dfs(e.to, t, std::min(pushed, e.cap));
    if (got > 0) {
      e.cap -= got;
      edges_[id ^ 1].cap += got;
      return got;
    }
  }
  return 0;
}

std::int64_t Dinic::max_flow(std::size_t s, std::size_t t) {
  std::int64_t total = 0;
  while (bfs(s, t)) {
    std::fill(it_.begin(), it_.end(), 0);
    while (const std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) total += f;
  }
  return total;
}

std::int64_t Dinic::flow(std::size_t edge) const { return original_[edge] - edges_[edge].cap; }

IntegerFlow dinic_threshold_flow(const DistanceTable& table, const IntegerMasses& masses, double t) {
  const std::size_t m = table.rows, n = table.cols;
  const std::size_t source = m + n, sink = m + n + 1;
  Dinic g(m + n + 2);
  for (std::size_t i = 0; i < m; ++i) g.add_edge(source, i, masses.row[i]);
  for (std::size_t j = 0; j < n; ++j) g.add_edge(m + j, sink, masses.col[j]);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (table(i, j) <= t) {
        ids.push_back(g.add_edge(i, m + j, std::min(masses.row[i], masses.col[j])));
        pairs.emplace_back(i, j);
      }
  IntegerFlow out;
  out.value = g.max_flow(source, sink);
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (const std::int64_t f = g.flow(ids[k]); f > 0)
      out.entries.push_back({static_cast<std::uint32_t>(pairs[k].first), static_cast<std::uint32_t>(pairs[k].second), f});
  return out;
}

IntegerFlow greedy_threshold_flow_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const IntegerMasses& masses, double t) {
  if (mu.dim() != 1 || nu.dim() != 1) throw std::invalid_argument("greedy flow is one-dimensional");
  const std::size_t m = mu.size(), n = nu.size();
  const double* x = mu.soa();
  const double* y = nu.soa();
  std::vector<std::size_t> ox(m), oy(n);
  std::iota(ox.begin(), ox.end(), std::size_t{0});
  std::iota(oy.begin(), oy.end(), std::size_t{0});
  std::stable_sort(ox.begin(), ox.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::stable_sort(oy.begin(), oy.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
  std::vector<std::int64_t> left(n);
  for (std::size_t j = 0; j < n; ++j) left[j] = masses.col[oy[j]];
  IntegerFlow out;
  std::size_t p = 0;
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t i = ox[a];
    // Atoms left of the window stay left of every later window.
    while (p < n && (left[p] == 0 || (x[i] - y[oy[p]] > t))) ++p;
    std::int64_t need = masses.row[i];
    for (std::size_t q = p; q < n && need > 0; ++q) {
      const std::size_t j = oy[q];
      if (std::fabs(x[i] - y[j]) > t) {
        if (y[j] > x[i]) break;
        continue;
      }
      const std::int64_t f = std::min(need, left[q]);
      if (f == 0) continue;
      need -= f;
      left[q] -= f;
      out.value += f;
      out.entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), f});
    }
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const FlowEntry& a, const FlowEntry& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
  return out;
}

}  // namespace sdelab
