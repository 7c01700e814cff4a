#include "sdelab/transport.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "sdelab/kernels.hpp"

namespace sdelab {

IntegerFlow min_cost_transport(const DistanceTable& table, const IntegerMasses& masses) {
  const std::size_t m = table.rows, n = table.cols;
  const auto& k = kernels::active();
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<std::int64_t> flow(m * n, 0);
  std::vector<std::int64_t> supply = masses.row, demand = masses.col;
  std::vector<double> pot_row(m, 0.0), pot_col(n, 0.0);
  double pot_sink = 0.0;
  std::vector<double> dist_row(m), dist_col(n);
  std::vector<std::int32_t> parent_row(m), parent_col(n);
  std::vector<std::uint8_t> done_row(m), done_col(n);

  std::int64_t shipped = 0;
  while (shipped < masses.total) {
    std::fill(done_row.begin(), done_row.end(), 0);
    std::fill(done_col.begin(), done_col.end(), 0);
    std::fill(dist_col.begin(), dist_col.end(), inf);
    std::fill(parent_col.begin(), parent_col.end(), -1);
    for (std::size_t i = 0; i < m; ++i) {
      dist_row[i] = supply[i] > 0 ? 0.0 : inf;
      parent_row[i] = -1;
    }
    double dist_sink = inf;
    std::int32_t sink_parent = -1;

    while (true) {
      const std::size_t r = k.argmin(dist_row.data(), done_row.data(), m);
      const std::size_t c = k.argmin(dist_col.data(), done_col.data(), n);
      const double dr = r < m ? dist_row[r] : inf;
      const double dc = c < n ? dist_col[c] : inf;
      if (std::min(dr, dc) >= dist_sink || (dr == inf && dc == inf)) break;
      if (dr <= dc) {
        done_row[r] = 1;
        k.relax(dr + pot_row[r], table.d.data() + r * n, pot_col.data(), done_col.data(), n, dist_col.data(),
                parent_col.data(), static_cast<std::int32_t>(r));
      } else {
        done_col[c] = 1;
        if (demand[c] > 0) {
          const double cand = (dc + pot_col[c]) - pot_sink;
          if (cand < dist_sink) {
            dist_sink = cand;
            sink_parent = static_cast<std::int32_t>(c);
          }
        }
        for (std::size_t i = 0; i < m; ++i) {
          if (done_row[i] || flow[i * n + c] == 0) continue;
          const double cand = ((dc + pot_col[c]) - table(i, c)) - pot_row[i];
          if (cand < dist_row[i]) {
            dist_row[i] = cand;
            parent_row[i] = static_cast<std::int32_t>(c);
          }
        }
      }
    }
    if (sink_parent < 0) throw std::logic_error("transport: no augmenting path");

    // Bottleneck along t <- col <- row (<- col <- row ...) <- source.
    std::int64_t push = demand[static_cast<std::size_t>(sink_parent)];
    std::size_t col = static_cast<std::size_t>(sink_parent);
    while (true) {
      const std::size_t row = static_cast<std::size_t>(parent_col[col]);
      if (parent_row[row] < 0) {
        push = std::min(push, supply[row]);
        break;
      }
      col = static_cast<std::size_t>(parent_row[row]);
      push = std::min(push, flow[row * n + col]);
    }
    col = static_cast<std::size_t>(sink_parent);
    demand[col] -= push;
    while (true) {
      const std::size_t row = static_cast<std::size_t>(parent_col[col]);
      flow[row * n + col] += push;
      if (parent_row[row] < 0) {
        supply[row] -= push;
        break;
      }
      col = static_cast<std::size_t>(parent_row[row]);
      flow[row * n + col] -= push;
    }
    shipped += push;

    for (std::size_t i = 0; i < m; ++i) pot_row[i] += std::min(dist_row[i], dist_sink);
    for (std::size_t j = 0; j < n; ++j) pot_col[j] += std::min(dist_col[j], dist_sink);
    pot_sink += dist_sink;
  }

  IntegerFlow out;
  out.value = shipped;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (flow[i * n + j] > 0)
        out.entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), flow[i * n + j]});
  return out;
}

double plan_cost(const DistanceTable& table, const IntegerFlow& plan, std::int64_t total) {
  double acc = 0.0;
  for (const FlowEntry& e : plan.entries) acc += static_cast<double>(e.mass) * table(e.i, e.j);
  return acc / static_cast<double>(total);
}

}  // namespace sdelab
