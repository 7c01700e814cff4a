#include "sdelab/moments.hpp"

#include <cmath>
#include <stdexcept>

namespace sdelab {

namespace {

// E prod Z over the positions listed in `pos` (zero-mean Gaussian).
double isserlis(const Eigen::MatrixXd& cov, std::span<const std::size_t> indices,
                std::vector<std::size_t>& pos) {
  if (pos.empty()) return 1.0;
  if (pos.size() % 2 == 1) return 0.0;
  const std::size_t first = pos.front();
  double total = 0.0;
  for (std::size_t k = 1; k < pos.size(); ++k) {
    const double c = cov(indices[first], indices[pos[k]]);
    if (c == 0.0) continue;
    std::vector<std::size_t> rest;
    rest.reserve(pos.size() - 2);
    for (std::size_t r = 1; r < pos.size(); ++r)
      if (r != k) rest.push_back(pos[r]);
    total += c * isserlis(cov, indices, rest);
  }
  return total;
}

}  // namespace

double gaussian_product_moment(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                               std::span<const std::size_t> indices) {
  const std::size_t s = indices.size();
  if (s > 20) throw std::invalid_argument("product moment order too large");
  double total = 0.0;
  // Each subset of positions takes the fluctuating factor; the rest take the mean.
  for (std::uint32_t mask = 0; mask < (1u << s); ++mask) {
    double mean_part = 1.0;
    std::vector<std::size_t> pos;
    for (std::size_t j = 0; j < s; ++j) {
      if (mask & (1u << j))
        pos.push_back(j);
      else
        mean_part *= mean(static_cast<Eigen::Index>(indices[j]));
    }
    if (mean_part == 0.0) continue;
    total += mean_part * isserlis(cov, indices, pos);
  }
  return total;
}

std::vector<std::size_t> multi_index_to_tuple(std::span<const int> multi_index) {
  std::vector<std::size_t> tuple;
  for (std::size_t i = 0; i < multi_index.size(); ++i) {
    if (multi_index[i] < 0) throw std::invalid_argument("negative multi-index entry");
    tuple.insert(tuple.end(), static_cast<std::size_t>(multi_index[i]), i);
  }
  return tuple;
}

std::vector<std::vector<std::size_t>> index_tuples(std::size_t dim, std::size_t order) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(order, 0);
  while (true) {
    out.push_back(cur);
    std::size_t k = order;
    while (k > 0 && ++cur[k - 1] == dim) cur[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
  const Eigen::Index n = cov.rows();
  if (n == 1) return Eigen::MatrixXd::Constant(1, 1, std::sqrt(std::max(cov(0, 0), 0.0)));
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace sdelab
