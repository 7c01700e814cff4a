#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sdelab {

/// E prod_j (m + Z)_{idx_j} for Z ~ N(0, cov), by Isserlis' theorem.
double gaussian_product_moment(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                               std::span<const std::size_t> indices);

/// Expands a multi-index (exponent per coordinate) to a coordinate tuple:
/// {2, 1} -> {0, 0, 1}.
std::vector<std::size_t> multi_index_to_tuple(std::span<const int> multi_index);

/// All tuples (i_1..i_s) in [0, dim)^s, lexicographic.
std::vector<std::vector<std::size_t>> index_tuples(std::size_t dim, std::size_t order);

/// A factor F with F F^T = cov for a symmetric positive semidefinite matrix.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov);

}  // namespace sdelab
