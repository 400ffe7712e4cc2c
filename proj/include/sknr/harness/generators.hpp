#ifndef SKNR_HARNESS_GENERATORS_HPP
#define SKNR_HARNESS_GENERATORS_HPP

#include <cstdint>
#include <utility>

#include "sknr/types.hpp"

namespace sknr::harness {

/// Points are rows (count x d) with a weight per row.
struct PointCloud {
    Matrix points;
    DiscreteMeasure weights;

    Index count() const { return points.rows(); }
    Index dim() const { return points.cols(); }
};

/// i.i.d. Gaussian samples in R^2 via the Cholesky factor of `covariance`,
/// uniform weights. Throws if the covariance is not symmetric positive
/// definite.
PointCloud gaussian_cloud(Index count, const Eigen::Vector2d& mean,
                          const Eigen::Matrix2d& covariance, std::uint64_t seed);

/// Two unit half-circles (centers (0,0) and (1, 0.5)) with Gaussian noise.
std::pair<PointCloud, PointCloud> two_moons(Index count_per_moon, double noise,
                                            std::uint64_t seed);

/// Uniform samples on the annulus r_in <= |p| <= r_out (rejection sampling)
/// and on the centered square of the given side.
std::pair<PointCloud, PointCloud> annulus_and_square(Index count_annulus,
                                                     Index count_square, double r_in,
                                                     double r_out, double side,
                                                     std::uint64_t seed);

/// C_ij = ||x_i - y_j||_2^2.
CostMatrix sq_euclidean_cost(const PointCloud& source, const PointCloud& target);

} // namespace sknr::harness

#endif // SKNR_HARNESS_GENERATORS_HPP
