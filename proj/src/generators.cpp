#include "sknr/harness/generators.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "sknr/harness/rng.hpp"

namespace sknr::harness {

namespace {

DiscreteMeasure uniform_weights(Index count) {
    return DiscreteMeasure(Vector::Constant(count, 1.0 / static_cast<double>(count)));
}

} // namespace

PointCloud gaussian_cloud(Index count, const Eigen::Vector2d& mean,
                          const Eigen::Matrix2d& covariance, std::uint64_t seed) {
    if (count < 1)
        throw std::invalid_argument("gaussian_cloud: count must be positive");
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("gaussian_cloud: covariance must be symmetric");
    Eigen::LLT<Eigen::Matrix2d> llt(covariance);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("gaussian_cloud: covariance must be positive definite");
    const Eigen::Matrix2d chol = llt.matrixL();

    SplitMix64 rng(seed);
    Matrix points(count, 2);
    for (Index i = 0; i < count; ++i) {
        const Eigen::Vector2d z(rng.normal(), rng.normal());
        points.row(i) = (mean + chol * z).transpose();
    }
    return PointCloud{std::move(points), uniform_weights(count)};
}

std::pair<PointCloud, PointCloud> two_moons(Index count_per_moon, double noise,
                                            std::uint64_t seed) {
    if (count_per_moon < 1)
        throw std::invalid_argument("two_moons: count must be positive");
    if (noise < 0.0)
        throw std::invalid_argument("two_moons: noise must be nonnegative");

    SplitMix64 rng(seed);
    Matrix upper(count_per_moon, 2), lower(count_per_moon, 2);
    for (Index i = 0; i < count_per_moon; ++i) {
        const double theta = rng.uniform(0.0, std::numbers::pi);
        upper(i, 0) = std::cos(theta) + noise * rng.normal();
        upper(i, 1) = std::sin(theta) + noise * rng.normal();
    }
    for (Index i = 0; i < count_per_moon; ++i) {
        const double theta = rng.uniform(0.0, std::numbers::pi);
        lower(i, 0) = 1.0 - std::cos(theta) + noise * rng.normal();
        lower(i, 1) = 0.5 - std::sin(theta) + noise * rng.normal();
    }
    return {PointCloud{std::move(upper), uniform_weights(count_per_moon)},
            PointCloud{std::move(lower), uniform_weights(count_per_moon)}};
}

std::pair<PointCloud, PointCloud> annulus_and_square(Index count_annulus,
                                                     Index count_square, double r_in,
                                                     double r_out, double side,
                                                     std::uint64_t seed) {
    if (count_annulus < 1 || count_square < 1)
        throw std::invalid_argument("annulus_and_square: counts must be positive");
    if (!(0.0 <= r_in && r_in < r_out))
        throw std::invalid_argument("annulus_and_square: need 0 <= r_in < r_out");
    if (!(side > 0.0))
        throw std::invalid_argument("annulus_and_square: side must be positive");

    SplitMix64 rng(seed);
    Matrix annulus(count_annulus, 2);
    for (Index i = 0; i < count_annulus; ++i) {
        double x, y;
        do {
            x = rng.uniform(-r_out, r_out);
            y = rng.uniform(-r_out, r_out);
        } while (x * x + y * y > r_out * r_out || x * x + y * y < r_in * r_in);
        annulus(i, 0) = x;
        annulus(i, 1) = y;
    }
    Matrix square(count_square, 2);
    const double half = side / 2.0;
    for (Index i = 0; i < count_square; ++i) {
        square(i, 0) = rng.uniform(-half, half);
        square(i, 1) = rng.uniform(-half, half);
    }
    return {PointCloud{std::move(annulus), uniform_weights(count_annulus)},
            PointCloud{std::move(square), uniform_weights(count_square)}};
}

CostMatrix sq_euclidean_cost(const PointCloud& source, const PointCloud& target) {
    if (source.dim() != target.dim())
        throw std::invalid_argument("sq_euclidean_cost: dimension mismatch");
    const Index n = source.count(), m = target.count();
    Matrix cost(n, m);
    for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < n; ++i)
            cost(i, j) = (source.points.row(i) - target.points.row(j)).squaredNorm();
    return CostMatrix(std::move(cost));
}

} // namespace sknr::harness
