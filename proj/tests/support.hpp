#ifndef SKNR_TESTS_SUPPORT_HPP
#define SKNR_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <cmath>

#include "sknr/core.hpp"
#include "sknr/harness/rng.hpp"
#include "sknr/spectral.hpp"
#include "sknr/types.hpp"

namespace sknr::testing {

inline DiscreteMeasure random_measure(harness::SplitMix64& rng, Index size) {
    Vector w(size);
    for (Index i = 0; i < size; ++i) w[i] = 0.2 + rng.uniform01();
    w /= w.sum();
    return DiscreteMeasure(std::move(w));
}

inline EotProblem random_problem(harness::SplitMix64& rng, Index n, Index m,
                                 double epsilon, double cost_scale = 2.0) {
    Matrix cost(n, m);
    for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < n; ++i) cost(i, j) = cost_scale * rng.uniform01();
    return EotProblem(CostMatrix(std::move(cost)), random_measure(rng, n),
                      random_measure(rng, m), epsilon);
}

inline Vector random_vector(harness::SplitMix64& rng, Index size, double scale = 1.0) {
    Vector v(size);
    for (Index i = 0; i < size; ++i) v[i] = scale * rng.uniform(-1.0, 1.0);
    return v;
}

/// Dense symmetrized block Rt_ij = sqrt(a_i) exp((f_i+g_j-C_ij)/eps) sqrt(b_j),
/// built entrywise; the oracle counterpart of SinkhornOperator.
inline Matrix dense_sym_block(const EotProblem& problem, const Potentials& pots) {
    const Index n = problem.n(), m = problem.m();
    const Vector sa = problem.alpha().weights().cwiseSqrt();
    const Vector sb = problem.beta().weights().cwiseSqrt();
    Matrix block(n, m);
    for (Index j = 0; j < m; ++j)
        for (Index i = 0; i < n; ++i)
            block(i, j) = sa[i] *
                          std::exp((pots.f[i] + pots.g[j] - problem.cost()(i, j)) /
                                   problem.epsilon()) *
                          sb[j];
    return block;
}

/// Dense Hermitization [[0, Rt], [Rt^T, 0]] in symmetrized coordinates.
inline Matrix dense_K_sym(const EotProblem& problem, const Potentials& pots) {
    const Index n = problem.n(), m = problem.m();
    const Matrix block = dense_sym_block(problem, pots);
    Matrix k = Matrix::Zero(n + m, n + m);
    k.topRightCorner(n, m) = block;
    k.bottomLeftCorner(m, n) = block.transpose();
    return k;
}

/// Exact eigenbasis from a dense SVD of the symmetrized block: the Perron
/// triplet (largest singular value) is dropped, the next `ell` left singular
/// vectors are mapped back to potential coordinates. Independent of the
/// iterative top_modes path.
inline SpectralBasis dense_svd_basis(const EotProblem& problem, const Potentials& pots,
                                     Index ell) {
    const Matrix block = dense_sym_block(problem, pots);
    Eigen::JacobiSVD<Matrix> svd(block, Eigen::ComputeThinU);
    SpectralBasis basis;
    basis.vectors_sym = svd.matrixU().middleCols(1, ell);
    basis.rhos = svd.singularValues().segment(1, ell);
    basis.vectors = basis.vectors_sym.array().colwise() /
                    problem.alpha().weights().cwiseSqrt().array();
    basis.epsilon_built_at = problem.epsilon();
    return basis;
}

/// All nontrivial singular values (Perron dropped), for rate oracles.
inline Vector dense_rhos(const EotProblem& problem, const Potentials& pots) {
    const Matrix block = dense_sym_block(problem, pots);
    Eigen::JacobiSVD<Matrix> svd(block);
    const Vector sv = svd.singularValues();
    return sv.tail(sv.size() - 1);
}

/// Closed-form optimum of the symmetric 2x2 instance
/// C = [[0,1],[1,0]], alpha = beta = (1/2,1/2): f* = 0,
/// g* = -eps log((1 + e^(-1/eps))/2), rho_1 = tanh(1/(2 eps)).
inline EotProblem symmetric_2x2(double epsilon = 1.0) {
    Matrix cost(2, 2);
    cost << 0.0, 1.0, 1.0, 0.0;
    const Vector half = Vector::Constant(2, 0.5);
    return EotProblem(CostMatrix(std::move(cost)), DiscreteMeasure(half),
                      DiscreteMeasure(half), epsilon);
}

inline Potentials symmetric_2x2_optimum(double epsilon = 1.0) {
    const double g = -epsilon * std::log(0.5 * (1.0 + std::exp(-1.0 / epsilon)));
    return Potentials{Vector::Zero(2), Vector::Constant(2, g)};
}

} // namespace sknr::testing

#endif // SKNR_TESTS_SUPPORT_HPP
