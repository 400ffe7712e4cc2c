#include "sknr/objective.hpp"

#include <cmath>
#include <limits>

#include "sknr/core.hpp"

namespace sknr {

double dual_value(const EotProblem& problem, const Potentials& pots) {
    if (pots.f.size() != problem.n() || pots.g.size() != problem.m())
        throw std::invalid_argument("dual_value: potential sizes mismatch");
    if (!pots.f.allFinite() || !pots.g.allFinite())
        throw std::invalid_argument("dual_value: potentials must be finite");

    const Matrix& cost = problem.cost();
    const Vector& la = problem.alpha().log_weights();
    const Vector& lb = problem.beta().log_weights();
    const double inv_eps = 1.0 / problem.epsilon();
    const Index n = problem.n(), m = problem.m();

    // log sum_ij alpha_i beta_j exp((f_i + g_j - C_ij)/eps), max-shifted.
    double shift = -std::numeric_limits<double>::infinity();
    for (Index j = 0; j < m; ++j) {
        const double* cj = cost.col(j).data();
        const double base = lb[j] + pots.g[j] * inv_eps;
        for (Index i = 0; i < n; ++i)
            shift = std::max(shift, la[i] + base + (pots.f[i] - cj[i]) * inv_eps);
    }
    double total = 0.0;
    for (Index j = 0; j < m; ++j) {
        const double* cj = cost.col(j).data();
        const double base = lb[j] + pots.g[j] * inv_eps;
        for (Index i = 0; i < n; ++i)
            total += std::exp(la[i] + base + (pots.f[i] - cj[i]) * inv_eps - shift);
    }
    const double log_mass = shift + std::log(total);
    return problem.alpha().weights().dot(pots.f) + problem.beta().weights().dot(pots.g) -
           problem.epsilon() * std::expm1(log_mass);
}

double semi_dual_value(const EotProblem& problem, const Vector& f) {
    const Vector g = ctransform_of_f(problem, f);
    return problem.alpha().weights().dot(f) + problem.beta().weights().dot(g);
}

Vector semi_dual_gradient(const EotProblem& problem, const Vector& f) {
    const Vector g = ctransform_of_f(problem, f);
    const PlanMarginals marginals = plan_marginals(problem, Potentials{f, g});
    return problem.alpha().weights() - marginals.row;
}

double semi_dual_hessian_quadform(const EotProblem& problem, const Vector& f,
                                  const Vector& u) {
    if (u.size() != problem.n())
        throw std::invalid_argument("semi_dual_hessian_quadform: length mismatch");
    const Vector g = ctransform_of_f(problem, f);
    const Matrix& cost = problem.cost();
    const Vector& a = problem.alpha().weights();
    const Vector& b = problem.beta().weights();
    const double inv_eps = 1.0 / problem.epsilon();
    const Index n = problem.n(), m = problem.m();

    double acc = 0.0;
    for (Index j = 0; j < m; ++j) {
        const double* cj = cost.col(j).data();
        const double gj = g[j];
        double m1 = 0.0, m2 = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double p = a[i] * std::exp((f[i] + gj - cj[i]) * inv_eps);
            m1 += p * u[i];
            m2 += p * u[i] * u[i];
        }
        acc += b[j] * (m2 - m1 * m1);
    }
    return -acc * inv_eps;
}

namespace {

constexpr Index kColumnChunk = 128;

// Accumulates, over a column chunk, the conditional weights
// p_j(i) = alpha_i exp((f_i + g_j - C_ij)/eps) and feeds the callback with
// the chunk matrix and its column range.
template <typename Callback>
void for_each_conditional_chunk(const EotProblem& problem, const Vector& f,
                                const Vector& g, Callback&& cb) {
    const Matrix& cost = problem.cost();
    const Vector& a = problem.alpha().weights();
    const double inv_eps = 1.0 / problem.epsilon();
    const Index n = problem.n(), m = problem.m();
    Matrix chunk(n, std::min(kColumnChunk, m));
    for (Index j0 = 0; j0 < m; j0 += kColumnChunk) {
        const Index width = std::min(kColumnChunk, m - j0);
        for (Index c = 0; c < width; ++c) {
            const Index j = j0 + c;
            const double* cj = cost.col(j).data();
            double* pc = chunk.col(c).data();
            const double gj = g[j];
            for (Index i = 0; i < n; ++i)
                pc[i] = a[i] * std::exp((f[i] + gj - cj[i]) * inv_eps);
        }
        cb(chunk.leftCols(width), j0, width);
    }
}

} // namespace

RestrictedDerivatives restricted_derivatives_with_transform(const EotProblem& problem,
                                                            const Vector& f,
                                                            const Vector& g,
                                                            const SpectralBasis& basis) {
    if (basis.dim() != problem.n())
        throw std::invalid_argument("restricted_derivatives: basis dimension mismatch");
    if (basis.ell() < 1)
        throw std::invalid_argument("restricted_derivatives: empty basis");
    const Index ell = basis.ell();
    const Vector& b = problem.beta().weights();
    const Matrix& v = basis.vectors;

    // One pass over the plan entries builds the row marginal r and the
    // per-column first moments S = V^T P; the cross-moment term of the
    // Hessian then collapses to V^T diag(r) V - S D_beta S^T.
    Vector row_marginal = Vector::Zero(problem.n());
    Matrix cross = Matrix::Zero(ell, ell);
    for_each_conditional_chunk(
        problem, f, g,
        [&](const auto& chunk, Index j0, Index width) {
            const auto b_seg = b.segment(j0, width);
            row_marginal.noalias() += chunk * b_seg;
            const Matrix s = v.transpose() * chunk; // ell x width
            cross.noalias() += s * b_seg.asDiagonal() * s.transpose();
        });

    RestrictedDerivatives out;
    out.grad = v.transpose() * (problem.alpha().weights() - row_marginal);
    const Matrix weighted = row_marginal.asDiagonal() * v;
    Matrix hess = (-1.0 / problem.epsilon()) * (v.transpose() * weighted - cross);
    out.hess = 0.5 * (hess + hess.transpose());
    return out;
}

RestrictedDerivatives restricted_derivatives(const EotProblem& problem, const Vector& f,
                                             const SpectralBasis& basis) {
    const Vector g = ctransform_of_f(problem, f);
    return restricted_derivatives_with_transform(problem, f, g, basis);
}

Matrix full_semi_dual_hessian(const EotProblem& problem, const Vector& f,
                              Index dense_limit) {
    if (problem.n() > dense_limit)
        throw std::invalid_argument("full_semi_dual_hessian: dense Hessian too large");
    const Vector g = ctransform_of_f(problem, f);
    const Vector& b = problem.beta().weights();
    const Index n = problem.n();

    Vector row_marginal = Vector::Zero(n);
    Matrix outer = Matrix::Zero(n, n);
    for_each_conditional_chunk(
        problem, f, g,
        [&](const auto& chunk, Index j0, Index width) {
            const auto b_seg = b.segment(j0, width);
            row_marginal.noalias() += chunk * b_seg;
            outer.noalias() += chunk * b_seg.asDiagonal() * chunk.transpose();
        });

    Matrix hess = (-1.0 / problem.epsilon()) *
                  (Matrix(row_marginal.asDiagonal()) - outer);
    return 0.5 * (hess + hess.transpose());
}

} // namespace sknr
