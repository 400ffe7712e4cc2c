#ifndef SKNR_OBJECTIVE_HPP
#define SKNR_OBJECTIVE_HPP

#include "sknr/spectral.hpp"
#include "sknr/types.hpp"

namespace sknr {

/// Dual objective <f,alpha> + <g,beta> - eps (sum_ij a_i b_j e^((f+g-C)/eps) - 1).
double dual_value(const EotProblem& problem, const Potentials& pots);

/// Semi-dual objective <f,alpha> + <f^{C,eps}, beta>.
double semi_dual_value(const EotProblem& problem, const Vector& f);

/// Euclidean-coordinate gradient of the semi-dual: alpha minus the row
/// marginal of the plan induced by (f, f^{C,eps}). Sums to zero for any f.
Vector semi_dual_gradient(const EotProblem& problem, const Vector& f);

/// u^T nabla^2 Q^semi(f) u = -(1/eps) sum_j beta_j Var_j(u) for the
/// column-conditional distributions p_j(i) = alpha_i e^((f_i + g_j - C_ij)/eps)
/// with g = f^{C,eps}. Always <= 0 up to roundoff.
double semi_dual_hessian_quadform(const EotProblem& problem, const Vector& f,
                                  const Vector& u);

/// Gradient and Hessian of t -> Q^semi(f + V t) at t = 0 for the basis
/// columns V; the plain ell x ell Newton system data.
struct RestrictedDerivatives {
    Vector grad; // ell
    Matrix hess; // ell x ell, symmetric negative semidefinite
};

RestrictedDerivatives restricted_derivatives(const EotProblem& problem, const Vector& f,
                                             const SpectralBasis& basis);

/// Same, with the partner transform g = f^{C,eps} already computed.
RestrictedDerivatives restricted_derivatives_with_transform(const EotProblem& problem,
                                                            const Vector& f,
                                                            const Vector& g,
                                                            const SpectralBasis& basis);

/// Dense n x n Hessian matching semi_dual_hessian_quadform, for oracles and
/// cross-checks only. Throws above the dense size limit.
Matrix full_semi_dual_hessian(const EotProblem& problem, const Vector& f,
                              Index dense_limit = 2000);

} // namespace sknr

#endif // SKNR_OBJECTIVE_HPP
