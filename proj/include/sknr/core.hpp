#ifndef SKNR_CORE_HPP
#define SKNR_CORE_HPP

#include <span>

#include "sknr/types.hpp"

namespace sknr {

/// log sum_i exp(values[i] + log_weights[i]), max-shifted so it never
/// overflows for inputs below 1e300. Throws on empty input.
double log_sum_exp(std::span<const double> values, std::span<const double> log_weights);

/// g_j = -eps * log sum_i alpha_i exp((f_i - C_ij)/eps); the (C,eps)-transform
/// producing the optimal partner of f.
Vector ctransform_of_f(const EotProblem& problem, const Vector& f);

/// f_i = -eps * log sum_j beta_j exp((g_j - C_ij)/eps); mirror transform.
Vector ctransform_of_g(const EotProblem& problem, const Vector& g);

/// plan_ij = alpha_i beta_j exp((f_i + g_j - C_ij)/eps), exponent evaluated
/// per entry; no kernel matrix exp(-C/eps) is ever formed.
Coupling coupling_from(const EotProblem& problem, const Potentials& pots);

/// ||plan 1 - alpha||_2 + ||plan^T 1 - beta||_2.
double marginal_error(const EotProblem& problem, const Coupling& coupling);

/// max(v) - min(v); zero iff v is constant. Throws on empty input.
double osc_norm(const Vector& v);

/// Row and column sums of the plan induced by (f, g), computed in one pass
/// without materializing the plan.
struct PlanMarginals {
    Vector row; // length n
    Vector col; // length m
};
PlanMarginals plan_marginals(const EotProblem& problem, const Potentials& pots);

struct MarginalGap {
    double l2;  // ||row - alpha||_2 + ||col - beta||_2
    double inf; // ||row - alpha||_inf + ||col - beta||_inf
};
MarginalGap marginal_gap(const EotProblem& problem, const PlanMarginals& marginals);

/// Shifts the pair so that f has alpha-mean zero: c = <f, alpha>,
/// (f, g) <- (f - c, g + c). Canonical representative of the gauge class.
Potentials gauge_normalized(const EotProblem& problem, Potentials pots);

/// Sup distance between gauge classes: normalizes both pairs and takes the
/// max of the two component-wise sup norms of the differences.
double gauge_distance(const EotProblem& problem, const Potentials& a, const Potentials& b);

} // namespace sknr

#endif // SKNR_CORE_HPP
