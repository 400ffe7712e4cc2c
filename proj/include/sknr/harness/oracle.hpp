#ifndef SKNR_HARNESS_ORACLE_HPP
#define SKNR_HARNESS_ORACLE_HPP

#include <cstdint>

#include "sknr/types.hpp"

namespace sknr::harness {

/// High-precision ground truth. residual is the marginal error of `coupling`.
struct OracleSolution {
    Potentials potentials; // gauge-normalized (alpha-mean-zero f)
    Coupling coupling;
    double residual = 0.0;
};

/// Ground-truth solve used as an independent oracle for solver tests: plain
/// Sinkhorn sweeps followed by a full-space damped Newton polish on the
/// semi-dual (gauge direction deflated). Implemented against the core and
/// objective primitives only; never calls into the solver module.
OracleSolution oracle_solve(const EotProblem& problem, double target_residual = 1e-13);

/// Checks the first-order expansion of one half-sweep around the optimum:
/// for random perturbations (df, dg) of the given sup-norm scale,
///   (g_k^{C,eps} - f*, f_k^{C,eps} - g*)  vs  -K_eps(df, dg).
struct LinearizationReport {
    double scale = 0.0;
    int trials = 0;
    /// Quadratic remainder of the full increment, relative to scale^2 / eps.
    double max_ratio = 0.0;
    /// Deviation of the linear term (odd part of the increment, extracted by
    /// symmetric differencing) from -K_eps, relative to ||K_eps delta||_inf.
    double max_linear_rel_err = 0.0;
};

LinearizationReport linearization_check(const EotProblem& problem,
                                        const OracleSolution& oracle,
                                        double perturbation_scale, int trials,
                                        std::uint64_t seed = 2024);

/// Default perturbation scale 1e-4 * eps, 16 trials.
inline LinearizationReport linearization_check(const EotProblem& problem,
                                               const OracleSolution& oracle) {
    return linearization_check(problem, oracle, 1e-4 * problem.epsilon(), 16);
}

} // namespace sknr::harness

#endif // SKNR_HARNESS_ORACLE_HPP
