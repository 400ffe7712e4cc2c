#ifndef SKNR_SOLVER_HPP
#define SKNR_SOLVER_HPP

#include <optional>
#include <span>
#include <vector>

#include "sknr/spectral.hpp"
#include "sknr/types.hpp"

namespace sknr {

struct SolverConfig {
    double tol_omega = 1e-9; // marginal-error stopping threshold
    Index max_iter = 100000;
    Index ell = 0;              // Newton subspace dimension; 0 = vanilla SK
    bool newton_enabled = true; // effective only when ell > 0 and a basis is given
    bool trace_enabled = true;
};

struct IterationRecord {
    Index index = 0;
    double marginal_error = 0.0;     // Euclidean, as in the stopping rule
    double marginal_error_inf = 0.0; // reported alongside for diagnostics
    double semi_dual_value = 0.0;
    bool newton_attempted = false;
    bool newton_accepted = false;
    double wall_time_ms = 0.0;
};

struct SolveResult {
    Potentials potentials;
    Coupling coupling;
    bool converged = false;
    Index iterations = 0;
    std::vector<IterationRecord> trace;
};

enum class WarmMode { none, potentials, spectral };

struct AnnealSchedule {
    std::vector<double> epsilons; // strictly decreasing
    WarmMode warm_mode = WarmMode::none;
    bool refresh_basis = false; // rebuild V_ell at every stage vs reuse the first
};

/// One full Sinkhorn sweep in the log domain: g' = f^{C,eps}, f' = g'^{C,eps}.
Potentials sk_sweep(const EotProblem& problem, const Potentials& pots);

struct NewtonOutcome {
    Vector f;
    bool accepted = false;
    bool factorization_failed = false;
};

/// Newton-Raphson step restricted to the basis columns: solves the ell x ell
/// system by Cholesky of the negated Hessian and accepts the candidate only
/// if it strictly increases the semi-dual value. No line search.
NewtonOutcome newton_step(const EotProblem& problem, const Vector& f,
                          const SpectralBasis& basis);

/// SK-NR(ell): Sinkhorn sweeps with an optional low-dimensional Newton
/// correction after each sweep. With ell = 0 (or no basis) this is vanilla
/// Sinkhorn-Knopp. Reaching max_iter sets converged=false, it is not an error.
SolveResult solve(const EotProblem& problem, const SolverConfig& config,
                  const SpectralBasis* basis = nullptr,
                  const Potentials* init = nullptr);

/// Epsilon-annealing driver. `problem_template`'s epsilon is ignored; each
/// stage runs at schedule.epsilons[s]. Stage 0 is always vanilla SK from
/// zero; later stages warm-start according to the schedule's mode.
std::vector<SolveResult> anneal(const EotProblem& problem_template,
                                const AnnealSchedule& schedule,
                                const SolverConfig& config);

/// Geometric-mean ratio of successive errors over the trace tail (the last
/// max(5, ceil(T/3)) entries). Requires >= 5 positive entries.
double estimate_contraction(std::span<const double> errors);

} // namespace sknr

#endif // SKNR_SOLVER_HPP
