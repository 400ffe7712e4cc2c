#include "sknr/harness/oracle.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "sknr/core.hpp"
#include "sknr/harness/rng.hpp"
#include "sknr/objective.hpp"
#include "sknr/spectral.hpp"

namespace sknr::harness {

namespace {

double residual_of(const EotProblem& problem, const Potentials& pots) {
    return marginal_gap(problem, plan_marginals(problem, pots)).l2;
}

} // namespace

OracleSolution oracle_solve(const EotProblem& problem, double target_residual) {
    if (problem.n() * problem.m() > 1'000'000)
        throw std::invalid_argument("oracle_solve: instance above desk scale (n*m > 1e6)");
    const Index n = problem.n();
    const Vector& alpha_w = problem.alpha().weights();

    Potentials pots{Vector::Zero(n), Vector::Zero(problem.m())};
    double residual = residual_of(problem, pots);

    // Phase 1: plain Sinkhorn sweeps to get inside the Newton basin.
    constexpr Index kMaxSkIters = 10'000'000;
    constexpr Index kSkBatch = 50;
    Index sk_done = 0;

    // Phase 2 helper: damped full-space Newton on the semi-dual, with the
    // gauge direction removed by a rank-one shift (the shifted system is
    // negative definite and its solution is automatically 1-orthogonal).
    const auto newton_polish = [&]() {
        for (int step = 0; step < 60 && residual > target_residual; ++step) {
            const Matrix hess = full_semi_dual_hessian(problem, pots.f);
            const double mu = 1.0 / (problem.epsilon() * static_cast<double>(n));
            const Matrix shifted =
                -hess + mu * Matrix::Ones(n, n); // -(H - mu 11^T), positive definite
            Eigen::LLT<Matrix> llt(shifted);
            if (llt.info() != Eigen::Success) return;
            const Vector grad = semi_dual_gradient(problem, pots.f);
            const Vector delta = llt.solve(grad);

            const double value = semi_dual_value(problem, pots.f);
            double step_size = 1.0;
            bool improved = false;
            for (int halving = 0; halving < 40; ++halving) {
                const Vector candidate = pots.f + step_size * delta;
                if (semi_dual_value(problem, candidate) > value) {
                    pots.f = candidate;
                    improved = true;
                    break;
                }
                step_size *= 0.5;
            }
            if (!improved) return;
            pots.g = ctransform_of_f(problem, pots.f);
            residual = residual_of(problem, pots);
        }
    };

    while (residual > target_residual && sk_done < kMaxSkIters) {
        for (Index it = 0; it < kSkBatch && sk_done < kMaxSkIters; ++it, ++sk_done) {
            pots.g = ctransform_of_f(problem, pots.f);
            pots.f = ctransform_of_g(problem, pots.g);
            const double c = alpha_w.dot(pots.f);
            pots.f.array() -= c;
            pots.g.array() += c;
        }
        residual = residual_of(problem, pots);
        if (residual <= target_residual) break;
        newton_polish();
    }

    if (residual > 10.0 * target_residual)
        throw std::runtime_error("oracle_solve: no convergence, residual " +
                                 std::to_string(residual));

    pots = gauge_normalized(problem, pots);
    OracleSolution solution;
    solution.coupling = coupling_from(problem, pots);
    solution.residual = marginal_error(problem, solution.coupling);
    solution.potentials = std::move(pots);
    return solution;
}

LinearizationReport linearization_check(const EotProblem& problem,
                                        const OracleSolution& oracle,
                                        double perturbation_scale, int trials,
                                        std::uint64_t seed) {
    if (!(perturbation_scale > 0.0))
        throw std::invalid_argument("linearization_check: scale must be positive");
    if (trials < 1)
        throw std::invalid_argument("linearization_check: need at least one trial");

    const SinkhornOperator op = build_operator(problem, oracle.potentials);
    const Index n = problem.n(), m = problem.m();
    SplitMix64 rng(seed);

    LinearizationReport report;
    report.scale = perturbation_scale;
    report.trials = trials;

    for (int t = 0; t < trials; ++t) {
        Vector df(n), dg(m);
        for (Index i = 0; i < n; ++i) df[i] = rng.uniform(-1.0, 1.0);
        for (Index j = 0; j < m; ++j) dg[j] = rng.uniform(-1.0, 1.0);
        const double sup = std::max(df.cwiseAbs().maxCoeff(), dg.cwiseAbs().maxCoeff());
        df *= perturbation_scale / sup;
        dg *= perturbation_scale / sup;

        const Vector fk = oracle.potentials.f + df;
        const Vector gk = oracle.potentials.g + dg;
        const Vector lhs_f = ctransform_of_g(problem, gk) - oracle.potentials.f;
        const Vector lhs_g = ctransform_of_f(problem, fk) - oracle.potentials.g;
        const auto [rf, rg] = op.apply_K(df, dg);
        const Vector rhs_f = -rf;
        const Vector rhs_g = -rg;

        // Full increment against the linear prediction: the residual is the
        // quadratic remainder and scales like scale^2 / eps.
        const double res = std::max((lhs_f - rhs_f).cwiseAbs().maxCoeff(),
                                    (lhs_g - rhs_g).cwiseAbs().maxCoeff());
        const double quad_scale =
            perturbation_scale * perturbation_scale / problem.epsilon();
        report.max_ratio = std::max(report.max_ratio, res / quad_scale);

        // Linear term extracted by symmetric difference (the even quadratic
        // part cancels): it must match -K_eps to third order.
        const Vector lin_f =
            0.5 * (lhs_f - (ctransform_of_g(problem, oracle.potentials.g - dg) -
                            oracle.potentials.f));
        const Vector lin_g =
            0.5 * (lhs_g - (ctransform_of_f(problem, oracle.potentials.f - df) -
                            oracle.potentials.g));
        const double lin_res = std::max((lin_f - rhs_f).cwiseAbs().maxCoeff(),
                                        (lin_g - rhs_g).cwiseAbs().maxCoeff());
        const double rhs_norm = std::max(rhs_f.cwiseAbs().maxCoeff(),
                                         rhs_g.cwiseAbs().maxCoeff());
        if (rhs_norm > 0.0)
            report.max_linear_rel_err =
                std::max(report.max_linear_rel_err, lin_res / rhs_norm);
    }
    return report;
}

} // namespace sknr::harness
