#include "sknr/solver.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>

#include "sknr/core.hpp"
#include "sknr/objective.hpp"

namespace sknr {

Potentials sk_sweep(const EotProblem& problem, const Potentials& pots) {
    Potentials out;
    out.g = ctransform_of_f(problem, pots.f);
    out.f = ctransform_of_g(problem, out.g);
    return out;
}

namespace {

struct NewtonAttempt {
    Vector f;
    double value;
    bool accepted = false;
    bool factorization_failed = false;
};

// Shared implementation: `value_at_f` and `transform_of_f` are the already
// computed Q^semi(f) and f^{C,eps}.
NewtonAttempt try_newton(const EotProblem& problem, const Vector& f,
                         const Vector& transform_of_f, double value_at_f,
                         const SpectralBasis& basis) {
    NewtonAttempt attempt;
    const RestrictedDerivatives d =
        restricted_derivatives_with_transform(problem, f, transform_of_f, basis);

    Eigen::LLT<Matrix> llt(-d.hess);
    if (llt.info() != Eigen::Success) {
        attempt.f = f;
        attempt.value = value_at_f;
        attempt.factorization_failed = true;
        return attempt;
    }
    const Vector delta = llt.solve(d.grad);
    const Vector candidate = f + basis.vectors * delta;
    const double candidate_value = semi_dual_value(problem, candidate);
    if (candidate_value > value_at_f) {
        attempt.f = candidate;
        attempt.value = candidate_value;
        attempt.accepted = true;
    } else {
        attempt.f = f;
        attempt.value = value_at_f;
    }
    return attempt;
}

} // namespace

NewtonOutcome newton_step(const EotProblem& problem, const Vector& f,
                          const SpectralBasis& basis) {
    if (basis.ell() < 1)
        throw std::invalid_argument("newton_step: empty basis");
    const Vector g = ctransform_of_f(problem, f);
    const double value = problem.alpha().weights().dot(f) + problem.beta().weights().dot(g);
    NewtonAttempt attempt = try_newton(problem, f, g, value, basis);
    return NewtonOutcome{std::move(attempt.f), attempt.accepted,
                         attempt.factorization_failed};
}

SolveResult solve(const EotProblem& problem, const SolverConfig& config,
                  const SpectralBasis* basis, const Potentials* init) {
    if (!(config.tol_omega > 0.0))
        throw std::invalid_argument("solve: tol_omega must be positive");
    if (config.max_iter < 1)
        throw std::invalid_argument("solve: max_iter must be >= 1");
    const bool use_newton = config.newton_enabled && config.ell > 0;
    if (use_newton) {
        if (basis == nullptr)
            throw std::invalid_argument("solve: ell > 0 requires a basis");
        if (basis->ell() != config.ell)
            throw std::invalid_argument("solve: basis has wrong column count");
        if (basis->dim() != problem.n())
            throw std::invalid_argument("solve: basis dimension mismatch");
    }

    Potentials pots;
    if (init != nullptr) {
        pots = *init;
        if (pots.f.size() != problem.n() || pots.g.size() != problem.m())
            throw std::invalid_argument("solve: init potential sizes mismatch");
    } else {
        pots.f = Vector::Zero(problem.n());
        pots.g = Vector::Zero(problem.m());
    }

    const Vector& alpha_w = problem.alpha().weights();
    const Vector& beta_w = problem.beta().weights();

    SolveResult result;
    result.converged = false;

    using Clock = std::chrono::steady_clock;
    for (Index k = 1; k <= config.max_iter; ++k) {
        const auto t0 = Clock::now();
        pots = sk_sweep(problem, pots);
        // Keep f alpha-mean-zero; prevents gauge drift over long runs.
        {
            const double c = alpha_w.dot(pots.f);
            pots.f.array() -= c;
            pots.g.array() += c;
        }

        const PlanMarginals marginals = plan_marginals(problem, pots);
        const MarginalGap gap = marginal_gap(problem, marginals);

        IterationRecord record;
        record.index = k;
        record.marginal_error = gap.l2;
        record.marginal_error_inf = gap.inf;
        result.iterations = k;

        if (gap.l2 < config.tol_omega) {
            if (config.trace_enabled) {
                record.semi_dual_value = semi_dual_value(problem, pots.f);
                record.wall_time_ms =
                    std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
                result.trace.push_back(record);
            }
            result.converged = true;
            break;
        }

        if (use_newton) {
            const Vector h = ctransform_of_f(problem, pots.f);
            const double value_sweep = alpha_w.dot(pots.f) + beta_w.dot(h);
            record.newton_attempted = true;
            NewtonAttempt attempt = try_newton(problem, pots.f, h, value_sweep, *basis);
            record.newton_accepted = attempt.accepted;
            record.semi_dual_value = attempt.value;
            pots.f = std::move(attempt.f);
        } else if (config.trace_enabled) {
            record.semi_dual_value = semi_dual_value(problem, pots.f);
        }

        if (config.trace_enabled) {
            record.wall_time_ms =
                std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            result.trace.push_back(record);
        }
    }

    result.potentials = pots;
    result.coupling = coupling_from(problem, pots);
    return result;
}

std::vector<SolveResult> anneal(const EotProblem& problem_template,
                                const AnnealSchedule& schedule,
                                const SolverConfig& config) {
    if (schedule.epsilons.empty())
        throw std::invalid_argument("anneal: empty schedule");
    for (std::size_t s = 1; s < schedule.epsilons.size(); ++s)
        if (!(schedule.epsilons[s] < schedule.epsilons[s - 1]))
            throw std::invalid_argument("anneal: epsilons must be strictly decreasing");

    std::vector<SolveResult> results;
    results.reserve(schedule.epsilons.size());

    SolverConfig stage_config = config;
    stage_config.ell = 0;
    EotProblem stage_problem = problem_template.with_epsilon(schedule.epsilons[0]);
    results.push_back(solve(stage_problem, stage_config));

    std::optional<SpectralBasis> spectral_basis;
    for (std::size_t s = 1; s < schedule.epsilons.size(); ++s) {
        const double prev_eps = schedule.epsilons[s - 1];
        const Potentials& prev_pots = results.back().potentials;
        const auto with_stage = [s](const std::string& what) {
            return "anneal stage " + std::to_string(s) + ": " + what;
        };

        const SpectralBasis* basis = nullptr;
        stage_config = config;
        switch (schedule.warm_mode) {
            case WarmMode::none:
            case WarmMode::potentials:
                stage_config.ell = 0;
                break;
            case WarmMode::spectral:
                if (config.ell > 0 && (!spectral_basis || schedule.refresh_basis)) {
                    const EotProblem anchor_problem =
                        problem_template.with_epsilon(prev_eps);
                    const SinkhornOperator op =
                        build_operator(anchor_problem, prev_pots);
                    try {
                        spectral_basis = top_modes(op, config.ell);
                    } catch (const EigensolverError& e) {
                        throw EigensolverError(with_stage(e.what()),
                                               e.best_residual());
                    }
                }
                if (spectral_basis) basis = &*spectral_basis;
                break;
        }

        Potentials init;
        const Potentials* init_ptr = nullptr;
        if (schedule.warm_mode != WarmMode::none) {
            init = prev_pots;
            init_ptr = &init;
        }

        stage_problem = problem_template.with_epsilon(schedule.epsilons[s]);
        try {
            results.push_back(solve(stage_problem, stage_config, basis, init_ptr));
        } catch (const std::exception& e) {
            throw std::runtime_error(with_stage(e.what()));
        }
    }
    return results;
}

double estimate_contraction(std::span<const double> errors) {
    const std::size_t total = errors.size();
    if (total < 5)
        throw std::invalid_argument("estimate_contraction: insufficient data");
    for (double e : errors)
        if (!(e > 0.0))
            throw std::invalid_argument("estimate_contraction: entries must be positive");

    const std::size_t tail = std::max<std::size_t>(5, (total + 2) / 3);
    const std::size_t start = total - tail;
    double log_sum = 0.0;
    for (std::size_t i = start + 1; i < total; ++i)
        log_sum += std::log(errors[i] / errors[i - 1]);
    return std::exp(log_sum / static_cast<double>(tail - 1));
}

} // namespace sknr
