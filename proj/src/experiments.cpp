#include "sknr/harness/experiments.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <thread>

#include "sknr/harness/oracle.hpp"

namespace sknr::harness {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt(Index x) { return std::to_string(x); }
std::string fmt(std::uint64_t x) { return std::to_string(x); }

int worker_count() {
    if (const char* env = std::getenv("SKNR_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

// Runs jobs under the SKNR_THREADS cap; each job writes only its own slot,
// so emission order never depends on scheduling.
void run_jobs(std::vector<std::function<void()>>& jobs) {
    const int workers = std::min<int>(worker_count(), static_cast<int>(jobs.size()));
    if (workers <= 1) {
        for (auto& job : jobs) job();
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
                jobs[i]();
        });
    }
    for (auto& t : pool) t.join();
}

struct RunRows {
    std::vector<std::vector<std::string>> runs;
    std::vector<std::vector<std::string>> timings;
    std::vector<std::vector<std::string>> spectrum;
};

void append_trace(RunRows& rows, const ExperimentSpec& spec, std::uint64_t seed,
                  double epsilon, Index ell, const std::string& warm, Index stage,
                  const SolveResult& result) {
    for (const IterationRecord& rec : result.trace) {
        rows.runs.push_back({spec.instance.family, fmt(seed), fmt(epsilon), fmt(ell),
                             warm, fmt(stage), fmt(rec.index), fmt(rec.marginal_error),
                             fmt(rec.semi_dual_value),
                             rec.newton_accepted ? "1" : "0"});
        rows.timings.push_back({spec.instance.family, fmt(seed), fmt(epsilon), fmt(ell),
                                warm, fmt(stage), fmt(rec.index),
                                fmt(rec.wall_time_ms)});
    }
}

} // namespace

const char* warm_mode_name(WarmMode mode) {
    switch (mode) {
        case WarmMode::none: return "none";
        case WarmMode::potentials: return "potentials";
        case WarmMode::spectral: return "spectral";
    }
    return "?";
}

EotProblem make_instance(const InstanceSpec& spec, double epsilon, std::uint64_t seed) {
    // Distinct derived seeds keep source/target streams independent.
    const std::uint64_t target_seed = seed ^ 0xD1B54A32D192ED03ull;
    const auto clouds = [&]() -> std::pair<PointCloud, PointCloud> {
        if (spec.family == "gauss2d") {
            Eigen::Matrix2d cov_t;
            cov_t << 1.0, -0.8, -0.8, 1.0;
            return {gaussian_cloud(spec.n, Eigen::Vector2d(0.0, 0.0),
                                   Eigen::Matrix2d::Identity(), seed),
                    gaussian_cloud(spec.m, Eigen::Vector2d(4.0, 4.0), cov_t,
                                   target_seed)};
        }
        if (spec.family == "two_moons")
            return {two_moons(spec.n, spec.noise, seed).first,
                    two_moons(spec.m, spec.noise, target_seed).second};
        if (spec.family == "annulus_square")
            return annulus_and_square(spec.n, spec.m, spec.r_in, spec.r_out, spec.side,
                                      seed);
        throw std::invalid_argument("make_instance: unknown family '" + spec.family +
                                    "'");
    }();
    return EotProblem(sq_euclidean_cost(clouds.first, clouds.second),
                      clouds.first.weights, clouds.second.weights, epsilon);
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentResult result;
    result.runs.columns = {"family", "seed", "epsilon", "ell", "warm", "stage",
                           "iter", "marginal_error", "semi_dual_value",
                           "newton_accepted"};
    result.timings.columns = {"family", "seed", "epsilon", "ell", "warm",
                              "stage", "iter", "time_ms"};
    result.spectrum.columns = {"family", "seed", "epsilon", "mode",
                               "rho", "hessian_eig_low"};

    std::vector<RunRows> per_seed(spec.seeds.size());
    std::vector<std::function<void()>> jobs;
    jobs.reserve(spec.seeds.size());

    for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
        jobs.emplace_back([&, si] {
            const std::uint64_t seed = spec.seeds[si];
            RunRows& rows = per_seed[si];
            switch (spec.kind) {
                case ExperimentKind::ell_sweep: {
                    if (spec.ells.empty()) break;
                    const EotProblem problem =
                        make_instance(spec.instance, spec.epsilon, seed);
                    Index ell_max = 0;
                    for (Index ell : spec.ells) ell_max = std::max(ell_max, ell);
                    SpectralBasis basis_max;
                    if (ell_max > 0) {
                        const EotProblem warm_problem =
                            problem.with_epsilon(spec.basis_from);
                        SolverConfig warm_config = spec.solver;
                        warm_config.ell = 0;
                        const SolveResult warm = solve(warm_problem, warm_config);
                        basis_max = top_modes(
                            build_operator(warm_problem, warm.potentials), ell_max);
                    }
                    for (Index ell : spec.ells) {
                        SolverConfig config = spec.solver;
                        config.ell = ell;
                        SpectralBasis basis;
                        if (ell > 0) {
                            basis.vectors = basis_max.vectors.leftCols(ell);
                            basis.vectors_sym = basis_max.vectors_sym.leftCols(ell);
                            basis.rhos = basis_max.rhos.head(ell);
                            basis.epsilon_built_at = basis_max.epsilon_built_at;
                        }
                        const SolveResult run =
                            solve(problem, config, ell > 0 ? &basis : nullptr);
                        append_trace(rows, spec, seed, spec.epsilon, ell, "", 0, run);
                    }
                    break;
                }
                case ExperimentKind::anneal_compare: {
                    if (spec.schedule.empty() || spec.warm_modes.empty()) break;
                    const EotProblem problem_template =
                        make_instance(spec.instance, spec.schedule.front(), seed);
                    for (WarmMode mode : spec.warm_modes) {
                        AnnealSchedule schedule{spec.schedule, mode, spec.refresh_basis};
                        SolverConfig config = spec.solver;
                        config.ell = spec.ell;
                        const auto stages = anneal(problem_template, schedule, config);
                        for (std::size_t s = 0; s < stages.size(); ++s)
                            append_trace(rows, spec, seed, spec.schedule[s],
                                         mode == WarmMode::spectral && s > 0 ? spec.ell
                                                                             : 0,
                                         warm_mode_name(mode),
                                         static_cast<Index>(s), stages[s]);
                    }
                    break;
                }
                case ExperimentKind::spectrum_sweep: {
                    for (double epsilon : spec.epsilons) {
                        const EotProblem problem =
                            make_instance(spec.instance, epsilon, seed);
                        const OracleSolution anchor = oracle_solve(problem, 1e-12);
                        const SpectrumReport report =
                            spectrum_report(problem, anchor.potentials, spec.k);
                        for (Index a = 0; a < spec.k; ++a)
                            rows.spectrum.push_back(
                                {spec.instance.family, fmt(seed), fmt(epsilon),
                                 fmt(a + 1), fmt(report.rhos[a]),
                                 fmt(report.hessian_eigs_low[a])});
                    }
                    break;
                }
            }
        });
    }

    run_jobs(jobs);
    for (RunRows& rows : per_seed) {
        for (auto& row : rows.runs) result.runs.rows.push_back(std::move(row));
        for (auto& row : rows.timings) result.timings.rows.push_back(std::move(row));
        for (auto& row : rows.spectrum) result.spectrum.rows.push_back(std::move(row));
    }
    return result;
}

} // namespace sknr::harness
