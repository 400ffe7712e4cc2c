// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not configurable.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "sknr/core.hpp"
#include "sknr/harness/experiments.hpp"
#include "sknr/harness/oracle.hpp"
#include "sknr/io.hpp"
#include "sknr/objective.hpp"
#include "sknr/solver.hpp"
#include "sknr/spectral.hpp"
#include "support.hpp"

using namespace sknr;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), detail.c_str());
    if (!pass) ++failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

// Shared state for the cross-cutting criteria 5 and 9.
std::vector<std::vector<IterationRecord>> all_traces;
struct ConvergedRun {
    std::string key;
    Coupling coupling;
};
std::vector<ConvergedRun> converged_runs;
std::map<std::string, harness::OracleSolution> oracle_cache;

const harness::OracleSolution& oracle_for(const std::string& key,
                                          const EotProblem& problem) {
    auto it = oracle_cache.find(key);
    if (it == oracle_cache.end())
        it = oracle_cache.emplace(key, harness::oracle_solve(problem)).first;
    return it->second;
}

EotProblem gauss_instance(Index n, Index m, double epsilon, std::uint64_t seed) {
    harness::InstanceSpec spec;
    spec.family = "gauss2d";
    spec.n = n;
    spec.m = m;
    return harness::make_instance(spec, epsilon, seed);
}

void register_run(const std::string& key, const SolveResult& result) {
    if (!result.trace.empty()) all_traces.push_back(result.trace);
    if (result.converged) converged_runs.push_back({key, result.coupling});
}

// --- criterion 1 ---------------------------------------------------------

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    harness::SplitMix64 rng(1001);
    double worst_grad = 0.0, worst_hess = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const double epsilon = (rep % 2 == 0) ? 0.1 : 1.0;
        const Index n = 3 + static_cast<Index>(rng.next_u64() % 8);
        const Index m = 3 + static_cast<Index>(rng.next_u64() % 8);
        const EotProblem problem = testing::random_problem(rng, n, m, epsilon);
        const Vector f = testing::random_vector(rng, n, 0.5);

        const Vector grad = semi_dual_gradient(problem, f);
        Vector fd(n);
        const double h = 1e-5;
        for (Index i = 0; i < n; ++i) {
            Vector up = f, down = f;
            up[i] += h;
            down[i] -= h;
            fd[i] = (semi_dual_value(problem, up) - semi_dual_value(problem, down)) /
                    (2.0 * h);
        }
        worst_grad = std::max(worst_grad, (grad - fd).cwiseAbs().maxCoeff() /
                                              fd.cwiseAbs().maxCoeff());

        const Vector u = testing::random_vector(rng, n);
        const double form = semi_dual_hessian_quadform(problem, f, u);
        const double h2 = 1e-4;
        const double fd2 = (semi_dual_value(problem, f + h2 * u) -
                            2.0 * semi_dual_value(problem, f) +
                            semi_dual_value(problem, f - h2 * u)) /
                           (h2 * h2);
        worst_hess = std::max(worst_hess, std::abs(form - fd2) / std::abs(fd2));
    }
    const double elapsed = seconds_since(t0);
    report(1, worst_grad <= 1e-5 && worst_hess <= 1e-4 && elapsed < 5.0,
           "semi-dual derivatives match finite differences",
           "grad rel " + fmt(worst_grad) + ", hess rel " + fmt(worst_hess) + ", " +
               fmt(elapsed) + " s");
}

// --- criteria 2 and 3 -----------------------------------------------------

void criteria_2_3() {
    const auto t0 = std::chrono::steady_clock::now();
    harness::SplitMix64 rng(2002);
    double worst_symmetry = 0.0, worst_range = 0.0, worst_perron = 0.0,
           worst_svd = 0.0, worst_link = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        const Index n = 4 + static_cast<Index>(rng.next_u64() % 9);
        const Index m = 4 + static_cast<Index>(rng.next_u64() % 9);
        const EotProblem problem = testing::random_problem(rng, n, m, 0.4);
        const harness::OracleSolution oracle = harness::oracle_solve(problem);

        Eigen::SelfAdjointEigenSolver<Matrix> eig(
            testing::dense_K_sym(problem, oracle.potentials));
        const Vector lambda = eig.eigenvalues();
        const Index total = lambda.size();
        for (Index i = 0; i < total; ++i)
            worst_symmetry =
                std::max(worst_symmetry, std::abs(lambda[i] + lambda[total - 1 - i]));
        worst_range = std::max(worst_range, lambda.cwiseAbs().maxCoeff() - 1.0);

        const SinkhornOperator op = build_operator(problem, oracle.potentials);
        const auto [kf, kg] = op.apply_K(Vector::Ones(n), Vector::Ones(m));
        worst_perron = std::max(worst_perron,
                                std::max((kf - Vector::Ones(n)).cwiseAbs().maxCoeff(),
                                         (kg - Vector::Ones(m)).cwiseAbs().maxCoeff()));

        const Matrix block = testing::dense_sym_block(problem, oracle.potentials);
        Eigen::JacobiSVD<Matrix> svd(block);
        const Vector sigma = svd.singularValues();
        for (Index a = 0; a < std::min(n, m); ++a) {
            worst_svd = std::max(worst_svd,
                                 std::abs(lambda[total - 1 - a] - sigma[a]));
            worst_svd = std::max(worst_svd, std::abs(lambda[a] + sigma[a]));
        }

        const Matrix hess = full_semi_dual_hessian(problem, oracle.potentials.f);
        const Vector inv_sqrt_alpha =
            problem.alpha().weights().cwiseSqrt().cwiseInverse();
        const Matrix lhs = -problem.epsilon() * (inv_sqrt_alpha.asDiagonal() * hess *
                                                 inv_sqrt_alpha.asDiagonal());
        const Matrix rhs = Matrix::Identity(n, n) - block * block.transpose();
        worst_link = std::max(worst_link, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    const double elapsed = seconds_since(t0);
    report(2,
           worst_symmetry <= 1e-9 && worst_range <= 1e-9 && worst_perron <= 1e-8 &&
               worst_svd <= 1e-9 && elapsed < 10.0,
           "structure theorem: symmetric spectrum in [-1,1], Perron pair, +-sigma",
           "sym " + fmt(worst_symmetry) + ", range " + fmt(worst_range) + ", perron " +
               fmt(worst_perron) + ", svd " + fmt(worst_svd) + ", " + fmt(elapsed) +
               " s");
    report(3, worst_link <= 1e-9,
           "-eps * semi-dual Hessian equals Id - Rt Rt^T in matching coordinates",
           "max dev " + fmt(worst_link));
}

// --- criterion 4 ----------------------------------------------------------

void criterion_4() {
    harness::SplitMix64 rng(4004);
    const EotProblem problem = testing::random_problem(rng, 10, 10, 0.3);
    const harness::OracleSolution oracle = harness::oracle_solve(problem, 1e-14);

    double ratio_min = std::numeric_limits<double>::infinity(), ratio_max = 0.0;
    double linear_err = 0.0;
    for (double rel : {1e-3, 1e-4, 1e-5}) {
        const harness::LinearizationReport rep = harness::linearization_check(
            problem, oracle, rel * problem.epsilon(), 8, 99);
        ratio_min = std::min(ratio_min, rep.max_ratio);
        ratio_max = std::max(ratio_max, rep.max_ratio);
        if (rel == 1e-5) linear_err = rep.max_linear_rel_err;
    }
    const double spread = ratio_max / ratio_min;
    report(4, spread <= 1.7 && linear_err <= 1e-6,
           "linearization: quadratic remainder stable, linear term equals -K_eps",
           "ratio spread " + fmt(spread) + ", linear rel err " + fmt(linear_err));
}

// --- criteria 6, 7 (and trace/coupling collection) ------------------------

void criteria_6_7() {
    const auto t0 = std::chrono::steady_clock::now();
    const double epsilon = 0.05;

    // Criterion 6: rates on seed 1 with the exact eigenbasis.
    const EotProblem problem = gauss_instance(60, 120, epsilon, 1);
    const harness::OracleSolution oracle = oracle_for("gauss2d/60x120/eps0.05/seed1",
                                                      problem);
    const Vector rhos = testing::dense_rhos(problem, oracle.potentials);

    std::vector<Index> ells{0, 2, 4, 8};
    std::vector<double> measured_rates;
    bool rates_ok = true;
    std::string rate_detail;
    for (Index ell : ells) {
        SpectralBasis basis;
        if (ell > 0) basis = testing::dense_svd_basis(problem, oracle.potentials, ell);

        Potentials pots{Vector::Zero(60), Vector::Zero(120)};
        std::vector<double> errors;
        for (int k = 0; k < 1500; ++k) {
            pots = sk_sweep(problem, pots);
            const double gauge = problem.alpha().weights().dot(pots.f);
            pots.f.array() -= gauge;
            pots.g.array() += gauge;
            if (ell > 0) {
                NewtonOutcome outcome = newton_step(problem, pots.f, basis);
                pots.f = std::move(outcome.f);
            }
            const double err = osc_norm(pots.f - oracle.potentials.f);
            // Stop above the measurement floor. Two effects flatten the tail
            // below ~2e-6 on this instance: the oracle's own error along the
            // worst mode (marginal residual 1e-14 over a Hessian eigenvalue
            // of ~3e-7), and Newton gains along near-null modes dropping
            // under the floating-point resolution of the semi-dual value.
            if (err < 3e-5) break;
            errors.push_back(err);
        }
        const double rate = estimate_contraction(errors);
        measured_rates.push_back(rate);
        const double target = rhos[ell] * rhos[ell]; // rho_{ell+1}, 0-indexed
        rates_ok = rates_ok && std::abs(rate - target) <= 0.05;
        rate_detail += (rate_detail.empty() ? "" : ", ") + std::string("l=") +
                       std::to_string(ell) + ": " + fmt(rate) + " vs " + fmt(target);
    }
    for (std::size_t i = 1; i < measured_rates.size(); ++i)
        rates_ok = rates_ok && measured_rates[i] < measured_rates[i - 1];
    const double elapsed6 = seconds_since(t0);
    report(6, rates_ok && elapsed6 < 60.0,
           "tail contraction matches rho_{l+1}^2 and decreases in l",
           rate_detail + ", " + fmt(elapsed6) + " s");

    // Criterion 7: iterations to omega = 1e-9, medians over 5 seeds.
    std::map<Index, std::vector<Index>> iteration_counts;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const std::string key =
            "gauss2d/60x120/eps0.05/seed" + std::to_string(seed);
        const EotProblem seed_problem = gauss_instance(60, 120, epsilon, seed);
        const harness::OracleSolution& seed_oracle = oracle_for(key, seed_problem);
        for (Index ell : ells) {
            SolverConfig config;
            config.tol_omega = 1e-9;
            config.max_iter = 20000;
            config.ell = ell;
            SpectralBasis basis;
            if (ell > 0)
                basis = testing::dense_svd_basis(seed_problem, seed_oracle.potentials,
                                                 ell);
            const SolveResult result =
                solve(seed_problem, config, ell > 0 ? &basis : nullptr);
            register_run(key, result);
            iteration_counts[ell].push_back(result.converged ? result.iterations
                                                             : config.max_iter);
        }
    }
    std::string count_detail;
    std::vector<Index> medians;
    for (Index ell : ells) {
        auto& counts = iteration_counts[ell];
        std::sort(counts.begin(), counts.end());
        medians.push_back(counts[2]);
        count_detail += (count_detail.empty() ? "" : ", ") + std::string("l=") +
                        std::to_string(ell) + ": " + std::to_string(counts[2]);
    }
    bool strictly_decreasing = true;
    for (std::size_t i = 1; i < medians.size(); ++i)
        strictly_decreasing = strictly_decreasing && medians[i] < medians[i - 1];
    report(7, strictly_decreasing, "median iterations-to-omega strictly decrease in l",
           count_detail);
}

// --- criterion 8 ----------------------------------------------------------

void criterion_8() {
    const std::vector<double> schedule{1.0, 0.5, 0.25, 0.125};
    std::map<std::string, std::vector<Index>> totals;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const EotProblem problem_template = gauss_instance(100, 200, 1.0, seed);
        for (const WarmMode mode :
             {WarmMode::none, WarmMode::potentials, WarmMode::spectral}) {
            SolverConfig config;
            config.tol_omega = 1e-9;
            config.ell = 8;
            const auto stages =
                anneal(problem_template, {schedule, mode, false}, config);
            Index total = 0;
            for (std::size_t s = 0; s < stages.size(); ++s) {
                total += stages[s].iterations;
                const std::string key = "gauss2d/100x200/eps" +
                                        io::format_double(schedule[s]) + "/seed" +
                                        std::to_string(seed);
                if (stages[s].converged) {
                    if (!oracle_cache.count(key))
                        oracle_for(key, problem_template.with_epsilon(schedule[s]));
                }
                register_run(key, stages[s]);
            }
            totals[harness::warm_mode_name(mode)].push_back(total);
        }
    }
    std::string detail;
    std::map<std::string, Index> median;
    for (auto& [mode, counts] : totals) {
        std::sort(counts.begin(), counts.end());
        median[mode] = counts[2];
        detail += (detail.empty() ? "" : ", ") + mode + ": " +
                  std::to_string(counts[2]);
    }
    report(8,
           median["spectral"] <= median["potentials"] &&
               median["potentials"] <= median["none"],
           "warm-start ordering spectral <= potentials <= none (median totals)",
           detail);
}

// --- criteria 5 and 9 over everything collected ----------------------------

void criterion_5() {
    double worst_drop = 0.0;
    std::size_t checked = 0;
    for (const auto& trace : all_traces) {
        for (std::size_t k = 1; k < trace.size(); ++k) {
            worst_drop = std::max(worst_drop, trace[k - 1].semi_dual_value -
                                                  trace[k].semi_dual_value);
            ++checked;
        }
    }
    report(5, worst_drop <= 1e-12,
           "semi-dual value non-decreasing along every trace",
           std::to_string(all_traces.size()) + " traces, " + std::to_string(checked) +
               " steps, worst drop " + fmt(worst_drop));
}

void criterion_9() {
    double worst_gap = 0.0;
    for (const auto& run : converged_runs) {
        const auto it = oracle_cache.find(run.key);
        if (it == oracle_cache.end()) continue;
        worst_gap = std::max(worst_gap, (run.coupling.plan - it->second.coupling.plan)
                                            .cwiseAbs()
                                            .maxCoeff());
    }
    report(9, worst_gap <= 1e-6,
           "converged couplings match the oracle in max norm",
           std::to_string(converged_runs.size()) + " runs, worst gap " +
               fmt(worst_gap));
}

// --- criterion 10 ----------------------------------------------------------

void criterion_10() {
    const EotProblem problem = gauss_instance(500, 1000, 0.1, 1);
    const EotProblem warm_problem = problem.with_epsilon(0.2);
    SolverConfig warm_config;
    warm_config.tol_omega = 1e-9;
    const SolveResult warm = solve(warm_problem, warm_config);
    const SpectralBasis basis =
        top_modes(build_operator(warm_problem, warm.potentials), 32, 1e-6);

    SolverConfig fixed;
    fixed.tol_omega = 1e-30; // run exactly max_iter iterations
    fixed.max_iter = 20;
    const SolveResult plain = solve(problem, fixed);
    SolverConfig accelerated = fixed;
    accelerated.ell = 32;
    const SolveResult sknr_run =
        solve(problem, accelerated, &basis, &warm.potentials);

    const auto median_time = [](const std::vector<IterationRecord>& trace) {
        std::vector<double> times;
        for (std::size_t k = 2; k < trace.size(); ++k)
            times.push_back(trace[k].wall_time_ms);
        std::sort(times.begin(), times.end());
        return times[times.size() / 2];
    };
    const double t_plain = median_time(plain.trace);
    const double t_sknr = median_time(sknr_run.trace);
    const double ratio = t_sknr / t_plain;
    report(10, ratio <= 3.0, "per-iteration cost of SK-NR(32) within 3x of SK",
           "SK " + fmt(t_plain) + " ms, SK-NR " + fmt(t_sknr) + " ms, ratio " +
               fmt(ratio));
}

// --- criterion 11 ----------------------------------------------------------

#ifndef SKNR_CLI_BINARY
#define SKNR_CLI_BINARY "sknr"
#endif

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void criterion_11() {
    const fs::path dir = fs::temp_directory_path() / "sknr_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);

    {
        std::ofstream csv(dir / "zero3x3.csv");
        csv << "0,0,0\n0,0,0\n0,0,0\n";
    }
    const std::string solve_command =
        std::string(SKNR_CLI_BINARY) + " solve --cost " +
        (dir / "zero3x3.csv").string() + " --epsilon 0.5 --out " +
        (dir / "out").string() + " > " + (dir / "log").string() + " 2>&1";
    const int solve_status = std::system(solve_command.c_str());

    bool outer_exact = false;
    if (solve_status == 0) {
        const Matrix plan =
            io::read_csv_matrix((dir / "out" / "coupling.csv").string());
        const double w = 1.0 / 3.0;
        outer_exact = true;
        for (Index i = 0; i < 3; ++i)
            for (Index j = 0; j < 3; ++j)
                outer_exact = outer_exact && plan(i, j) == w * w;
    }

    {
        std::ofstream config(dir / "config.json");
        config << R"({
  "experiment": "ell_sweep",
  "instance": {"family": "gauss2d", "n": 16, "m": 24},
  "seeds": [1],
  "solver": {"tol_omega": 1e-8, "max_iter": 20000},
  "epsilon": 0.2,
  "basis_from": 0.4,
  "ells": [0, 2],
  "output_dir": ")" << (dir / "exp").generic_string() << R"("
})";
    }
    const std::string experiment_command =
        std::string(SKNR_CLI_BINARY) + " experiment --config " +
        (dir / "config.json").string() + " >> " + (dir / "log").string() + " 2>&1";
    bool reruns_identical = false;
    if (std::system(experiment_command.c_str()) == 0) {
        const std::string first = slurp(dir / "exp" / "runs.csv");
        if (!first.empty() && std::system(experiment_command.c_str()) == 0)
            reruns_identical = slurp(dir / "exp" / "runs.csv") == first;
    }

    report(11, outer_exact && reruns_identical,
           "CLI: exact outer-product coupling, byte-identical experiment reruns",
           std::string("outer ") + (outer_exact ? "exact" : "DIFFERS") + ", reruns " +
               (reruns_identical ? "identical" : "DIFFER"));
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1();
    criteria_2_3();
    criterion_4();
    criteria_6_7();
    criterion_8();
    criterion_5();
    criterion_9();
    criterion_10();
    criterion_11();
    std::printf("%d criteria failed, total %.1f s\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
