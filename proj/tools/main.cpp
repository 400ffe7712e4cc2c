// sknr: log-domain Sinkhorn / SK-NR solver front-end.
//
// Subcommands: solve, spectrum, anneal, experiment. Exit codes: 0 success
// (solve/anneal: converged), 1 input error, 2 max_iter reached,
// 3 eigensolver non-convergence.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "sknr/core.hpp"
#include "sknr/harness/experiments.hpp"
#include "sknr/harness/oracle.hpp"
#include "sknr/io.hpp"
#include "sknr/solver.hpp"
#include "sknr/spectral.hpp"

namespace fs = std::filesystem;
using namespace sknr;

namespace {

struct InstanceFlags {
    std::string synthetic;
    std::vector<std::string> points; // SRC TGT
    std::string cost_file;
    std::string alpha_file;
    std::string beta_file;
    std::uint64_t seed = 1;
    Index n = 200;
    Index m = 400;
    double noise = 0.05;
    double r_in = 0.5, r_out = 1.0, side = 2.0;
};

void add_instance_flags(CLI::App* cmd, InstanceFlags& flags) {
    cmd->add_option("--synthetic", flags.synthetic,
                    "Named generator: gauss2d | two_moons | annulus_square");
    cmd->add_option("--points", flags.points,
                    "Source and target point-cloud CSVs (squared Euclidean cost)")
        ->expected(2);
    cmd->add_option("--cost", flags.cost_file, "Cost matrix CSV");
    cmd->add_option("--alpha", flags.alpha_file, "Source weights CSV (with --cost)");
    cmd->add_option("--beta", flags.beta_file, "Target weights CSV (with --cost)");
    cmd->add_option("--seed", flags.seed, "Generator seed (synthetic instances)");
    cmd->add_option("--n", flags.n, "Source size (synthetic instances)");
    cmd->add_option("--m", flags.m, "Target size (synthetic instances)");
    cmd->add_option("--noise", flags.noise, "two_moons noise level");
    cmd->add_option("--r-in", flags.r_in, "annulus inner radius");
    cmd->add_option("--r-out", flags.r_out, "annulus outer radius");
    cmd->add_option("--side", flags.side, "square side length");
}

EotProblem load_instance(const InstanceFlags& flags, double epsilon) {
    const int sources = (!flags.synthetic.empty() ? 1 : 0) +
                        (!flags.points.empty() ? 1 : 0) +
                        (!flags.cost_file.empty() ? 1 : 0);
    if (sources != 1)
        throw std::invalid_argument(
            "exactly one of --synthetic, --points, --cost is required");

    if (!flags.synthetic.empty()) {
        harness::InstanceSpec spec;
        spec.family = flags.synthetic;
        spec.n = flags.n;
        spec.m = flags.m;
        spec.noise = flags.noise;
        spec.r_in = flags.r_in;
        spec.r_out = flags.r_out;
        spec.side = flags.side;
        return harness::make_instance(spec, epsilon, flags.seed);
    }
    if (!flags.points.empty()) {
        bool renorm_src = false, renorm_tgt = false;
        const harness::PointCloud source = io::read_point_cloud(flags.points[0], &renorm_src);
        const harness::PointCloud target = io::read_point_cloud(flags.points[1], &renorm_tgt);
        if (renorm_src)
            std::cerr << "warning: " << flags.points[0]
                      << ": weights renormalized to sum to 1\n";
        if (renorm_tgt)
            std::cerr << "warning: " << flags.points[1]
                      << ": weights renormalized to sum to 1\n";
        return EotProblem(harness::sq_euclidean_cost(source, target), source.weights,
                          target.weights, epsilon);
    }
    const Matrix cost = io::read_csv_matrix(flags.cost_file);
    Vector alpha_w, beta_w;
    if (!flags.alpha_file.empty()) {
        alpha_w = io::read_csv_vector(flags.alpha_file);
    } else {
        alpha_w = Vector::Constant(cost.rows(), 1.0 / static_cast<double>(cost.rows()));
    }
    if (!flags.beta_file.empty()) {
        beta_w = io::read_csv_vector(flags.beta_file);
    } else {
        beta_w = Vector::Constant(cost.cols(), 1.0 / static_cast<double>(cost.cols()));
    }
    const auto normalize = [](Vector& w, const std::string& name) {
        const double total = w.sum();
        if (std::abs(total - 1.0) > 1e-9) {
            std::cerr << "warning: " << name << ": weights renormalized to sum to 1\n";
            w /= total;
        }
    };
    normalize(alpha_w, "alpha");
    normalize(beta_w, "beta");
    return EotProblem(CostMatrix(cost), DiscreteMeasure(alpha_w),
                      DiscreteMeasure(beta_w), epsilon);
}

void print_summary(const SolveResult& result, double marginal) {
    std::printf("converged=%s iters=%lld marginal_error=%.17e\n",
                result.converged ? "true" : "false",
                static_cast<long long>(result.iterations), marginal);
}

int cmd_solve(const InstanceFlags& flags, double epsilon, double tol, Index max_iter,
              Index ell, std::optional<double> basis_from, const std::string& out_dir,
              bool trace_enabled) {
    const EotProblem problem = load_instance(flags, epsilon);

    SolverConfig config;
    config.tol_omega = tol;
    config.max_iter = max_iter;
    config.ell = ell;
    config.trace_enabled = trace_enabled;

    std::optional<SpectralBasis> basis;
    std::optional<Potentials> init;
    if (ell > 0) {
        const double warm_eps = basis_from.value_or(epsilon);
        const EotProblem warm_problem = problem.with_epsilon(warm_eps);
        SolverConfig warm_config = config;
        warm_config.ell = 0;
        const SolveResult warm = solve(warm_problem, warm_config);
        basis = top_modes(build_operator(warm_problem, warm.potentials), ell);
        if (basis_from) init = warm.potentials; // spectral warm start
    }

    const SolveResult result = solve(problem, config, basis ? &*basis : nullptr,
                                     init ? &*init : nullptr);

    fs::create_directories(out_dir);
    io::write_potentials_csv((fs::path(out_dir) / "potentials.csv").string(),
                             result.potentials);
    io::write_csv_matrix((fs::path(out_dir) / "coupling.csv").string(),
                         result.coupling.plan);
    if (trace_enabled)
        io::write_trace_csv((fs::path(out_dir) / "trace.csv").string(), result.trace);

    print_summary(result, marginal_error(problem, result.coupling));
    return result.converged ? 0 : 2;
}

int cmd_spectrum(const InstanceFlags& flags, const std::vector<double>& epsilons,
                 Index k, bool vectors, const std::string& out_dir) {
    if (epsilons.empty()) throw std::invalid_argument("--epsilons is required");
    fs::create_directories(out_dir);
    for (std::size_t idx = 0; idx < epsilons.size(); ++idx) {
        const EotProblem problem = load_instance(flags, epsilons[idx]);
        const harness::OracleSolution anchor = harness::oracle_solve(problem, 1e-12);
        const SpectrumReport report =
            spectrum_report(problem, anchor.potentials, k, vectors);
        char name[64];
        std::snprintf(name, sizeof(name), "spectrum_%03zu.json", idx);
        io::write_spectrum_json((fs::path(out_dir) / name).string(), report, k);
        std::printf("epsilon=%.17g rho_1=%.17g file=%s\n", epsilons[idx],
                    report.rhos[0], name);
    }
    return 0;
}

int cmd_anneal(const InstanceFlags& flags, const std::vector<double>& schedule,
               const std::string& warm, Index ell, bool refresh_basis, double tol,
               Index max_iter, const std::string& out_dir) {
    if (schedule.empty()) throw std::invalid_argument("--schedule is required");
    const EotProblem problem_template = load_instance(flags, schedule.front());

    AnnealSchedule anneal_schedule;
    anneal_schedule.epsilons = schedule;
    anneal_schedule.refresh_basis = refresh_basis;
    if (warm == "none")
        anneal_schedule.warm_mode = WarmMode::none;
    else if (warm == "potentials")
        anneal_schedule.warm_mode = WarmMode::potentials;
    else if (warm == "spectral")
        anneal_schedule.warm_mode = WarmMode::spectral;
    else
        throw std::invalid_argument("--warm must be none, potentials or spectral");

    SolverConfig config;
    config.tol_omega = tol;
    config.max_iter = max_iter;
    config.ell = ell;

    const std::vector<SolveResult> stages =
        anneal(problem_template, anneal_schedule, config);

    fs::create_directories(out_dir);
    bool all_converged = true;
    for (std::size_t s = 0; s < stages.size(); ++s) {
        char name[64];
        std::snprintf(name, sizeof(name), "stage_%02zu_potentials.csv", s);
        io::write_potentials_csv((fs::path(out_dir) / name).string(),
                                 stages[s].potentials);
        std::printf("stage=%zu epsilon=%.17g converged=%s iters=%lld\n", s, schedule[s],
                    stages[s].converged ? "true" : "false",
                    static_cast<long long>(stages[s].iterations));
        all_converged = all_converged && stages[s].converged;
    }
    io::write_anneal_csv((fs::path(out_dir) / "anneal_trace.csv").string(), schedule,
                         stages);
    return all_converged ? 0 : 2;
}

int cmd_experiment(const std::string& config_path) {
    std::string out_dir;
    const harness::ExperimentSpec spec =
        io::parse_experiment_config(config_path, &out_dir);

    // FNV-1a of the config bytes: identical configs map to identical outputs.
    std::ifstream in(config_path, std::ios::binary);
    std::uint64_t hash = 1469598103934665603ull;
    for (std::istreambuf_iterator<char> it(in), end; it != end; ++it)
        hash = (hash ^ static_cast<unsigned char>(*it)) * 1099511628211ull;

    const harness::ExperimentResult result = harness::run_experiment(spec);
    fs::create_directories(out_dir);
    if (!result.runs.empty() || spec.kind != harness::ExperimentKind::spectrum_sweep)
        io::write_table_csv((fs::path(out_dir) / "runs.csv").string(), result.runs);
    if (!result.spectrum.empty())
        io::write_table_csv((fs::path(out_dir) / "spectrum.csv").string(),
                            result.spectrum);
    if (!result.timings.empty())
        io::write_table_csv((fs::path(out_dir) / "timings.csv").string(),
                            result.timings);
    std::printf("config_hash=%016llx rows=%zu\n",
                static_cast<unsigned long long>(hash), result.runs.rows.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sknr: accelerated Sinkhorn solver for entropic optimal transport"};
    app.require_subcommand(1);

    // solve
    InstanceFlags solve_flags;
    double solve_eps = 1.0, solve_tol = 1e-9;
    Index solve_max_iter = 100000, solve_ell = 0;
    double basis_from_value = 0.0;
    std::string solve_out = ".";
    bool no_trace = false;
    CLI::App* solve_cmd = app.add_subcommand("solve", "Run SK / SK-NR on one instance");
    add_instance_flags(solve_cmd, solve_flags);
    solve_cmd->add_option("--epsilon", solve_eps, "Regularization")->required();
    solve_cmd->add_option("--tol", solve_tol, "Marginal-error tolerance omega");
    solve_cmd->add_option("--max-iter", solve_max_iter, "Iteration cap");
    solve_cmd->add_option("--ell", solve_ell, "Newton subspace dimension");
    CLI::Option* basis_opt = solve_cmd->add_option(
        "--basis-from", basis_from_value,
        "Build the basis (and warm start) from the solution at this epsilon");
    solve_cmd->add_option("--out", solve_out, "Output directory");
    solve_cmd->add_flag("--no-trace", no_trace, "Skip the per-iteration trace file");

    // spectrum
    InstanceFlags spectrum_flags;
    std::vector<double> spectrum_epsilons;
    Index spectrum_k = 10;
    bool spectrum_vectors = false;
    std::string spectrum_out = ".";
    CLI::App* spectrum_cmd =
        app.add_subcommand("spectrum", "Eigen-structure reports across epsilons");
    add_instance_flags(spectrum_cmd, spectrum_flags);
    spectrum_cmd->add_option("--epsilons", spectrum_epsilons, "Comma list of epsilons")
        ->required()
        ->delimiter(',');
    spectrum_cmd->add_option("--k", spectrum_k, "Number of modes");
    spectrum_cmd->add_flag("--vectors", spectrum_vectors, "Export eigenvectors");
    spectrum_cmd->add_option("--out", spectrum_out, "Output directory");

    // anneal
    InstanceFlags anneal_flags;
    std::vector<double> anneal_schedule;
    std::string anneal_warm = "none";
    Index anneal_ell = 8;
    bool anneal_refresh = false;
    double anneal_tol = 1e-9;
    Index anneal_max_iter = 100000;
    std::string anneal_out = ".";
    CLI::App* anneal_cmd =
        app.add_subcommand("anneal", "Epsilon-annealing with warm starts");
    add_instance_flags(anneal_cmd, anneal_flags);
    anneal_cmd->add_option("--schedule", anneal_schedule, "Decreasing epsilon list")
        ->required()
        ->delimiter(',');
    anneal_cmd->add_option("--warm", anneal_warm, "none | potentials | spectral");
    anneal_cmd->add_option("--ell", anneal_ell, "Newton subspace dimension (spectral)");
    anneal_cmd->add_flag("--refresh-basis", anneal_refresh,
                         "Rebuild the basis at every stage");
    anneal_cmd->add_option("--tol", anneal_tol, "Marginal-error tolerance omega");
    anneal_cmd->add_option("--max-iter", anneal_max_iter, "Iteration cap per stage");
    anneal_cmd->add_option("--out", anneal_out, "Output directory");

    // experiment
    std::string experiment_config;
    CLI::App* experiment_cmd =
        app.add_subcommand("experiment", "Run a JSON-configured experiment");
    experiment_cmd->add_option("--config", experiment_config, "RunConfig JSON file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed())
            return cmd_solve(solve_flags, solve_eps, solve_tol, solve_max_iter,
                             solve_ell,
                             *basis_opt ? std::optional<double>(basis_from_value)
                                        : std::nullopt,
                             solve_out, !no_trace);
        if (spectrum_cmd->parsed())
            return cmd_spectrum(spectrum_flags, spectrum_epsilons, spectrum_k,
                                spectrum_vectors, spectrum_out);
        if (anneal_cmd->parsed())
            return cmd_anneal(anneal_flags, anneal_schedule, anneal_warm, anneal_ell,
                              anneal_refresh, anneal_tol, anneal_max_iter, anneal_out);
        if (experiment_cmd->parsed()) return cmd_experiment(experiment_config);
    } catch (const EigensolverError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
