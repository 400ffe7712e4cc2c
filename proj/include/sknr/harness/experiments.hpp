#ifndef SKNR_HARNESS_EXPERIMENTS_HPP
#define SKNR_HARNESS_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sknr/harness/generators.hpp"
#include "sknr/solver.hpp"

namespace sknr::harness {

enum class ExperimentKind { ell_sweep, anneal_compare, spectrum_sweep };

/// Synthetic instance family. gauss2d uses the fixed cloud parameters
/// source N((0,0), I) and target N((4,4), [[1,-0.8],[-0.8,1]]).
struct InstanceSpec {
    std::string family = "gauss2d"; // gauss2d | two_moons | annulus_square
    Index n = 60;
    Index m = 120;
    double noise = 0.05;                          // two_moons
    double r_in = 0.5, r_out = 1.0, side = 2.0;   // annulus_square
};

EotProblem make_instance(const InstanceSpec& spec, double epsilon, std::uint64_t seed);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::ell_sweep;
    InstanceSpec instance;
    std::vector<std::uint64_t> seeds;
    SolverConfig solver;
    // ell_sweep
    double epsilon = 0.05;
    std::vector<Index> ells;
    double basis_from = 0.1;
    // anneal_compare
    std::vector<double> schedule;
    std::vector<WarmMode> warm_modes;
    Index ell = 8;
    bool refresh_basis = false;
    // spectrum_sweep
    std::vector<double> epsilons;
    Index k = 10;
};

/// Long-format table with preformatted cells (17 significant digits for
/// floats) so emission is byte-stable.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    bool empty() const { return rows.empty(); }
};

struct ExperimentResult {
    Table runs;     // per-iteration rows, deterministic
    Table spectrum; // spectrum_sweep rows, deterministic
    Table timings;  // wall-time rows; not byte-stable across reruns
};

/// Paired runs across configurations with shared seeds. The SKNR_THREADS
/// environment variable caps worker parallelism (default 1); output order
/// is independent of scheduling.
ExperimentResult run_experiment(const ExperimentSpec& spec);

const char* warm_mode_name(WarmMode mode);

} // namespace sknr::harness

#endif // SKNR_HARNESS_EXPERIMENTS_HPP
