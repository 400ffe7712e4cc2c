#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sknr/core.hpp"
#include "sknr/harness/generators.hpp"
#include "sknr/harness/oracle.hpp"
#include "sknr/objective.hpp"
#include "sknr/solver.hpp"
#include "sknr/spectral.hpp"

namespace py = pybind11;
using namespace sknr;

namespace {

EotProblem make_problem(const Matrix& cost, const Vector& alpha, const Vector& beta,
                        double epsilon) {
    return EotProblem(CostMatrix(cost), DiscreteMeasure(alpha), DiscreteMeasure(beta),
                      epsilon);
}

SpectralBasis basis_from_parts(const Matrix& vectors, const Matrix& vectors_sym,
                               const Vector& rhos, double epsilon_built_at) {
    SpectralBasis basis;
    basis.vectors = vectors;
    basis.vectors_sym = vectors_sym;
    basis.rhos = rhos;
    basis.epsilon_built_at = epsilon_built_at;
    return basis;
}

} // namespace

PYBIND11_MODULE(_sknr, m) {
    m.doc() = "Accelerated Sinkhorn (SK-NR) solver for entropic optimal transport";

    py::class_<EotProblem>(m, "Problem")
        .def(py::init(&make_problem), py::arg("cost"), py::arg("alpha"),
             py::arg("beta"), py::arg("epsilon"))
        .def_property_readonly("n", &EotProblem::n)
        .def_property_readonly("m", &EotProblem::m)
        .def_property_readonly("epsilon", &EotProblem::epsilon)
        .def_property_readonly("cost", &EotProblem::cost)
        .def_property_readonly("alpha",
                               [](const EotProblem& p) { return p.alpha().weights(); })
        .def_property_readonly("beta",
                               [](const EotProblem& p) { return p.beta().weights(); })
        .def("with_epsilon", &EotProblem::with_epsilon, py::arg("epsilon"));

    py::class_<SpectralBasis>(m, "SpectralBasis")
        .def(py::init(&basis_from_parts), py::arg("vectors"), py::arg("vectors_sym"),
             py::arg("rhos"), py::arg("epsilon_built_at"))
        .def_readonly("vectors", &SpectralBasis::vectors)
        .def_readonly("vectors_sym", &SpectralBasis::vectors_sym)
        .def_readonly("rhos", &SpectralBasis::rhos)
        .def_readonly("epsilon_built_at", &SpectralBasis::epsilon_built_at);

    py::class_<IterationRecord>(m, "IterationRecord")
        .def_readonly("index", &IterationRecord::index)
        .def_readonly("marginal_error", &IterationRecord::marginal_error)
        .def_readonly("marginal_error_inf", &IterationRecord::marginal_error_inf)
        .def_readonly("semi_dual_value", &IterationRecord::semi_dual_value)
        .def_readonly("newton_attempted", &IterationRecord::newton_attempted)
        .def_readonly("newton_accepted", &IterationRecord::newton_accepted)
        .def_readonly("wall_time_ms", &IterationRecord::wall_time_ms);

    py::class_<SolveResult>(m, "SolveResult")
        .def_property_readonly("f", [](const SolveResult& r) { return r.potentials.f; })
        .def_property_readonly("g", [](const SolveResult& r) { return r.potentials.g; })
        .def_property_readonly("plan",
                               [](const SolveResult& r) { return r.coupling.plan; })
        .def_readonly("converged", &SolveResult::converged)
        .def_readonly("iterations", &SolveResult::iterations)
        .def_readonly("trace", &SolveResult::trace);

    m.def("log_sum_exp",
          [](const Vector& values, const Vector& log_weights) {
              return log_sum_exp({values.data(), static_cast<size_t>(values.size())},
                                 {log_weights.data(),
                                  static_cast<size_t>(log_weights.size())});
          },
          py::arg("values"), py::arg("log_weights"));

    m.def("ctransform_of_f", &ctransform_of_f, py::arg("problem"), py::arg("f"));
    m.def("ctransform_of_g", &ctransform_of_g, py::arg("problem"), py::arg("g"));
    m.def("coupling",
          [](const EotProblem& problem, const Vector& f, const Vector& g) {
              return coupling_from(problem, Potentials{f, g}).plan;
          },
          py::arg("problem"), py::arg("f"), py::arg("g"));
    m.def("marginal_error",
          [](const EotProblem& problem, const Matrix& plan) {
              return marginal_error(problem, Coupling{plan});
          },
          py::arg("problem"), py::arg("plan"));
    m.def("osc_norm", &osc_norm, py::arg("v"));

    m.def("dual_value",
          [](const EotProblem& problem, const Vector& f, const Vector& g) {
              return dual_value(problem, Potentials{f, g});
          },
          py::arg("problem"), py::arg("f"), py::arg("g"));
    m.def("semi_dual_value", &semi_dual_value, py::arg("problem"), py::arg("f"));
    m.def("semi_dual_gradient", &semi_dual_gradient, py::arg("problem"), py::arg("f"));
    m.def("semi_dual_hessian_quadform", &semi_dual_hessian_quadform,
          py::arg("problem"), py::arg("f"), py::arg("u"));

    m.def("top_modes",
          [](const EotProblem& problem, const Vector& f, const Vector& g, Index ell,
             double tol, Index max_power_iters) {
              const SinkhornOperator op = build_operator(problem, Potentials{f, g});
              return top_modes(op, ell, tol, max_power_iters);
          },
          py::arg("problem"), py::arg("f"), py::arg("g"), py::arg("ell"),
          py::arg("tol") = 1e-8, py::arg("max_power_iters") = -1);

    m.def("spectrum",
          [](const EotProblem& problem, const Vector& f, const Vector& g, Index k,
             bool vectors) {
              const SpectrumReport report =
                  spectrum_report(problem, Potentials{f, g}, k, vectors);
              py::dict out;
              out["epsilon"] = report.epsilon;
              out["rho"] = report.rhos;
              out["eigenvalues_of_K"] = report.eigenvalues_of_K;
              out["hessian_eigs_low"] = report.hessian_eigs_low;
              out["hessian_eigs_high"] = report.hessian_eigs_high;
              if (vectors) {
                  out["vectors_f"] = report.vectors_f;
                  out["vectors_g"] = report.vectors_g;
              }
              return out;
          },
          py::arg("problem"), py::arg("f"), py::arg("g"), py::arg("k"),
          py::arg("vectors") = false);

    m.def("solve",
          [](const EotProblem& problem, double tol, Index max_iter, Index ell,
             const SpectralBasis* basis, std::optional<std::pair<Vector, Vector>> init,
             bool trace) {
              SolverConfig config;
              config.tol_omega = tol;
              config.max_iter = max_iter;
              config.ell = ell;
              config.trace_enabled = trace;
              std::optional<Potentials> pots;
              if (init) pots = Potentials{init->first, init->second};
              return solve(problem, config, basis, pots ? &*pots : nullptr);
          },
          py::arg("problem"), py::arg("tol") = 1e-9, py::arg("max_iter") = 100000,
          py::arg("ell") = 0, py::arg("basis") = nullptr, py::arg("init") = py::none(),
          py::arg("trace") = true);

    m.def("anneal",
          [](const EotProblem& problem_template, const std::vector<double>& epsilons,
             const std::string& warm, Index ell, bool refresh_basis, double tol,
             Index max_iter) {
              AnnealSchedule schedule;
              schedule.epsilons = epsilons;
              schedule.refresh_basis = refresh_basis;
              if (warm == "none")
                  schedule.warm_mode = WarmMode::none;
              else if (warm == "potentials")
                  schedule.warm_mode = WarmMode::potentials;
              else if (warm == "spectral")
                  schedule.warm_mode = WarmMode::spectral;
              else
                  throw std::invalid_argument("warm must be none|potentials|spectral");
              SolverConfig config;
              config.tol_omega = tol;
              config.max_iter = max_iter;
              config.ell = ell;
              return anneal(problem_template, schedule, config);
          },
          py::arg("problem"), py::arg("epsilons"), py::arg("warm") = "spectral",
          py::arg("ell") = 8, py::arg("refresh_basis") = false, py::arg("tol") = 1e-9,
          py::arg("max_iter") = 100000);

    m.def("oracle_solve",
          [](const EotProblem& problem, double target_residual) {
              const harness::OracleSolution solution =
                  harness::oracle_solve(problem, target_residual);
              py::dict out;
              out["f"] = solution.potentials.f;
              out["g"] = solution.potentials.g;
              out["plan"] = solution.coupling.plan;
              out["residual"] = solution.residual;
              return out;
          },
          py::arg("problem"), py::arg("target_residual") = 1e-13);

    m.def("gaussian_cloud",
          [](Index count, const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov,
             std::uint64_t seed) {
              const harness::PointCloud cloud =
                  harness::gaussian_cloud(count, mean, cov, seed);
              return std::make_pair(cloud.points, cloud.weights.weights());
          },
          py::arg("count"), py::arg("mean"), py::arg("cov"), py::arg("seed"));

    m.def("sq_euclidean_cost",
          [](const Matrix& source, const Matrix& target) {
              const Index n = source.rows();
              const harness::PointCloud a{
                  source, DiscreteMeasure(Vector::Constant(n, 1.0 / n))};
              const harness::PointCloud b{
                  target,
                  DiscreteMeasure(Vector::Constant(target.rows(), 1.0 / target.rows()))};
              return harness::sq_euclidean_cost(a, b).entries();
          },
          py::arg("source"), py::arg("target"));

    m.attr("__version__") = "0.1.0";
}
