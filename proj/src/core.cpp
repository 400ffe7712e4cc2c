#include "sknr/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sknr {

double log_sum_exp(std::span<const double> values, std::span<const double> log_weights) {
    if (values.empty() || log_weights.empty())
        throw std::invalid_argument("log_sum_exp: empty reduction");
    if (values.size() != log_weights.size())
        throw std::invalid_argument("log_sum_exp: length mismatch");

    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i)
        shift = std::max(shift, values[i] + log_weights[i]);
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        total += std::exp(values[i] + log_weights[i] - shift);
    return shift + std::log(total);
}

namespace {

void check_length(const Vector& v, Index expected, const char* what) {
    if (v.size() != expected)
        throw std::invalid_argument(std::string(what) + ": length mismatch");
    if (!v.allFinite())
        throw std::invalid_argument(std::string(what) + ": entries must be finite");
}

} // namespace

Vector ctransform_of_f(const EotProblem& problem, const Vector& f) {
    check_length(f, problem.n(), "ctransform_of_f");
    const Matrix& cost = problem.cost();
    const Vector& la = problem.alpha().log_weights();
    const double inv_eps = 1.0 / problem.epsilon();
    const Index n = problem.n(), m = problem.m();

    Vector g(m);
    for (Index j = 0; j < m; ++j) {
        const double* cj = cost.col(j).data();
        double shift = -std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n; ++i)
            shift = std::max(shift, la[i] + (f[i] - cj[i]) * inv_eps);
        double total = 0.0;
        for (Index i = 0; i < n; ++i)
            total += std::exp(la[i] + (f[i] - cj[i]) * inv_eps - shift);
        g[j] = -problem.epsilon() * (shift + std::log(total));
    }
    return g;
}

Vector ctransform_of_g(const EotProblem& problem, const Vector& g) {
    check_length(g, problem.m(), "ctransform_of_g");
    const Matrix& cost = problem.cost();
    const Vector& lb = problem.beta().log_weights();
    const double inv_eps = 1.0 / problem.epsilon();
    const Index n = problem.n(), m = problem.m();

    // Row-wise reductions done in two column-major passes to stay contiguous.
    Vector shift = Vector::Constant(n, -std::numeric_limits<double>::infinity());
    for (Index j = 0; j < m; ++j) {
        const double* cj = cost.col(j).data();
        const double base = lb[j] + g[j] * inv_eps;
        for (Index i = 0; i < n; ++i)
            shift[i] = std::max(shift[i], base - cj[i] * inv_eps);
    }
    Vector total = Vector::Zero(n);
    for (Index j = 0; j < m; ++j) {
        const double* cj = cost.col(j).data();
        const double base = lb[j] + g[j] * inv_eps;
        for (Index i = 0; i < n; ++i)
            total[i] += std::exp(base - cj[i] * inv_eps - shift[i]);
    }
    Vector f(n);
    for (Index i = 0; i < n; ++i)
        f[i] = -problem.epsilon() * (shift[i] + std::log(total[i]));
    return f;
}

Coupling coupling_from(const EotProblem& problem, const Potentials& pots) {
    check_length(pots.f, problem.n(), "coupling_from(f)");
    check_length(pots.g, problem.m(), "coupling_from(g)");
    const Matrix& cost = problem.cost();
    const Vector& a = problem.alpha().weights();
    const Vector& b = problem.beta().weights();
    const double inv_eps = 1.0 / problem.epsilon();
    const Index n = problem.n(), m = problem.m();

    Matrix plan(n, m);
    for (Index j = 0; j < m; ++j) {
        const double* cj = cost.col(j).data();
        double* pj = plan.col(j).data();
        const double gj = pots.g[j];
        const double bj = b[j];
        for (Index i = 0; i < n; ++i)
            pj[i] = a[i] * bj * std::exp((pots.f[i] + gj - cj[i]) * inv_eps);
    }
    return Coupling{std::move(plan)};
}

double marginal_error(const EotProblem& problem, const Coupling& coupling) {
    if (coupling.plan.rows() != problem.n() || coupling.plan.cols() != problem.m())
        throw std::invalid_argument("marginal_error: plan shape mismatch");
    const Vector row = coupling.plan.rowwise().sum();
    const Vector col = coupling.plan.colwise().sum().transpose();
    return (row - problem.alpha().weights()).norm() +
           (col - problem.beta().weights()).norm();
}

double osc_norm(const Vector& v) {
    if (v.size() == 0)
        throw std::invalid_argument("osc_norm: empty input");
    return v.maxCoeff() - v.minCoeff();
}

PlanMarginals plan_marginals(const EotProblem& problem, const Potentials& pots) {
    check_length(pots.f, problem.n(), "plan_marginals(f)");
    check_length(pots.g, problem.m(), "plan_marginals(g)");
    const Matrix& cost = problem.cost();
    const Vector& a = problem.alpha().weights();
    const Vector& b = problem.beta().weights();
    const double inv_eps = 1.0 / problem.epsilon();
    const Index n = problem.n(), m = problem.m();

    PlanMarginals out{Vector::Zero(n), Vector::Zero(m)};
    for (Index j = 0; j < m; ++j) {
        const double* cj = cost.col(j).data();
        const double gj = pots.g[j];
        const double bj = b[j];
        double colsum = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double w = a[i] * bj * std::exp((pots.f[i] + gj - cj[i]) * inv_eps);
            out.row[i] += w;
            colsum += w;
        }
        out.col[j] = colsum;
    }
    return out;
}

MarginalGap marginal_gap(const EotProblem& problem, const PlanMarginals& marginals) {
    const Vector dr = marginals.row - problem.alpha().weights();
    const Vector dc = marginals.col - problem.beta().weights();
    return MarginalGap{dr.norm() + dc.norm(),
                       dr.cwiseAbs().maxCoeff() + dc.cwiseAbs().maxCoeff()};
}

Potentials gauge_normalized(const EotProblem& problem, Potentials pots) {
    const double c = problem.alpha().weights().dot(pots.f);
    pots.f.array() -= c;
    pots.g.array() += c;
    return pots;
}

double gauge_distance(const EotProblem& problem, const Potentials& a, const Potentials& b) {
    const Potentials na = gauge_normalized(problem, a);
    const Potentials nb = gauge_normalized(problem, b);
    const double df = (na.f - nb.f).cwiseAbs().maxCoeff();
    const double dg = (na.g - nb.g).cwiseAbs().maxCoeff();
    return std::max(df, dg);
}

} // namespace sknr
