#include <doctest.h>

#include <array>
#include <cmath>

#include "sknr/core.hpp"
#include "support.hpp"

using namespace sknr;

TEST_SUITE("core") {

TEST_CASE("log_sum_exp basics") {
    const std::array<double, 2> zeros{0.0, 0.0};
    const std::array<double, 2> log_half{std::log(0.5), std::log(0.5)};
    CHECK(log_sum_exp(zeros, log_half) == doctest::Approx(0.0).epsilon(1e-15));

    const std::array<double, 2> big{1000.0, 1000.0};
    const std::array<double, 2> ones{0.0, 0.0};
    CHECK(log_sum_exp(big, ones) ==
          doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));

    // Shift handles huge inputs without overflow.
    const std::array<double, 2> huge{1e300, 1e300};
    CHECK(std::isfinite(log_sum_exp(huge, ones)));

    CHECK_THROWS_WITH_AS(log_sum_exp({}, {}), doctest::Contains("empty reduction"),
                         std::invalid_argument);
}

TEST_CASE("log_sum_exp matches extended-precision brute force") {
    const std::array<double, 3> values{0.3, -0.7, 1.1};
    const double lw = std::log(1.0 / 3.0);
    const std::array<double, 3> log_weights{lw, lw, lw};

    // Brute force in long double, max-shifted the same way.
    long double acc = 0.0L;
    for (int i = 0; i < 3; ++i)
        acc += expl(static_cast<long double>(values[i]) + static_cast<long double>(lw) -
                    (1.1L + lw));
    const double brute = static_cast<double>(1.1L + lw + logl(acc));
    const double got = log_sum_exp(values, log_weights);
    CHECK(std::abs(got - brute) <= 2.0 * std::ldexp(1.0, -52));
    // Value frozen from a 40-digit computation.
    CHECK(got == doctest::Approx(0.4804922094646261770).epsilon(1e-15));
}

TEST_CASE("ctransform_of_f zero cost and shift equivariance") {
    harness::SplitMix64 rng(11);
    const EotProblem zero(CostMatrix(Matrix::Zero(3, 4)),
                          testing::random_measure(rng, 3),
                          testing::random_measure(rng, 4), 0.7);
    const Vector g0 = ctransform_of_f(zero, Vector::Zero(3));
    CHECK(g0.cwiseAbs().maxCoeff() <= 1e-14);

    const EotProblem problem = testing::random_problem(rng, 5, 7, 0.3);
    const Vector f = testing::random_vector(rng, 5);
    const double c = 0.83;
    const Vector base = ctransform_of_f(problem, f);
    const Vector shifted = ctransform_of_f(problem, f.array() + c);
    const double scale = base.cwiseAbs().maxCoeff() + std::abs(c);
    CHECK(((shifted - (base.array() - c).matrix()).cwiseAbs().maxCoeff()) <=
          1e-12 * scale);
}

TEST_CASE("ctransform pair on the symmetric 2x2 instance") {
    const EotProblem problem = testing::symmetric_2x2();
    // Direct high-precision evaluation: g_j = -log(0.5 (1 + e^-1)) for both j,
    // frozen from a 40-digit computation; f of that g returns exactly zero.
    const double g_expected = 0.3798854930417224754;
    const Vector g = ctransform_of_f(problem, Vector::Zero(2));
    CHECK(g[0] == doctest::Approx(g_expected).epsilon(1e-15));
    CHECK(g[1] == doctest::Approx(g_expected).epsilon(1e-15));
    const Vector f = ctransform_of_g(problem, g);
    CHECK(f.cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("ctransform_of_g mirrors ctransform_of_f") {
    harness::SplitMix64 rng(12);
    const EotProblem zero(CostMatrix(Matrix::Zero(4, 3)),
                          testing::random_measure(rng, 4),
                          testing::random_measure(rng, 3), 1.2);
    CHECK(ctransform_of_g(zero, Vector::Zero(3)).cwiseAbs().maxCoeff() <= 1e-14);

    const EotProblem problem = testing::random_problem(rng, 6, 4, 0.5);
    const Vector g = testing::random_vector(rng, 4);
    const double c = -1.4;
    const Vector base = ctransform_of_g(problem, g);
    const Vector shifted = ctransform_of_g(problem, g.array() + c);
    const double scale = base.cwiseAbs().maxCoeff() + std::abs(c);
    CHECK(((shifted - (base.array() - c).matrix()).cwiseAbs().maxCoeff()) <=
          1e-12 * scale);

    // Transposing the problem swaps the two transforms.
    const EotProblem transposed(CostMatrix(problem.cost().transpose()),
                                problem.beta(), problem.alpha(), problem.epsilon());
    const Vector via_f = ctransform_of_f(transposed, g);
    CHECK((via_f - base).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("coupling_from independent plan and gauge invariance") {
    harness::SplitMix64 rng(13);
    const DiscreteMeasure alpha = testing::random_measure(rng, 3);
    const DiscreteMeasure beta = testing::random_measure(rng, 5);
    const EotProblem zero(CostMatrix(Matrix::Zero(3, 5)), alpha, beta, 0.9);
    const Coupling plan =
        coupling_from(zero, Potentials{Vector::Zero(3), Vector::Zero(5)});
    const Matrix outer = alpha.weights() * beta.weights().transpose();
    CHECK((plan.plan - outer).cwiseAbs().maxCoeff() == 0.0);

    // Exactly representable shift on integer potentials: bit-for-bit equal.
    const EotProblem problem = testing::random_problem(rng, 4, 4, 1.0);
    Potentials ints{Vector::Zero(4), Vector::Zero(4)};
    ints.f << 1.0, -2.0, 0.0, 3.0;
    ints.g << 2.0, 0.0, -1.0, 1.0;
    const Coupling a = coupling_from(problem, ints);
    const Coupling b = coupling_from(
        problem, Potentials{ints.f.array() + 2.0, ints.g.array() - 2.0});
    CHECK((a.plan - b.plan).cwiseAbs().maxCoeff() == 0.0);

    // Generic shift: 1e-13 relative.
    const Potentials pots{testing::random_vector(rng, 4), testing::random_vector(rng, 4)};
    const double c = 0.123456789;
    const Coupling p = coupling_from(problem, pots);
    const Coupling q = coupling_from(
        problem, Potentials{pots.f.array() + c, pots.g.array() - c});
    CHECK((p.plan - q.plan).cwiseAbs().maxCoeff() <= 1e-13 * p.plan.maxCoeff());
}

TEST_CASE("coupling at the 2x2 optimum satisfies both marginals") {
    const EotProblem problem = testing::symmetric_2x2();
    const Potentials opt = testing::symmetric_2x2_optimum();
    const Coupling plan = coupling_from(problem, opt);
    const Vector row = plan.plan.rowwise().sum();
    const Vector col = plan.plan.colwise().sum().transpose();
    CHECK((row - problem.alpha().weights()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((col - problem.beta().weights()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("marginal_error") {
    harness::SplitMix64 rng(14);
    const DiscreteMeasure alpha = testing::random_measure(rng, 4);
    const DiscreteMeasure beta = testing::random_measure(rng, 6);
    const EotProblem problem(CostMatrix(Matrix::Zero(4, 6)), alpha, beta, 1.0);

    const Coupling outer{alpha.weights() * beta.weights().transpose()};
    CHECK(marginal_error(problem, outer) <= 1e-15);

    const Coupling doubled{2.0 * outer.plan};
    CHECK(marginal_error(problem, doubled) ==
          doctest::Approx(alpha.weights().norm() + beta.weights().norm())
              .epsilon(1e-13));

    // After the g-update the beta marginal is exact by construction.
    const EotProblem random_problem = testing::random_problem(rng, 5, 7, 0.4);
    const Vector f = testing::random_vector(rng, 5);
    const Vector g = ctransform_of_f(random_problem, f);
    const PlanMarginals marginals = plan_marginals(random_problem, Potentials{f, g});
    CHECK((marginals.col - random_problem.beta().weights()).cwiseAbs().maxCoeff() <=
          1e-12);
    CHECK((marginals.row - random_problem.alpha().weights()).cwiseAbs().maxCoeff() >
          1e-6);
}

TEST_CASE("osc_norm") {
    CHECK(osc_norm(Vector::Constant(5, 3.7)) == 0.0);
    Vector v(3);
    v << 0.0, 3.0, 1.0;
    CHECK(osc_norm(v) == 3.0);
    CHECK(osc_norm(v.array() + 123.25) == 3.0);
    CHECK_THROWS_AS(osc_norm(Vector()), std::invalid_argument);
}

TEST_CASE("column exactness holds for any f") {
    harness::SplitMix64 rng(15);
    for (int rep = 0; rep < 10; ++rep) {
        const EotProblem problem = testing::random_problem(rng, 6, 5, 0.2 + rng.uniform01());
        const Vector f = testing::random_vector(rng, 6, 2.0);
        const Vector g = ctransform_of_f(problem, f);
        const Coupling plan = coupling_from(problem, Potentials{f, g});
        const Vector col = plan.plan.colwise().sum().transpose();
        CHECK((col - problem.beta().weights()).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("overflow safety at small epsilon and large costs") {
    harness::SplitMix64 rng(16);
    Matrix cost(6, 7);
    for (Index j = 0; j < 7; ++j)
        for (Index i = 0; i < 6; ++i) cost(i, j) = 1e4 * rng.uniform01();
    const EotProblem problem(CostMatrix(std::move(cost)),
                             testing::random_measure(rng, 6),
                             testing::random_measure(rng, 7), 1e-3);
    const Vector f = Vector::Zero(6);
    const Vector g = ctransform_of_f(problem, f);
    CHECK(g.allFinite());
    const Vector f2 = ctransform_of_g(problem, g);
    CHECK(f2.allFinite());
    const Coupling plan = coupling_from(problem, Potentials{f2, g});
    CHECK(plan.plan.allFinite());
    CHECK(std::isfinite(marginal_error(problem, plan)));
}

TEST_CASE("gauge helpers") {
    harness::SplitMix64 rng(17);
    const EotProblem problem = testing::random_problem(rng, 5, 4, 1.0);
    Potentials pots{testing::random_vector(rng, 5), testing::random_vector(rng, 4)};
    const Potentials normalized = gauge_normalized(problem, pots);
    CHECK(std::abs(problem.alpha().weights().dot(normalized.f)) <= 1e-14);
    const Potentials shifted{pots.f.array() + 5.5, pots.g.array() - 5.5};
    CHECK(gauge_distance(problem, pots, shifted) <= 1e-13);
}

TEST_CASE("measure and problem invariants are enforced") {
    Vector bad(2);
    bad << 0.5, 0.0;
    CHECK_THROWS_AS(DiscreteMeasure{bad}, std::invalid_argument);
    Vector off(2);
    off << 0.5, 0.4;
    CHECK_THROWS_AS(DiscreteMeasure{off}, std::invalid_argument);
    Matrix inf_cost = Matrix::Zero(2, 2);
    inf_cost(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(CostMatrix{inf_cost}, std::invalid_argument);
    const Vector half = Vector::Constant(2, 0.5);
    CHECK_THROWS_AS(EotProblem(CostMatrix(Matrix::Zero(2, 3)), DiscreteMeasure(half),
                               DiscreteMeasure(half), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(EotProblem(CostMatrix(Matrix::Zero(2, 2)), DiscreteMeasure(half),
                               DiscreteMeasure(half), 0.0),
                    std::invalid_argument);
}

} // TEST_SUITE
