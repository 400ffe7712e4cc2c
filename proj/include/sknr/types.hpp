#ifndef SKNR_TYPES_HPP
#define SKNR_TYPES_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <utility>

namespace sknr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Strictly positive weights summing to 1 (absolute tolerance 1e-12).
/// Zero-mass support points are rejected rather than dropped so indices
/// stay aligned with the cost matrix.
class DiscreteMeasure {
public:
    explicit DiscreteMeasure(Vector weights);

    Index size() const { return weights_.size(); }
    const Vector& weights() const { return weights_; }
    const Vector& log_weights() const { return log_weights_; }

private:
    Vector weights_;
    Vector log_weights_;
};

/// n x m matrix of finite costs. Entries may be negative: shifting the cost
/// by a constant only shifts the potentials, so finiteness is the real
/// requirement.
class CostMatrix {
public:
    explicit CostMatrix(Matrix entries);

    Index rows() const { return entries_.rows(); }
    Index cols() const { return entries_.cols(); }
    const Matrix& entries() const { return entries_; }

private:
    Matrix entries_;
};

/// A discrete entropic OT instance: cost C, marginals (alpha, beta) and
/// regularization epsilon > 0 in the same units as the cost.
class EotProblem {
public:
    EotProblem(CostMatrix cost, DiscreteMeasure alpha, DiscreteMeasure beta,
               double epsilon);

    Index n() const { return cost_.rows(); }
    Index m() const { return cost_.cols(); }
    const Matrix& cost() const { return cost_.entries(); }
    const DiscreteMeasure& alpha() const { return alpha_; }
    const DiscreteMeasure& beta() const { return beta_; }
    double epsilon() const { return epsilon_; }

    /// Same instance at a different regularization (annealing stages).
    EotProblem with_epsilon(double epsilon) const {
        return EotProblem(cost_, alpha_, beta_, epsilon);
    }

private:
    CostMatrix cost_;
    DiscreteMeasure alpha_;
    DiscreteMeasure beta_;
    double epsilon_;
};

/// Dual pair (f, g). Defined modulo (f, g) <- (f + c, g - c); comparisons
/// must go through gauge_normalized / gauge_distance.
struct Potentials {
    Vector f;
    Vector g;
};

/// Transport plan with nonnegative entries.
struct Coupling {
    Matrix plan;
};

} // namespace sknr

#endif // SKNR_TYPES_HPP
