#include "sknr/types.hpp"

#include <cmath>

namespace sknr {

DiscreteMeasure::DiscreteMeasure(Vector weights) : weights_(std::move(weights)) {
    if (weights_.size() == 0)
        throw std::invalid_argument("DiscreteMeasure: empty weight vector");
    for (Index i = 0; i < weights_.size(); ++i) {
        const double w = weights_[i];
        if (!std::isfinite(w) || w <= 0.0)
            throw std::invalid_argument(
                "DiscreteMeasure: weights must be strictly positive and finite");
    }
    const double total = weights_.sum();
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
    // Scalar std::log, not Eigen's vectorized path: log weights must cancel
    // bitwise against std::log inside the log-sum-exp reductions.
    log_weights_.resize(weights_.size());
    for (Index i = 0; i < weights_.size(); ++i)
        log_weights_[i] = std::log(weights_[i]);
}

CostMatrix::CostMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.cols() < 1)
        throw std::invalid_argument("CostMatrix: need at least a 1x1 matrix");
    if (!entries_.allFinite())
        throw std::invalid_argument("CostMatrix: entries must be finite");
}

EotProblem::EotProblem(CostMatrix cost, DiscreteMeasure alpha, DiscreteMeasure beta,
                       double epsilon)
    : cost_(std::move(cost)),
      alpha_(std::move(alpha)),
      beta_(std::move(beta)),
      epsilon_(epsilon) {
    if (alpha_.size() != cost_.rows() || beta_.size() != cost_.cols())
        throw std::invalid_argument("EotProblem: measure sizes must match cost shape");
    if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_))
        throw std::invalid_argument("EotProblem: epsilon must be positive");
}

} // namespace sknr
