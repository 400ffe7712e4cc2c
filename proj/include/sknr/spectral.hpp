#ifndef SKNR_SPECTRAL_HPP
#define SKNR_SPECTRAL_HPP

#include <vector>

#include "sknr/types.hpp"

namespace sknr {

/// Matrix-free view of the Sinkhorn linearization K_eps anchored at a pair of
/// potentials. In plain coordinates
///   (R g1)_i    = sum_j exp((f_i + g_j - C_ij)/eps) beta_j g1_j ,
///   (R^T f1)_j  = sum_i exp((f_i + g_j - C_ij)/eps) alpha_i f1_i ,
///   K(f1 + g1)  = (R g1) + (R^T f1) blockwise.
/// The operator is well defined at any anchor; the Perron identities
/// R 1 = 1, R^T 1 = 1 hold only when (f, g) satisfy the Sinkhorn equations.
class SinkhornOperator {
public:
    SinkhornOperator(const EotProblem& problem, const Potentials& pots);

    Index rows() const { return problem_->n(); }
    Index cols() const { return problem_->m(); }
    const EotProblem& problem() const { return *problem_; }
    const Vector& f() const { return f_; }
    const Vector& g() const { return g_; }

    Vector apply_R(const Vector& g1) const;
    Vector apply_Rt(const Vector& f1) const;
    /// K applied to the block vector f1 + g1; returns (R g1, R^T f1).
    std::pair<Vector, Vector> apply_K(const Vector& f1, const Vector& g1) const;

    /// Symmetrized block Rt = D_sqrt(alpha) M D_sqrt(beta), applied to blocks
    /// of vectors (columns). Used by the iterative eigensolver.
    Matrix apply_sym_block(const Matrix& v) const;    // n x k <- m x k
    Matrix apply_sym_t_block(const Matrix& u) const;  // m x k <- n x k

private:
    const EotProblem* problem_;
    Vector f_, g_;
    Vector sqrt_alpha_, sqrt_beta_;
};

/// Orthonormal low-frequency directions of K_eps. `vectors_sym` holds the
/// left singular vectors of the symmetrized block (Euclidean-orthonormal,
/// orthogonal to sqrt(alpha)); `vectors` is the same basis mapped back to
/// potential coordinates (componentwise division by sqrt(alpha)), hence
/// orthonormal in L2(alpha) and alpha-mean-zero.
struct SpectralBasis {
    Matrix vectors;        // n x ell, potential coordinates
    Matrix vectors_sym;    // n x ell, symmetrized coordinates
    Vector rhos;           // ell, decreasing, in [0, 1)
    double epsilon_built_at = 0.0;

    Index ell() const { return vectors.cols(); }
    Index dim() const { return vectors.rows(); }
};

/// Thrown by top_modes when the residual target is not met; carries the best
/// residual reached so callers can report it.
class EigensolverError : public std::runtime_error {
public:
    EigensolverError(const std::string& msg, double best_residual)
        : std::runtime_error(msg), best_residual_(best_residual) {}
    double best_residual() const { return best_residual_; }

private:
    double best_residual_;
};

SinkhornOperator build_operator(const EotProblem& problem, const Potentials& pots);

/// Top ell singular triplets of the symmetrized block after deflating the
/// Perron direction sqrt(alpha), by block subspace iteration on Rt Rt^T with
/// 5 oversampling vectors and re-orthonormalization each sweep. Residual
/// criterion: ||Rt Rt^T u - rho^2 u|| <= tol per returned pair.
SpectralBasis top_modes(const SinkhornOperator& op, Index ell, double tol = 1e-8,
                        Index max_power_iters = -1);

/// Eigen-structure summary of K_eps at the given anchor: mirrored +-rho pairs
/// and the induced scaled Hessian eigenvalues (1 -+ rho)/eps. With vectors,
/// carries both blocks of each K-eigenvector in potential coordinates (the
/// -rho eigenvector is the +rho one with the f block negated).
struct SpectrumReport {
    double epsilon = 0.0;
    Vector rhos;                          // k, decreasing
    std::vector<std::pair<double, double>> eigenvalues_of_K; // (+rho, -rho)
    Vector hessian_eigs_low;              // (1 - rho)/eps, increasing
    Vector hessian_eigs_high;             // (1 + rho)/eps, decreasing
    Matrix vectors_f;                     // n x k, optional (0x0 when absent)
    Matrix vectors_g;                     // m x k, optional
};

SpectrumReport spectrum_report(const EotProblem& problem, const Potentials& pots,
                               Index k, bool include_vectors = false,
                               double tol = 1e-8, Index max_power_iters = -1);

/// Operator 2-norm of the difference of the orthogonal projectors onto the
/// two column spaces (equal dimensions), via singular values of the cross
/// Gram matrix in symmetrized coordinates.
double projector_distance(const SpectralBasis& basis_a, const SpectralBasis& basis_b);

} // namespace sknr

#endif // SKNR_SPECTRAL_HPP
