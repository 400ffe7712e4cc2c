#include "sknr/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "sknr/harness/rng.hpp"

namespace sknr {

namespace {

void check_finite(const Vector& v, const char* what) {
    if (!v.allFinite())
        throw std::invalid_argument(std::string(what) + ": entries must be finite");
}

} // namespace

SinkhornOperator::SinkhornOperator(const EotProblem& problem, const Potentials& pots)
    : problem_(&problem), f_(pots.f), g_(pots.g) {
    if (f_.size() != problem.n() || g_.size() != problem.m())
        throw std::invalid_argument("SinkhornOperator: potential sizes mismatch");
    check_finite(f_, "SinkhornOperator(f)");
    check_finite(g_, "SinkhornOperator(g)");
    sqrt_alpha_ = problem.alpha().weights().cwiseSqrt();
    sqrt_beta_ = problem.beta().weights().cwiseSqrt();
}

Vector SinkhornOperator::apply_R(const Vector& g1) const {
    if (g1.size() != cols())
        throw std::invalid_argument("apply_R: length mismatch");
    const Matrix& cost = problem_->cost();
    const Vector& b = problem_->beta().weights();
    const double inv_eps = 1.0 / problem_->epsilon();
    Vector out = Vector::Zero(rows());
    for (Index j = 0; j < cols(); ++j) {
        const double* cj = cost.col(j).data();
        const double wj = b[j] * g1[j];
        const double gj = g_[j];
        for (Index i = 0; i < rows(); ++i)
            out[i] += std::exp((f_[i] + gj - cj[i]) * inv_eps) * wj;
    }
    return out;
}

Vector SinkhornOperator::apply_Rt(const Vector& f1) const {
    if (f1.size() != rows())
        throw std::invalid_argument("apply_Rt: length mismatch");
    const Matrix& cost = problem_->cost();
    const Vector& a = problem_->alpha().weights();
    const double inv_eps = 1.0 / problem_->epsilon();
    Vector out(cols());
    for (Index j = 0; j < cols(); ++j) {
        const double* cj = cost.col(j).data();
        const double gj = g_[j];
        double acc = 0.0;
        for (Index i = 0; i < rows(); ++i)
            acc += std::exp((f_[i] + gj - cj[i]) * inv_eps) * a[i] * f1[i];
        out[j] = acc;
    }
    return out;
}

std::pair<Vector, Vector> SinkhornOperator::apply_K(const Vector& f1, const Vector& g1) const {
    return {apply_R(g1), apply_Rt(f1)};
}

Matrix SinkhornOperator::apply_sym_block(const Matrix& v) const {
    if (v.rows() != cols())
        throw std::invalid_argument("apply_sym_block: row count mismatch");
    const Matrix& cost = problem_->cost();
    const double inv_eps = 1.0 / problem_->epsilon();
    const Index n = rows(), m = cols(), k = v.cols();
    Matrix out = Matrix::Zero(n, k);
    Vector w(n);
    for (Index j = 0; j < m; ++j) {
        const double* cj = cost.col(j).data();
        const double gj = g_[j];
        for (Index i = 0; i < n; ++i)
            w[i] = sqrt_alpha_[i] * std::exp((f_[i] + gj - cj[i]) * inv_eps);
        out.noalias() += w * (sqrt_beta_[j] * v.row(j));
    }
    return out;
}

Matrix SinkhornOperator::apply_sym_t_block(const Matrix& u) const {
    if (u.rows() != rows())
        throw std::invalid_argument("apply_sym_t_block: row count mismatch");
    const Matrix& cost = problem_->cost();
    const double inv_eps = 1.0 / problem_->epsilon();
    const Index n = rows(), m = cols(), k = u.cols();
    Matrix out(m, k);
    Vector w(n);
    for (Index j = 0; j < m; ++j) {
        const double* cj = cost.col(j).data();
        const double gj = g_[j];
        for (Index i = 0; i < n; ++i)
            w[i] = sqrt_alpha_[i] * std::exp((f_[i] + gj - cj[i]) * inv_eps);
        out.row(j) = sqrt_beta_[j] * (w.transpose() * u);
    }
    return out;
}

SinkhornOperator build_operator(const EotProblem& problem, const Potentials& pots) {
    return SinkhornOperator(problem, pots);
}

namespace {

// Orthonormalize columns and keep them orthogonal to u0. Householder QR
// handles rank-deficient blocks; the u0 projection is repeated because QR of
// a degenerate block may reintroduce that direction.
Matrix orthonormalize_deflated(Matrix x, const Vector& u0) {
    for (int round = 0; round < 3; ++round) {
        x.noalias() -= u0 * (u0.transpose() * x);
        Eigen::HouseholderQR<Matrix> qr(x);
        x = qr.householderQ() * Matrix::Identity(x.rows(), x.cols());
        if ((u0.transpose() * x).cwiseAbs().maxCoeff() < 1e-13) break;
    }
    return x;
}

} // namespace

SpectralBasis top_modes(const SinkhornOperator& op, Index ell, double tol,
                        Index max_power_iters) {
    const Index n = op.rows();
    if (ell < 1)
        throw std::invalid_argument("top_modes: ell must be >= 1");
    if (ell >= n)
        throw std::invalid_argument("top_modes: ell must be < n");
    if (max_power_iters < 0) max_power_iters = 500 * ell;

    const Vector sqrt_alpha = op.problem().alpha().weights().cwiseSqrt();
    const Index block = std::min<Index>(ell + 5, n - 1);

    // Deterministic start block.
    harness::SplitMix64 rng(0x73706563u); // fixed seed, independent of callers
    Matrix x(n, block);
    for (Index c = 0; c < block; ++c)
        for (Index i = 0; i < n; ++i)
            x(i, c) = rng.uniform(-1.0, 1.0);
    x = orthonormalize_deflated(std::move(x), sqrt_alpha);

    Matrix ritz_vectors;
    Vector ritz_values;
    double best_residual = std::numeric_limits<double>::infinity();

    for (Index sweep = 0; sweep < max_power_iters; ++sweep) {
        Matrix y = op.apply_sym_block(op.apply_sym_t_block(x));
        y.noalias() -= sqrt_alpha * (sqrt_alpha.transpose() * y);

        // Rayleigh-Ritz on the current orthonormal block.
        Matrix t = x.transpose() * y;
        t = 0.5 * (t + t.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> eig(t);
        if (eig.info() != Eigen::Success)
            throw EigensolverError("top_modes: dense Ritz solve failed", best_residual);

        // Eigen returns ascending order; take the top `ell` descending.
        Matrix w(block, ell);
        Vector theta(ell);
        for (Index a = 0; a < ell; ++a) {
            w.col(a) = eig.eigenvectors().col(block - 1 - a);
            theta[a] = eig.eigenvalues()[block - 1 - a];
        }
        Matrix xw = x * w;
        Matrix yw = y * w;
        double max_residual = 0.0;
        for (Index a = 0; a < ell; ++a)
            max_residual = std::max(max_residual, (yw.col(a) - theta[a] * xw.col(a)).norm());
        best_residual = std::min(best_residual, max_residual);

        if (max_residual <= tol) {
            ritz_vectors = std::move(xw);
            ritz_values = std::move(theta);
            break;
        }
        x = orthonormalize_deflated(std::move(y), sqrt_alpha);
    }

    if (ritz_vectors.size() == 0)
        throw EigensolverError("top_modes: no convergence within max_power_iters, best residual " +
                                   std::to_string(best_residual),
                               best_residual);

    SpectralBasis basis;
    basis.vectors_sym = orthonormalize_deflated(std::move(ritz_vectors), sqrt_alpha);
    basis.rhos = ritz_values.cwiseMax(0.0).cwiseSqrt();
    basis.vectors = basis.vectors_sym.array().colwise() / sqrt_alpha.array();
    basis.epsilon_built_at = op.problem().epsilon();
    return basis;
}

SpectrumReport spectrum_report(const EotProblem& problem, const Potentials& pots,
                               Index k, bool include_vectors, double tol,
                               Index max_power_iters) {
    if (k < 1 || k > std::min(problem.n(), problem.m()) - 1)
        throw std::invalid_argument("spectrum_report: need 1 <= k <= min(n,m)-1");
    const SinkhornOperator op = build_operator(problem, pots);
    const SpectralBasis basis = top_modes(op, k, tol, max_power_iters);

    SpectrumReport report;
    report.epsilon = problem.epsilon();
    report.rhos = basis.rhos;
    report.eigenvalues_of_K.reserve(k);
    report.hessian_eigs_low.resize(k);
    report.hessian_eigs_high.resize(k);
    for (Index a = 0; a < k; ++a) {
        const double rho = basis.rhos[a];
        report.eigenvalues_of_K.emplace_back(rho, -rho);
        report.hessian_eigs_low[a] = (1.0 - rho) / problem.epsilon();
        report.hessian_eigs_high[a] = (1.0 + rho) / problem.epsilon();
    }

    if (include_vectors) {
        // Right singular vectors v = Rt^T u / rho; near-null modes are left as
        // zero columns rather than dividing by a vanishing rho.
        const Vector sqrt_beta = problem.beta().weights().cwiseSqrt();
        Matrix v_sym = op.apply_sym_t_block(basis.vectors_sym);
        report.vectors_f = basis.vectors;
        report.vectors_g = Matrix::Zero(problem.m(), k);
        for (Index a = 0; a < k; ++a) {
            if (basis.rhos[a] > 1e-12)
                report.vectors_g.col(a) =
                    (v_sym.col(a) / basis.rhos[a]).array() / sqrt_beta.array();
        }
    }
    return report;
}

double projector_distance(const SpectralBasis& basis_a, const SpectralBasis& basis_b) {
    if (basis_a.vectors_sym.rows() != basis_b.vectors_sym.rows() ||
        basis_a.vectors_sym.cols() != basis_b.vectors_sym.cols())
        throw std::invalid_argument("projector_distance: dimension mismatch");
    // For equal dimensions ||P_A - P_B||_2 = sin(theta_max) = ||(I - A A^T) B||_2.
    // Computed via the cross Gram A^T B; this form stays exact near zero
    // distance, unlike sqrt(1 - sigma_min^2).
    const Matrix& a = basis_a.vectors_sym;
    const Matrix& b = basis_b.vectors_sym;
    const Matrix residual = b - a * (a.transpose() * b);
    Eigen::JacobiSVD<Matrix> svd(residual);
    return std::clamp(svd.singularValues().maxCoeff(), 0.0, 1.0);
}

} // namespace sknr
