#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "helson/errors.hpp"
#include "helson/helson_matrix.hpp"
#include "helson/io.hpp"
#include "helson/symbol.hpp"

namespace helson {

inline constexpr Eigen::Index kDenseSvdCap = 512;

template <class Op>
concept LinearOperator = requires(const Op& A, const Vector& x) {
    { A.rows() } -> std::convertible_to<Eigen::Index>;
    { A.cols() } -> std::convertible_to<Eigen::Index>;
    { A.apply(x) } -> std::convertible_to<Vector>;
    { A.apply_adjoint(x) } -> std::convertible_to<Vector>;
};

/// Non-owning LinearOperator view of a dense matrix.
class DenseOperator {
public:
    explicit DenseOperator(const Matrix& M) : M_(&M) {}
    Eigen::Index rows() const noexcept { return M_->rows(); }
    Eigen::Index cols() const noexcept { return M_->cols(); }
    Vector apply(const Vector& x) const { return (*M_) * x; }
    Vector apply_adjoint(const Vector& x) const { return M_->adjoint() * x; }
    bool is_zero() const { return M_->isZero(0.0); }

private:
    const Matrix* M_;
};

struct SpectralConfig {
    double tol = 1e-10;
    std::uint64_t max_iterations = 50000;
};

/// Leading singular triple: A v ~= norm * u, A^* u ~= norm * v.
struct SpectralReport {
    double norm = 0.0;
    Vector left;
    Vector right;
    std::uint64_t iterations = 0;
    /// max(|A v - norm u|, |A^* u - norm v|).
    double residual = 0.0;
};

namespace detail {

inline Vector deterministic_start(Eigen::Index n, int attempt) {
    if (attempt == 0) return Vector::Constant(n, cplx{1.0 / std::sqrt(static_cast<double>(n))});
    // fixed-seed fallback for operators that annihilate the all-ones vector
    Vector v(n);
    std::uint64_t s = 0x243f6a8885a308d3ULL + static_cast<std::uint64_t>(attempt);
    for (Eigen::Index i = 0; i < n; ++i) {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        const double re = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        const double im = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
        v[i] = {re, im};
    }
    return v / v.norm();
}

/// First basis vector with a nonzero image, or an empty vector if A = 0.
template <LinearOperator Op>
Vector first_live_basis_vector(const Op& A) {
    const Eigen::Index n = A.cols();
    for (Eigen::Index i = 0; i < n; ++i) {
        Vector e = Vector::Zero(n);
        e[i] = 1.0;
        if (A.apply(e).norm() > 0.0) return e;
    }
    return {};
}

}  // namespace detail

/// Largest singular value by power iteration on A^* A from the normalized
/// all-ones vector. Stops when the pair residual drops below tol * norm, or
/// when an Aitken extrapolation of the monotone norm estimates predicts a
/// remaining change below tol * norm / 100 (slow vector convergence under a
/// near-tie of the top singular values). The returned norm is |A v| for a
/// unit v, hence never above the true norm.
template <LinearOperator Op>
SpectralReport operator_norm(const Op& A, const SpectralConfig& cfg = {}) {
    if (!(cfg.tol > 0.0 && cfg.tol <= 1e-4)) throw DomainError("norm tolerance must lie in (0, 1e-4]");
    const Eigen::Index n = A.cols();
    SpectralReport rep;
    if (n == 0 || A.rows() == 0) return rep;

    Vector v;
    Vector w;
    double sigma = 0.0;
    for (int attempt = 0; attempt < 3 && sigma == 0.0; ++attempt) {
        v = detail::deterministic_start(n, attempt);
        w = A.apply(v);
        sigma = w.norm();
    }
    if (!std::isfinite(sigma)) throw DomainError("operator has non-finite entries");
    if (sigma == 0.0) {
        v = detail::first_live_basis_vector(A);
        if (v.size() == 0) {
            rep.right = detail::deterministic_start(n, 0);
            rep.left = detail::deterministic_start(A.rows(), 0);
            return rep;
        }
        w = A.apply(v);
        sigma = w.norm();
    }

    double prev1 = -1.0;
    double prev2 = -1.0;
    double residual = std::numeric_limits<double>::infinity();
    Vector u;
    for (std::uint64_t it = 1; it <= cfg.max_iterations; ++it) {
        u = w / sigma;
        Vector z = A.apply_adjoint(u);
        residual = (z - sigma * v).norm();
        rep.iterations = it;
        if (residual <= cfg.tol * sigma) break;

        if (it >= 20 && prev2 >= 0.0) {
            const double d1 = sigma - prev1;
            const double d2 = prev1 - prev2;
            if (d1 >= 0.0 && d2 > d1) {
                const double ratio = d1 / d2;
                if (d1 * ratio / (1.0 - ratio) <= 1e-2 * cfg.tol * sigma) break;
            } else if (std::abs(d1) <= 4.0 * std::numeric_limits<double>::epsilon() * sigma &&
                       std::abs(d2) <= 4.0 * std::numeric_limits<double>::epsilon() * sigma &&
                       residual <= std::sqrt(cfg.tol) * sigma) {
                // estimates stalled at rounding level; the value has converged
                break;
            }
        }
        if (it == cfg.max_iterations)
            throw ConvergenceError("power iteration did not converge in " + std::to_string(it) +
                                       " iterations (residual " + format_double(residual) + ")",
                                   sigma);

        prev2 = prev1;
        prev1 = sigma;
        v = z / z.norm();
        w = A.apply(v);
        sigma = w.norm();
    }
    rep.norm = sigma;
    rep.left = u;
    rep.right = v;
    rep.residual = residual;
    return rep;
}

inline SpectralReport operator_norm(const Matrix& M, const SpectralConfig& cfg = {}) {
    const DenseOperator op(M);
    if (op.is_zero()) {
        SpectralReport rep;
        rep.right = detail::deterministic_start(M.cols(), 0);
        rep.left = detail::deterministic_start(M.rows(), 0);
        return rep;
    }
    return operator_norm(op, cfg);
}

inline SpectralReport operator_norm(const HelsonMatrix& H, const SpectralConfig& cfg = {}) {
    return operator_norm(H.matrix(), cfg);
}

/// All singular values, descending (dense SVD).
inline std::vector<double> singular_values(const Matrix& M) {
    if (M.rows() > kDenseSvdCap || M.cols() > kDenseSvdCap)
        throw DomainError("dense SVD is capped at size " + std::to_string(kDenseSvdCap));
    if (M.size() == 0) return {};
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& s = svd.singularValues();
    return std::vector<double>(s.data(), s.data() + s.size());
}

/// Leading singular triple from a dense Hermitian eigensolve of M^* M (used
/// inside solvers where the power iteration's fixed start would be
/// wasteful). The value is recomputed as |M v| to keep full relative accuracy.
inline SpectralReport leading_pair_dense(const Matrix& M) {
    SpectralReport rep;
    const Eigen::SelfAdjointEigenSolver<Matrix> es(M.adjoint() * M);
    rep.right = es.eigenvectors().col(M.cols() - 1);
    const Vector w = M * rep.right;
    rep.norm = w.norm();
    rep.left = rep.norm > 0.0 ? Vector(w / rep.norm) : Vector(Vector::Zero(M.rows()));
    rep.residual = (M.adjoint() * rep.left - rep.norm * rep.right).norm();
    return rep;
}

struct L2LowerBound {
    double op_norm = 0.0;
    double l2_norm = 0.0;
    /// <M a, e_1> for a = conj(alpha) / |alpha| on the window; equals l2_norm.
    double witness = 0.0;
    bool ok = false;
};

/// |M_N(alpha)| >= |(alpha(n))_{n in window}|, witnessed by the pair
/// a = conj(alpha)/|alpha|, b = e_1.
inline L2LowerBound l2_lower_bound_check(const Symbol& alpha, index_t N,
                                         const PrimeBudget& budget = std::nullopt,
                                         const SpectralConfig& cfg = {}) {
    const HelsonMatrix H = assemble(alpha, N, budget);
    L2LowerBound out;
    out.op_norm = operator_norm(H, cfg).norm;
    Sequence restricted;
    for (const index_t n : H.indices()) restricted.set(n, alpha(n));
    out.l2_norm = restricted.norm();
    if (out.l2_norm > 0.0) {
        const Sequence a = (1.0 / out.l2_norm) * restricted.conj();
        out.witness = std::abs(form(alpha, a, Sequence::delta(1)));
    }
    out.ok = out.op_norm >= out.l2_norm - 1e-9;
    return out;
}

inline json to_json(const SpectralReport& r) {
    return json{{"norm", r.norm}, {"residual", r.residual}, {"iterations", r.iterations}};
}

}  // namespace helson
