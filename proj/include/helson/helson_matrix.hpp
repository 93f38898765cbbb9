#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "helson/dilation.hpp"
#include "helson/errors.hpp"
#include "helson/io.hpp"
#include "helson/sequence.hpp"
#include "helson/sieve.hpp"
#include "helson/symbol.hpp"

namespace helson {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr index_t kDenseAssemblyCap = 1024;

/// Truncated multiplicative Hankel matrix {alpha(n m)} over a window of
/// indices (1..N, or the d-smooth integers <= N under a prime budget).
/// Entry (i, j) corresponds to indices (indices()[i], indices()[j]).
class HelsonMatrix {
public:
    HelsonMatrix(Matrix entries, std::vector<index_t> indices, index_t N, std::string symbol_id,
                 PrimeBudget budget)
        : entries_(std::move(entries)),
          indices_(std::move(indices)),
          N_(N),
          symbol_id_(std::move(symbol_id)),
          budget_(budget) {}

    const Matrix& matrix() const noexcept { return entries_; }
    const std::vector<index_t>& indices() const noexcept { return indices_; }
    index_t N() const noexcept { return N_; }
    Eigen::Index size() const noexcept { return entries_.rows(); }
    const std::string& symbol_id() const noexcept { return symbol_id_; }
    const PrimeBudget& prime_budget() const noexcept { return budget_; }

    cplx operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

private:
    Matrix entries_;
    std::vector<index_t> indices_;
    index_t N_;
    std::string symbol_id_;
    PrimeBudget budget_;
};

namespace detail {
inline void check_products_in_sieve(index_t max_index) {
    const index_t limit = default_sieve().limit();
    if (max_index > 0 && max_index > limit / max_index)
        throw DomainError("window products up to " + std::to_string(max_index) + "^2 exceed sieve limit " +
                          std::to_string(limit));
}

inline void check_support_in_window(const Sequence& a, const std::vector<index_t>& window,
                                    const char* what) {
    for (const auto& [n, v] : a) {
        if (!std::binary_search(window.begin(), window.end(), n))
            throw DomainError(std::string(what) + ": index " + std::to_string(n) +
                              " lies outside the truncation window");
    }
}
}  // namespace detail

inline HelsonMatrix assemble(const Symbol& alpha, index_t N, const PrimeBudget& budget = std::nullopt) {
    if (N > kDenseAssemblyCap)
        throw DomainError("dense assembly is capped at N = " + std::to_string(kDenseAssemblyCap) +
                          "; use the matrix-free operator");
    detail::check_products_in_sieve(N);
    std::vector<index_t> idx = window_indices(N, budget);
    const auto n = static_cast<Eigen::Index>(idx.size());
    Matrix M(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j; i < n; ++i) {
            const cplx v = alpha(idx[i] * idx[j]);
            M(i, j) = v;
            M(j, i) = v;
        }
    }
    return HelsonMatrix(std::move(M), std::move(idx), N, alpha.id(), budget);
}

/// Matrix-free M_N(alpha): symbol values on the product set are cached once,
/// each product costs O(size^2) without storing the matrix.
class HelsonOperator {
public:
    HelsonOperator(const Symbol& alpha, index_t N, const PrimeBudget& budget = std::nullopt)
        : indices_(window_indices(N, budget)), N_(N) {
        detail::check_products_in_sieve(N);
        const index_t top = indices_.back() * indices_.back();
        values_.assign(top + 1, cplx{});
        for (std::size_t i = 0; i < indices_.size(); ++i)
            for (std::size_t j = i; j < indices_.size(); ++j) {
                const index_t k = indices_[i] * indices_[j];
                values_[k] = alpha(k);
            }
    }

    Eigen::Index rows() const noexcept { return static_cast<Eigen::Index>(indices_.size()); }
    Eigen::Index cols() const noexcept { return rows(); }
    const std::vector<index_t>& indices() const noexcept { return indices_; }
    index_t N() const noexcept { return N_; }

    Vector apply(const Vector& x) const {
        const Eigen::Index n = rows();
        Vector y = Vector::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            cplx s{};
            for (Eigen::Index j = 0; j < n; ++j) s += values_[indices_[i] * indices_[j]] * x[j];
            y[i] = s;
        }
        return y;
    }

    /// M(alpha)^* = M(conj alpha) since the matrix is symmetric.
    Vector apply_adjoint(const Vector& x) const {
        const Eigen::Index n = rows();
        Vector y = Vector::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            cplx s{};
            for (Eigen::Index j = 0; j < n; ++j) s += std::conj(values_[indices_[i] * indices_[j]]) * x[j];
            y[i] = s;
        }
        return y;
    }

private:
    std::vector<index_t> indices_;
    index_t N_;
    std::vector<cplx> values_;
};

/// result(m) = sum_n alpha(n m) a(n) over the window, without assembling.
inline Sequence apply(const Symbol& alpha, const Sequence& a, index_t N,
                      const PrimeBudget& budget = std::nullopt) {
    detail::check_products_in_sieve(N);
    const std::vector<index_t> idx = window_indices(N, budget);
    detail::check_support_in_window(a, idx, "apply");
    Sequence out;
    for (const index_t m : idx) {
        cplx s{};
        for (const auto& [n, v] : a) s += alpha(n * m) * v;
        out.set(m, s);
    }
    return out;
}

/// <M(alpha) a, b> = sum_{n,m} a(n) conj(b(m)) alpha(n m).
inline cplx form(const Symbol& alpha, const Sequence& a, const Sequence& b) {
    const index_t limit = default_sieve().limit();
    cplx s{};
    for (const auto& [n, an] : a)
        for (const auto& [m, bm] : b) {
            if (n > limit / m)
                throw DomainError("form product " + std::to_string(n) + "*" + std::to_string(m) +
                                  " exceeds sieve limit");
            s += an * std::conj(bm) * alpha(n * m);
        }
#ifndef NDEBUG
    {
        const Sequence c = dirichlet_convolve(a, b);
        cplx pair{};
        for (const auto& [k, ck] : c) pair += alpha(k) * ck;
        assert(std::abs(pair - s) <= 1e-9 * (1.0 + std::abs(s)));
    }
#endif
    return s;
}

/// alpha_r on [1, N^2]; assemble(alpha_r, N) = D_r assemble(alpha, N) D_r.
inline Sequence dilate_symbol(const Symbol& alpha, DilationParam r, index_t N) {
    detail::check_products_in_sieve(N);
    Sequence out;
    for (index_t n = 1; n <= N * N; ++n) {
        const cplx v = alpha(n);
        if (v != cplx{}) out.set(n, dilation_weight(r, n) * v);
    }
    return out;
}

/// Diagonal of D_r on a window.
inline Eigen::VectorXd dilation_diagonal(DilationParam r, const std::vector<index_t>& indices) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) d[static_cast<Eigen::Index>(i)] = dilation_weight(r, indices[i]);
    return d;
}

/// Row-major CSV, one quoted "re,im" cell per entry.
inline std::string to_csv(const Matrix& M) {
    std::string out;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out += ',';
            out += '"' + format_double(M(i, j).real()) + ',' + format_double(M(i, j).imag()) + '"';
        }
        out += '\n';
    }
    return out;
}

inline json header_json(const HelsonMatrix& H) {
    json j;
    j["schema"] = kSchemaVersion;
    j["N"] = H.N();
    j["symbol_id"] = H.symbol_id();
    j["prime_budget"] = H.prime_budget() ? json(*H.prime_budget()) : json(nullptr);
    j["indices"] = H.indices();
    return j;
}

}  // namespace helson
