#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "helson/errors.hpp"
#include "helson/helson_matrix.hpp"
#include "helson/io.hpp"
#include "helson/sequence.hpp"
#include "helson/spectral.hpp"
#include "helson/symbol.hpp"

namespace helson {

// ---------------------------------------------------------------------------
// Representations c = sum_k a_k * b_k

class Representation {
public:
    using Pair = std::pair<Sequence, Sequence>;

    Representation() = default;
    explicit Representation(std::vector<Pair> pairs) : pairs_(std::move(pairs)) {}

    void add(Sequence a, Sequence b) { pairs_.emplace_back(std::move(a), std::move(b)); }
    const std::vector<Pair>& pairs() const noexcept { return pairs_; }
    std::size_t size() const noexcept { return pairs_.size(); }

    Sequence value() const {
        Sequence c;
        for (const auto& [a, b] : pairs_) c += dirichlet_convolve(a, b);
        return c;
    }

    /// sum_k |a_k| |b_k|; an upper bound for |value()|_X.
    double cost() const {
        double s = 0.0;
        for (const auto& [a, b] : pairs_) s += a.norm() * b.norm();
        return s;
    }

private:
    std::vector<Pair> pairs_;
};

inline double rep_cost(const Representation& rep) { return rep.cost(); }

// ---------------------------------------------------------------------------
// Divisor classes of a window: entry (i, j) of an index-window matrix belongs
// to class n = idx[i] * idx[j].

class DivisorClasses {
public:
    explicit DivisorClasses(std::vector<index_t> window) : window_(std::move(window)) {
        std::map<index_t, std::vector<std::pair<Eigen::Index, Eigen::Index>>> by_product;
        for (std::size_t i = 0; i < window_.size(); ++i)
            for (std::size_t j = 0; j < window_.size(); ++j)
                by_product[window_[i] * window_[j]].emplace_back(static_cast<Eigen::Index>(i),
                                                                 static_cast<Eigen::Index>(j));
        for (auto& [n, cells] : by_product) {
            products_.push_back(n);
            cells_.push_back(std::move(cells));
        }
    }

    const std::vector<index_t>& window() const noexcept { return window_; }
    const std::vector<index_t>& products() const noexcept { return products_; }
    std::size_t count() const noexcept { return products_.size(); }
    const std::vector<std::pair<Eigen::Index, Eigen::Index>>& cells(std::size_t k) const { return cells_[k]; }
    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(window_.size()); }

    bool contains_product(index_t n) const {
        return std::binary_search(products_.begin(), products_.end(), n);
    }

    /// Class sums sum_{ij = n} X(i, j).
    std::vector<cplx> class_sums(const Matrix& X) const {
        std::vector<cplx> s(count());
        for (std::size_t k = 0; k < count(); ++k)
            for (const auto& [i, j] : cells_[k]) s[k] += X(i, j);
        return s;
    }

    /// Orthogonal projection onto {X : class_sums(X) = target}; each class is
    /// shifted uniformly by its mean discrepancy.
    Matrix project(Matrix X, const std::vector<cplx>& target) const {
        for (std::size_t k = 0; k < count(); ++k) {
            cplx s{};
            for (const auto& [i, j] : cells_[k]) s += X(i, j);
            const cplx shift = (target[k] - s) / static_cast<double>(cells_[k].size());
            for (const auto& [i, j] : cells_[k]) X(i, j) += shift;
        }
        return X;
    }

    std::vector<cplx> class_means(const Matrix& Y) const {
        std::vector<cplx> m(count());
        for (std::size_t k = 0; k < count(); ++k) {
            for (const auto& [i, j] : cells_[k]) m[k] += Y(i, j);
            m[k] /= static_cast<double>(cells_[k].size());
        }
        return m;
    }

    std::vector<cplx> targets(const Sequence& c) const {
        std::vector<cplx> t(count());
        for (std::size_t k = 0; k < count(); ++k) t[k] = c.at(products_[k]);
        return t;
    }

private:
    std::vector<index_t> window_;
    std::vector<index_t> products_;
    std::vector<std::vector<std::pair<Eigen::Index, Eigen::Index>>> cells_;
};

// ---------------------------------------------------------------------------
// X-norm on a window as a constrained nuclear-norm program

struct XNormConfig {
    double penalty = 1.0;
    double residual_tol = 1e-8;
    std::uint64_t max_iterations = 20000;
    double gap_tol = 1e-6;
};

struct XNormResult {
    double value = 0.0;
    Matrix matrix;
    std::vector<index_t> window;
    Sequence certificate;
    double dual_value = 0.0;
    double primal_dual_gap = 0.0;
    std::uint64_t iterations = 0;
    bool converged = true;
    index_t N = 0;
};

namespace detail {

inline double nuclear_norm(const Matrix& X) {
    if (X.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(X).singularValues().sum();
}

/// Singular-value soft-thresholding, the prox of tau |.|_*.
inline Matrix svt(const Matrix& A, double tau) {
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = std::max(s[i] - tau, 0.0);
    return svd.matrixU() * s.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
}

inline double spectral_norm_exact(const Matrix& M) {
    if (M.size() == 0 || M.isZero(0.0)) return 0.0;
    if (M.rows() <= kDenseSvdCap) return singular_values(M).front();
    return operator_norm(M, SpectralConfig{1e-12, 50000}).norm;
}

}  // namespace detail

/// min |X|_* subject to sum_{ij=n} X(i, j) = c(n) over every product class
/// n of the window (so c must vanish off the product set), solved by
/// alternating-direction splitting: exact affine projection, then
/// singular-value soft-thresholding. The dual variable, averaged over
/// classes and rescaled to |M_N(beta)| = 1, is the certificate beta.
inline XNormResult xnorm(const Sequence& c, index_t N, const XNormConfig& cfg = {},
                         const PrimeBudget& budget = std::nullopt) {
    detail::check_products_in_sieve(N);
    const DivisorClasses classes(window_indices(N, budget));
    XNormResult out;
    out.N = N;
    out.window = classes.window();
    const Eigen::Index n = classes.size();
    out.matrix = Matrix::Zero(n, n);
    for (const auto& [k, v] : c)
        if (!classes.contains_product(k))
            throw DomainError("xnorm: index " + std::to_string(k) +
                              " is not a product of two window indices");
    if (c.empty()) return out;
    if (!(cfg.penalty > 0.0)) throw DomainError("penalty parameter must be positive");

    const std::vector<cplx> target = classes.targets(c);
    const double scale = std::max(1.0, c.norm());
    const double rho = cfg.penalty;
    Matrix Z = Matrix::Zero(n, n);
    Matrix U = Matrix::Zero(n, n);
    out.converged = false;
    for (std::uint64_t it = 1; it <= cfg.max_iterations; ++it) {
        const Matrix X = classes.project(Z - U, target);
        const Matrix Zold = Z;
        Z = detail::svt(X + U, 1.0 / rho);
        U += X - Z;
        out.iterations = it;
        const double primal = (X - Z).norm();
        const double dual = rho * (Z - Zold).norm();
        if (primal <= cfg.residual_tol * scale && dual <= cfg.residual_tol * scale) {
            out.converged = true;
            break;
        }
    }

    out.matrix = classes.project(Z, target);
    out.value = detail::nuclear_norm(out.matrix);

    // Y = rho U is a subgradient of |.|_* at Z; its class means give y with
    // Re<y, c> = |Z|_* at optimality, and beta = conj(y) pairs bilinearly.
    const std::vector<cplx> y = classes.class_means(rho * U);
    Sequence beta;
    for (std::size_t k = 0; k < classes.count(); ++k) beta.set(classes.products()[k], std::conj(y[k]));
    const double bnorm = detail::spectral_norm_exact(assemble(Symbol(beta), N, budget).matrix());
    if (bnorm > 0.0) beta *= cplx{1.0 / bnorm};
    out.certificate = beta;
    out.dual_value = std::abs(bilinear_pair(beta, c));
    out.primal_dual_gap = std::max(0.0, out.value - out.dual_value);
    out.converged = out.converged && out.primal_dual_gap <= cfg.gap_tol * std::max(1.0, out.value);
    return out;
}

/// Representation read off an SVD of the window matrix: X = sum s_k u_k v_k^*
/// gives a_k = sqrt(s_k) u_k and b_k = sqrt(s_k) v_k, since a * b collects
/// a(i) conj(b(j)) over each class. Its cost equals |X|_*.
inline Representation representation_from_matrix(const Matrix& X, const std::vector<index_t>& window,
                                                  double drop_below = 0.0) {
    Representation rep;
    if (X.size() == 0) return rep;
    Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (!(s[k] > drop_below)) continue;
        const double root = std::sqrt(s[k]);
        Sequence a;
        Sequence b;
        for (std::size_t i = 0; i < window.size(); ++i) {
            a.set(window[i], root * svd.matrixU()(static_cast<Eigen::Index>(i), k));
            b.set(window[i], root * svd.matrixV()(static_cast<Eigen::Index>(i), k));
        }
        rep.add(std::move(a), std::move(b));
    }
    return rep;
}

/// True iff |M_N(beta)| <= 1 + 1e-6 and |(beta, c)| >= claimed - 1e-6, which
/// certifies |c|_X >= claimed - 1e-6 on the window.
inline bool xnorm_certificate_check(const Sequence& c, const Sequence& beta, double claimed, index_t N,
                                    const PrimeBudget& budget = std::nullopt) {
    if (beta.max_index() > N * N) throw DomainError("certificate support exceeds N^2");
    const double bnorm = detail::spectral_norm_exact(assemble(Symbol(beta), N, budget).matrix());
    return bnorm <= 1.0 + 1e-6 && std::abs(bilinear_pair(beta, c)) >= claimed - 1e-6;
}

struct DualityReport {
    double pairing = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
    double op_norm = 0.0;
    double xnorm = 0.0;
};

/// |(alpha, c)| against |M_N(alpha)| |c|_X on the window.
inline DualityReport duality_gap(const Symbol& alpha, const Sequence& c, index_t N,
                                 const XNormConfig& xcfg = {}, const PrimeBudget& budget = std::nullopt,
                                 const SpectralConfig& scfg = {}) {
    DualityReport rep;
    cplx pair{};
    for (const auto& [n, v] : c) pair += alpha(n) * v;
    rep.pairing = std::abs(pair);
    rep.op_norm = operator_norm(assemble(alpha, N, budget), scfg).norm;
    rep.xnorm = xnorm(c, N, xcfg, budget).value;
    rep.bound = rep.op_norm * rep.xnorm;
    if (rep.bound == 0.0) {
        if (rep.pairing > 0.0)
            throw std::logic_error("duality bound vanished while the pairing did not");
        return rep;
    }
    rep.ratio = rep.pairing / rep.bound;
    return rep;
}

/// c = v * u for the leading singular pair M_N(alpha) v = |M_N| u, which
/// attains (alpha, c) = |M_N(alpha)| with |c|_X <= 1.
inline Sequence dual_attaining_sequence(const Symbol& alpha, index_t N,
                                        const PrimeBudget& budget = std::nullopt,
                                        const SpectralConfig& cfg = {}) {
    const HelsonMatrix H = assemble(alpha, N, budget);
    const SpectralReport top = operator_norm(H, cfg);
    Sequence a;
    Sequence b;
    for (std::size_t i = 0; i < H.indices().size(); ++i) {
        a.set(H.indices()[i], top.right[static_cast<Eigen::Index>(i)]);
        b.set(H.indices()[i], top.left[static_cast<Eigen::Index>(i)]);
    }
    return dirichlet_convolve(a, b);
}

inline json to_json(const XNormResult& r) {
    return json{{"N", r.N},
                {"value", r.value},
                {"dual_value", r.dual_value},
                {"gap", r.primal_dual_gap},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"certificate", sequence_to_json(r.certificate)}};
}

// ---------------------------------------------------------------------------
// Splitting of l^2 sequences into finite blocks

/// A sequence with possibly infinite support, known through its values and a
/// bound on tail energy: tail_sq(m) >= sum_{n > m} |a(n)|^2, with
/// tail_sq(0) = |a|^2 exactly.
class TailSource {
public:
    using Values = std::function<cplx(index_t)>;
    using Tail = std::function<double(index_t)>;

    TailSource(Values values, Tail tail_sq, std::string id = "tail-source")
        : values_(std::move(values)), tail_sq_(std::move(tail_sq)), id_(std::move(id)) {}

    /// Finite sequence: exact tails, and splitting returns the sequence itself.
    static TailSource finite(const Sequence& s) {
        auto seq = std::make_shared<const Sequence>(s);
        TailSource t([seq](index_t n) { return seq->at(n); },
                     [seq](index_t m) {
                         double acc = 0.0;
                         for (auto it = seq->end(); it != seq->begin();) {
                             --it;
                             if (it->first <= m) break;
                             acc += std::norm(it->second);
                         }
                         return acc;
                     },
                     "finite");
        t.finite_ = seq;
        return t;
    }

    /// a(n) = scale * q^n for n >= 1, |q| < 1.
    static TailSource geometric(cplx scale, double q) {
        if (!(std::abs(q) < 1.0)) throw DomainError("geometric ratio must satisfy |q| < 1");
        const double q2 = q * q;
        return TailSource([scale, q](index_t n) { return scale * std::pow(q, static_cast<double>(n)); },
                          [scale, q2](index_t m) {
                              return std::norm(scale) * std::pow(q2, static_cast<double>(m + 1)) / (1.0 - q2);
                          },
                          "geometric");
    }

    cplx operator()(index_t n) const { return values_(n); }
    double tail_sq(index_t m) const { return tail_sq_(m); }
    double norm() const { return std::sqrt(tail_sq_(0)); }
    bool is_finite() const noexcept { return finite_ != nullptr; }
    const Sequence* finite_sequence() const noexcept { return finite_.get(); }

    /// Entries with index in (lo, hi].
    Sequence slice(index_t lo, index_t hi) const {
        Sequence s;
        if (finite_) {
            for (auto it = finite_->begin(); it != finite_->end(); ++it)
                if (it->first > lo && it->first <= hi) s.set(it->first, it->second);
            return s;
        }
        for (index_t n = lo + 1; n <= hi; ++n) s.set(n, values_(n));
        return s;
    }

private:
    Values values_;
    Tail tail_sq_;
    std::string id_;
    std::shared_ptr<const Sequence> finite_;
};

struct SplitConfig {
    /// Largest cut point searched before the tail bound is declared unusable.
    index_t max_cut = index_t{1} << 24;
};

/// Finite blocks a_j with disjoint index ranges such that sum_j a_j = a on
/// [1, window] and sum_j |a_j| < |a| + delta. Cut points m_k are the least
/// m with |a - a^m| <= 2^-k; the first block is a^{m_K} for the least K with
/// 2^{1-K} < delta, then a^{m_{k+1}} - a^{m_k} for k >= K until the window is
/// covered.
inline std::vector<Sequence> split_sequence(const TailSource& a, double delta, index_t window,
                                            const SplitConfig& cfg = {}) {
    if (!(delta > 0.0)) throw DomainError("split budget delta must be positive");
    if (window == 0) throw DomainError("split window must be at least 1");
    std::vector<Sequence> blocks;
    if (a.is_finite()) {
        Sequence s = a.finite_sequence()->truncated(window);
        if (!s.empty()) blocks.push_back(std::move(s));
        return blocks;
    }
    if (!(a.tail_sq(0) > 0.0)) return blocks;
    const double total = a.tail_sq(0);
    if (!std::isfinite(total)) throw DomainError("split_sequence: tail bound unavailable");

    int K = 0;
    while (std::ldexp(1.0, 1 - K) >= delta) ++K;

    index_t m = 0;
    auto cut_for = [&](int k) {
        const double bound = std::ldexp(1.0, -2 * k);
        while (a.tail_sq(m) > bound) {
            if (++m > cfg.max_cut)
                throw DomainError("split_sequence: tail bound unavailable below 2^-" + std::to_string(k));
        }
        return m;
    };

    index_t prev = std::min(cut_for(K), window);
    if (Sequence head = a.slice(0, prev); !head.empty()) blocks.push_back(std::move(head));
    for (int k = K + 1; prev < window; ++k) {
        if (a.tail_sq(prev) == 0.0) break;
        const index_t next = std::min(cut_for(k), window);
        if (Sequence blk = a.slice(prev, next); !blk.empty()) blocks.push_back(std::move(blk));
        prev = next;
    }
    return blocks;
}

/// Pairs (a_k, b_k) of possibly infinite sequences with finite total cost.
using SourceRepresentation = std::vector<std::pair<TailSource, TailSource>>;

inline double rep_cost(const SourceRepresentation& rep) {
    double s = 0.0;
    for (const auto& [a, b] : rep) s += a.norm() * b.norm();
    return s;
}

/// Finite representation of value(rep) restricted to [1, window] with cost
/// below rep_cost(rep) + eps. Each factor is split with budget delta_k such
/// that sum_k (|a_k| + delta_k)(|b_k| + delta_k) < sum_k |a_k||b_k| + eps, and
/// all block pairs (a_{k,j}, b_{k,l}) are kept.
inline Representation refine_representation(const SourceRepresentation& rep, double eps, index_t window,
                                             const SplitConfig& cfg = {}) {
    if (!(eps > 0.0)) throw DomainError("refinement budget eps must be positive");
    const double base = rep_cost(rep);
    if (eps <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, base))
        throw DomainError("refinement budget eps is below floating-point resolution of the cost");
    Representation out;
    for (std::size_t k = 0; k < rep.size(); ++k) {
        const auto& [a, b] = rep[k];
        const double na = a.norm();
        const double nb = b.norm();
        // delta (na + nb + delta) <= eps 2^-(k+2) keeps the total excess below eps / 2
        const double delta = std::min(1.0, std::ldexp(eps, -static_cast<int>(k) - 2) / (na + nb + 1.0));
        if (!(delta > 0.0)) throw DomainError("refinement budget underflows for pair " + std::to_string(k));
        const auto blocks_a = split_sequence(a, delta, window, cfg);
        const auto blocks_b = split_sequence(b, delta, window, cfg);
        for (const auto& aj : blocks_a)
            for (const auto& bl : blocks_b) out.add(aj, bl);
    }
    return out;
}

}  // namespace helson
