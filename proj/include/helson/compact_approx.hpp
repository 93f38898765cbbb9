#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "helson/dilation.hpp"
#include "helson/errors.hpp"
#include "helson/helson_matrix.hpp"
#include "helson/io.hpp"
#include "helson/spectral.hpp"
#include "helson/symbol.hpp"

namespace helson {

/// Nonnegative weights summing to one, aligned with an r-grid.
class ConvexWeights {
public:
    ConvexWeights() = default;
    explicit ConvexWeights(std::vector<double> w) : w_(std::move(w)) {
        double s = 0.0;
        for (const double x : w_) {
            if (!(x >= 0.0)) throw DomainError("convex weights must be nonnegative");
            s += x;
        }
        if (w_.empty() || std::abs(s - 1.0) > 1e-12) throw DomainError("convex weights must sum to 1");
    }
    const std::vector<double>& values() const noexcept { return w_; }
    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t k) const { return w_[k]; }

private:
    std::vector<double> w_;
};

/// Euclidean projection onto the probability simplex (sort-and-threshold).
inline std::vector<double> project_to_simplex(const std::vector<double>& x) {
    std::vector<double> s = x;
    std::sort(s.begin(), s.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        cumsum += s[i];
        const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (s[i] - t > 0.0) theta = t;
    }
    std::vector<double> out(x.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) total += (out[i] = std::max(x[i] - theta, 0.0));
    for (double& v : out) v /= total;
    return out;
}

namespace detail {
inline void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("r-grid must be nonempty");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        DilationParam{grid[k]};
        if (k > 0 && !(grid[k] > grid[k - 1])) throw DomainError("r-grid must be strictly increasing");
    }
}
}  // namespace detail

/// M_N(alpha_{r_k}) for each grid point.
inline std::vector<HelsonMatrix> dilation_family(const Symbol& alpha, const std::vector<double>& r_grid,
                                                 index_t N, const PrimeBudget& budget = std::nullopt) {
    detail::check_grid(r_grid);
    std::vector<HelsonMatrix> family;
    family.reserve(r_grid.size());
    for (const double r : r_grid) family.push_back(assemble(alpha.dilated(DilationParam{r}), N, budget));
    return family;
}

struct ApproxConfig {
    std::uint64_t iterations = 2000;
    /// Golden-section bracket width for K = 2.
    double line_tol = 1e-10;
    /// Target for value - lower_bound when flagging convergence.
    double solver_tol = 1e-6;
    SpectralConfig norm;
};

struct ApproxResult {
    ConvexWeights weights;
    /// |M_N(alpha) - sum_k c_k M_N(alpha_{r_k})|, recomputed by operator_norm.
    double value = 0.0;
    /// Certified lower bound on the grid-restricted optimum from subgradient
    /// linearizations (f(c') >= f(c) + g.(c' - c)).
    double lower_bound = 0.0;
    std::vector<double> history;
    bool converged = false;
    index_t N = 0;
};

/// Objective f(c) = |T - sum_k c_k B_k| on a fixed family, with subgradients
/// g_k = -Re(u^* B_k v) from the leading singular pair.
class ConvexCombinationObjective {
public:
    ConvexCombinationObjective(Matrix target, std::vector<Matrix> family)
        : target_(std::move(target)), family_(std::move(family)) {}

    std::size_t size() const noexcept { return family_.size(); }

    Matrix residual(const std::vector<double>& c) const {
        Matrix R = target_;
        for (std::size_t k = 0; k < family_.size(); ++k) R -= c[k] * family_[k];
        return R;
    }

    double value(const std::vector<double>& c) const {
        const Matrix R = residual(c);
        if (R.isZero(0.0)) return 0.0;
        return leading_pair_dense(R).norm;
    }

    double value_and_subgradient(const std::vector<double>& c, std::vector<double>& g) const {
        const Matrix R = residual(c);
        g.assign(family_.size(), 0.0);
        if (R.isZero(0.0)) return 0.0;
        const SpectralReport top = leading_pair_dense(R);
        for (std::size_t k = 0; k < family_.size(); ++k)
            g[k] = -(top.left.adjoint() * family_[k] * top.right)(0, 0).real();
        return top.norm;
    }

private:
    Matrix target_;
    std::vector<Matrix> family_;
};

/// Minimizes |M_N(alpha) - sum_k c_k M_N(alpha_{r_k})| over the simplex.
/// K = 1 is trivial, K = 2 uses golden-section search, larger K uses
/// projected subgradient steps f(c_0) / (sqrt(t) |g|^2) * g from uniform c_0.
/// Vertices are always evaluated, so the result never exceeds the best
/// single dilation.
inline ApproxResult best_convex_approx(const Symbol& alpha, const std::vector<double>& r_grid, index_t N,
                                       const ApproxConfig& cfg = {},
                                       const PrimeBudget& budget = std::nullopt) {
    const HelsonMatrix target = assemble(alpha, N, budget);
    std::vector<Matrix> family;
    for (const auto& H : dilation_family(alpha, r_grid, N, budget)) family.push_back(H.matrix());
    const std::size_t K = family.size();
    const ConvexCombinationObjective f(target.matrix(), std::move(family));

    ApproxResult out;
    out.N = N;
    std::vector<double> best_c(K, 0.0);
    double best = std::numeric_limits<double>::infinity();
    double lower = 0.0;
    std::vector<double> g;

    auto consider = [&](const std::vector<double>& c) {
        const double v = f.value_and_subgradient(c, g);
        out.history.push_back(v);
        double gc = 0.0;
        for (std::size_t k = 0; k < K; ++k) gc += g[k] * c[k];
        lower = std::max(lower, v + *std::min_element(g.begin(), g.end()) - gc);
        if (v < best) {
            best = v;
            best_c = c;
        }
        return v;
    };

    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> e(K, 0.0);
        e[k] = 1.0;
        consider(e);
    }

    if (K == 2) {
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = 0.0;
        double hi = 1.0;
        double x1 = hi - phi * (hi - lo);
        double x2 = lo + phi * (hi - lo);
        double f1 = consider({1.0 - x1, x1});
        double f2 = consider({1.0 - x2, x2});
        while (hi - lo > cfg.line_tol) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = consider({1.0 - x1, x1});
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = consider({1.0 - x2, x2});
            }
        }
    } else if (K > 2) {
        std::vector<double> c(K, 1.0 / static_cast<double>(K));
        const double eta0 = consider(c);
        for (std::uint64_t t = 1; t <= cfg.iterations && eta0 > 0.0; ++t) {
            // constant shifts of g do not move the simplex projection
            const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(K);
            double gnorm2 = 0.0;
            for (double& x : g) {
                x -= mean;
                gnorm2 += x * x;
            }
            if (gnorm2 == 0.0) break;
            const double step = eta0 / (std::sqrt(static_cast<double>(t)) * gnorm2);
            for (std::size_t k = 0; k < K; ++k) c[k] -= step * g[k];
            c = project_to_simplex(c);
            consider(c);
            if (best - lower <= cfg.solver_tol * std::max(1.0, best)) break;
        }
    }

    out.weights = ConvexWeights(K == 1 ? std::vector<double>{1.0} : best_c);
    const Matrix R = f.residual(out.weights.values());
    out.value = operator_norm(R, cfg.norm).norm;
    out.lower_bound = std::min(lower, out.value);
    out.converged = out.value - out.lower_bound <= cfg.solver_tol * std::max(1.0, out.value);
    return out;
}

struct DiagnosticRow {
    double r = 0.0;
    index_t N = 0;
    double value = 0.0;
};

/// |M_N(alpha_r) - M_N(alpha)| over an r-schedule times an N-schedule.
inline std::vector<DiagnosticRow> compactness_diagnostic(const Symbol& alpha,
                                                         const std::vector<double>& r_schedule,
                                                         const std::vector<index_t>& N_schedule,
                                                         const PrimeBudget& budget = std::nullopt,
                                                         const SpectralConfig& cfg = {}) {
    detail::check_grid(r_schedule);
    if (N_schedule.empty()) throw DomainError("N-schedule must be nonempty");
    for (std::size_t i = 1; i < N_schedule.size(); ++i)
        if (!(N_schedule[i] > N_schedule[i - 1])) throw DomainError("N-schedule must be strictly increasing");
    std::vector<DiagnosticRow> rows;
    for (const index_t N : N_schedule) {
        const HelsonMatrix base = assemble(alpha, N, budget);
        for (const double r : r_schedule) {
            const HelsonMatrix dil = assemble(alpha.dilated(DilationParam{r}), N, budget);
            const Matrix diff = dil.matrix() - base.matrix();
            rows.push_back({r, N, operator_norm(diff, cfg).norm});
        }
    }
    return rows;
}

inline std::string diagnostic_csv(const std::vector<DiagnosticRow>& rows) {
    std::string out = "r,N,value\n";
    for (const auto& row : rows)
        out += format_double(row.r) + ',' + std::to_string(row.N) + ',' + format_double(row.value) + '\n';
    return out;
}

inline json to_json(const ApproxResult& r) {
    return json{{"N", r.N},
                {"weights", r.weights.values()},
                {"value", r.value},
                {"lower_bound", r.lower_bound},
                {"iterations", r.history.size()},
                {"converged", r.converged}};
}

}  // namespace helson
