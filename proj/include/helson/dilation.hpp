#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "helson/errors.hpp"
#include "helson/sequence.hpp"
#include "helson/sieve.hpp"

namespace helson {

/// Dilation parameter r, strictly inside (0, 1).
class DilationParam {
public:
    explicit DilationParam(double r) : r_(r) {
        if (!(r > 0.0 && r < 1.0))
            throw DomainError("dilation parameter must lie strictly in (0,1), got " + std::to_string(r));
    }
    double value() const noexcept { return r_; }
    operator double() const noexcept { return r_; }

private:
    double r_;
};

/// r^{sum_j j kappa_j} where kappa = factorize(n). Prime p_j contributes r^j.
inline double dilation_weight(DilationParam r, index_t n) {
    const std::uint64_t deg = factorize(n).weighted_degree();
    return deg == 0 ? 1.0 : std::pow(r.value(), static_cast<double>(deg));
}

/// The diagonal multiplier D_r applied to a sequence.
inline Sequence dilate(DilationParam r, const Sequence& a) {
    Sequence out;
    for (const auto& [n, v] : a) out.set(n, dilation_weight(r, n) * v);
    return out;
}

struct HsSumReport {
    double partial_sum = 0.0;
    double product_form = 0.0;
    /// Number of weighted-degree shells D = 0, 1, ... summed.
    std::uint64_t terms_used = 0;
};

/// Hilbert-Schmidt norm squared of D_r two ways: summing r^{2 deg(kappa)}
/// over multi-indices grouped by weighted degree, and as the Euler product
/// prod_j 1/(1 - r^{2j}). Multi-indices of weighted degree D are in bijection
/// with partitions of D, so each degree contributes p(D) r^{2D}.
inline HsSumReport dilation_hs_sum(DilationParam r, double tolerance,
                                   std::uint64_t max_terms = 1'000'000) {
    if (!(tolerance > 0.0 && tolerance < 1.0))
        throw DomainError("tolerance must lie in (0,1)");
    const double q = r.value() * r.value();
    const double tail_factor = 1.0 / (1.0 - q);

    HsSumReport rep;
    // product form: stop once the remaining factors can change the value by
    // less than tolerance (log of the tail product <= sum_{i>j} q^i / (1-q^i)).
    double prod = 1.0;
    double qj = 1.0;
    for (std::uint64_t j = 1;; ++j) {
        qj *= q;
        prod /= (1.0 - qj);
        if (qj * q * tail_factor / (1.0 - qj * q) < tolerance) break;
        if (j > 100'000'000)
            throw ConvergenceError("product form did not stabilize", prod);
    }
    rep.product_form = prod;

    // partition numbers p(0..D) via Euler's pentagonal recurrence, grown lazily
    std::vector<double> p{1.0};
    auto partition = [&p](std::uint64_t D) {
        while (p.size() <= D) {
            const auto m = static_cast<std::int64_t>(p.size());
            double s = 0.0;
            for (std::int64_t k = 1;; ++k) {
                const std::int64_t g1 = k * (3 * k - 1) / 2;
                if (g1 > m) break;
                const double sign = (k % 2 == 1) ? 1.0 : -1.0;
                s += sign * p[static_cast<std::size_t>(m - g1)];
                const std::int64_t g2 = k * (3 * k + 1) / 2;
                if (g2 <= m) s += sign * p[static_cast<std::size_t>(m - g2)];
            }
            p.push_back(s);
        }
        return p[D];
    };

    double sum = 0.0;
    double qD = 1.0;
    for (std::uint64_t D = 0;; ++D) {
        const double count = partition(D);
        sum += count * qD;
        rep.terms_used = D + 1;
        if (rep.terms_used > max_terms || !std::isfinite(count))
            throw ConvergenceError("degree enumeration exceeded term cap", sum);
        // ratio p(D+1)/p(D) tends to 1, so the remaining tail is dominated
        // by a geometric series once the current term is small.
        const double term = count * qD;
        qD *= q;
        if (D > 0 && term * tail_factor < tolerance * sum * 0.1) break;
    }
    rep.partial_sum = sum;
    return rep;
}

}  // namespace helson
