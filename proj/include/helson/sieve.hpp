#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "helson/errors.hpp"

namespace helson {

using index_t = std::uint64_t;

inline constexpr index_t kDefaultSieveLimit = index_t{1} << 20;

/// Exponent vector of a prime factorization, n = prod_j p_j^{exponents[j-1]}.
/// Trailing zeros are never stored, so 1 corresponds to the empty vector.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<unsigned> exponents) : exponents_(std::move(exponents)) {
        while (!exponents_.empty() && exponents_.back() == 0) exponents_.pop_back();
    }

    const std::vector<unsigned>& exponents() const noexcept { return exponents_; }
    std::size_t size() const noexcept { return exponents_.size(); }
    bool empty() const noexcept { return exponents_.empty(); }
    unsigned operator[](std::size_t j) const { return j < exponents_.size() ? exponents_[j] : 0; }

    /// sum_j j * kappa_j with 1-based prime positions.
    std::uint64_t weighted_degree() const noexcept {
        std::uint64_t s = 0;
        for (std::size_t j = 0; j < exponents_.size(); ++j) s += (j + 1) * exponents_[j];
        return s;
    }

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<unsigned> exponents_;
};

/// Smallest-prime-factor table up to a fixed limit. Immutable after
/// construction, so one instance can be shared by any number of threads.
class Sieve {
public:
    explicit Sieve(index_t limit = kDefaultSieveLimit) : limit_(limit) {
        if (limit < 2) throw DomainError("sieve limit must be at least 2");
        spf_.assign(limit + 1, 0);
        for (index_t i = 2; i <= limit; ++i) {
            if (spf_[i] == 0) {
                primes_.push_back(i);
                for (index_t k = i; k <= limit; k += i)
                    if (spf_[k] == 0) spf_[k] = static_cast<std::uint32_t>(i);
            }
        }
    }

    index_t limit() const noexcept { return limit_; }
    const std::vector<index_t>& primes() const noexcept { return primes_; }

    /// j-th prime, 1-based (prime(1) == 2).
    index_t prime(std::size_t j) const {
        if (j == 0 || j > primes_.size())
            throw DomainError("prime position " + std::to_string(j) + " beyond sieve limit " +
                              std::to_string(limit_));
        return primes_[j - 1];
    }

    void check(index_t n) const {
        if (n == 0) throw DomainError("index 0 is not a positive integer");
        if (n > limit_)
            throw DomainError("index " + std::to_string(n) + " exceeds sieve limit " +
                              std::to_string(limit_));
    }

    MultiIndex factorize(index_t n) const {
        check(n);
        std::vector<unsigned> kappa;
        while (n > 1) {
            const index_t p = spf_[n];
            const auto pos = static_cast<std::size_t>(
                std::lower_bound(primes_.begin(), primes_.end(), p) - primes_.begin());
            if (kappa.size() <= pos) kappa.resize(pos + 1, 0);
            while (n % p == 0) {
                n /= p;
                ++kappa[pos];
            }
        }
        return MultiIndex(std::move(kappa));
    }

    index_t compose(const MultiIndex& kappa) const {
        index_t n = 1;
        for (std::size_t j = 0; j < kappa.size(); ++j) {
            const unsigned e = kappa.exponents()[j];
            if (e == 0) continue;
            const index_t p = prime(j + 1);
            for (unsigned k = 0; k < e; ++k) {
                if (n > limit_ / p)
                    throw DomainError("composed integer exceeds sieve limit " + std::to_string(limit_));
                n *= p;
            }
        }
        return n;
    }

    /// Position (1-based) of the largest prime factor; 0 for n = 1.
    std::size_t largest_prime_position(index_t n) const {
        check(n);
        std::size_t pos = 0;
        while (n > 1) {
            const index_t p = spf_[n];
            pos = std::max(pos, static_cast<std::size_t>(
                                    std::lower_bound(primes_.begin(), primes_.end(), p) -
                                    primes_.begin()) + 1);
            while (n % p == 0) n /= p;
        }
        return pos;
    }

    std::vector<index_t> divisors(index_t n) const {
        const MultiIndex kappa = factorize(n);
        std::vector<index_t> out{1};
        for (std::size_t j = 0; j < kappa.size(); ++j) {
            const index_t p = primes_[j];
            const std::size_t base = out.size();
            index_t pk = 1;
            for (unsigned e = 1; e <= kappa.exponents()[j]; ++e) {
                pk *= p;
                for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    index_t limit_;
    std::vector<std::uint32_t> spf_;
    std::vector<index_t> primes_;
};

/// Sieve limit taken from HELSON_SIEVE_LIMIT when set, else 2^20.
inline index_t configured_sieve_limit() {
    if (const char* env = std::getenv("HELSON_SIEVE_LIMIT"); env && *env) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v >= 2 && v <= (index_t{1} << 32)) return static_cast<index_t>(v);
        throw DomainError(std::string("invalid HELSON_SIEVE_LIMIT: ") + env);
    }
    return kDefaultSieveLimit;
}

/// Process-wide sieve, built on first use.
inline const Sieve& default_sieve() {
    static const Sieve sieve(configured_sieve_limit());
    return sieve;
}

inline MultiIndex factorize(index_t n) { return default_sieve().factorize(n); }
inline index_t compose(const MultiIndex& kappa) { return default_sieve().compose(kappa); }
inline std::vector<index_t> divisors(index_t n) { return default_sieve().divisors(n); }

/// Optional restriction to integers whose prime factors are among p_1..p_d.
using PrimeBudget = std::optional<std::size_t>;

inline bool is_smooth(index_t n, const PrimeBudget& budget) {
    if (!budget) return true;
    return default_sieve().largest_prime_position(n) <= *budget;
}

/// Ascending row/column indices of a truncation window: 1..N, or only the
/// d-smooth integers in that range under a prime budget.
inline std::vector<index_t> window_indices(index_t N, const PrimeBudget& budget = std::nullopt) {
    if (N == 0) throw DomainError("truncation size must be at least 1");
    std::vector<index_t> idx;
    if (!budget) {
        idx.resize(N);
        for (index_t i = 0; i < N; ++i) idx[i] = i + 1;
        return idx;
    }
    for (index_t n = 1; n <= N; ++n)
        if (is_smooth(n, budget)) idx.push_back(n);
    return idx;
}

}  // namespace helson
