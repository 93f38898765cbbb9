#pragma once

#include <cmath>
#include <complex>
#include <initializer_list>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "helson/errors.hpp"
#include "helson/sieve.hpp"

namespace helson {

using cplx = std::complex<double>;

/// Finitely supported sequence on the positive integers. Zero entries are
/// never stored and iteration is by ascending index, so every reduction
/// over a Sequence is reproducible.
class Sequence {
public:
    using storage = std::map<index_t, cplx>;
    using const_iterator = storage::const_iterator;

    Sequence() = default;
    Sequence(std::initializer_list<std::pair<index_t, cplx>> entries) {
        for (const auto& [n, v] : entries) add(n, v);
    }

    static Sequence delta(index_t n, cplx value = 1.0) {
        Sequence s;
        s.set(n, value);
        return s;
    }

    void set(index_t n, cplx value) {
        if (n == 0) throw DomainError("sequence index must be positive");
        if (value == cplx{}) {
            entries_.erase(n);
        } else {
            entries_[n] = value;
        }
    }

    void add(index_t n, cplx value) { set(n, at(n) + value); }

    cplx at(index_t n) const {
        const auto it = entries_.find(n);
        return it == entries_.end() ? cplx{} : it->second;
    }
    cplx operator()(index_t n) const { return at(n); }

    bool empty() const noexcept { return entries_.empty(); }
    std::size_t support_size() const noexcept { return entries_.size(); }
    index_t max_index() const noexcept { return entries_.empty() ? 0 : entries_.rbegin()->first; }

    std::vector<index_t> support() const {
        std::vector<index_t> s;
        s.reserve(entries_.size());
        for (const auto& e : entries_) s.push_back(e.first);
        return s;
    }

    const_iterator begin() const noexcept { return entries_.begin(); }
    const_iterator end() const noexcept { return entries_.end(); }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& e : entries_) s += std::norm(e.second);
        return s;
    }
    double norm() const { return std::sqrt(norm_sq()); }
    double max_abs() const {
        double m = 0.0;
        for (const auto& e : entries_) m = std::max(m, std::abs(e.second));
        return m;
    }

    Sequence conj() const {
        Sequence out;
        for (const auto& [n, v] : entries_) out.entries_.emplace_hint(out.entries_.end(), n, std::conj(v));
        return out;
    }

    /// Restriction to indices <= m (the head a^m).
    Sequence truncated(index_t m) const {
        Sequence out;
        for (const auto& [n, v] : entries_) {
            if (n > m) break;
            out.entries_.emplace_hint(out.entries_.end(), n, v);
        }
        return out;
    }

    Sequence& operator+=(const Sequence& o) {
        for (const auto& [n, v] : o.entries_) add(n, v);
        return *this;
    }
    Sequence& operator-=(const Sequence& o) {
        for (const auto& [n, v] : o.entries_) add(n, -v);
        return *this;
    }
    Sequence& operator*=(cplx s) {
        if (s == cplx{}) {
            entries_.clear();
            return *this;
        }
        for (auto it = entries_.begin(); it != entries_.end();) {
            it->second *= s;
            it = (it->second == cplx{}) ? entries_.erase(it) : std::next(it);
        }
        return *this;
    }

    friend Sequence operator+(Sequence a, const Sequence& b) { return a += b; }
    friend Sequence operator-(Sequence a, const Sequence& b) { return a -= b; }
    friend Sequence operator*(cplx s, Sequence a) { return a *= s; }
    friend Sequence operator*(Sequence a, cplx s) { return a *= s; }

    friend bool operator==(const Sequence&, const Sequence&) = default;

private:
    storage entries_;
};

/// Dirichlet convolution with the second factor conjugated:
/// (a * b)(n) = sum_{k | n} a(k) conj(b(n / k)).
inline Sequence dirichlet_convolve(const Sequence& a, const Sequence& b) {
    const index_t limit = default_sieve().limit();
    std::map<index_t, cplx> acc;
    for (const auto& [i, ai] : a) {
        for (const auto& [j, bj] : b) {
            if (i > limit / j)
                throw DomainError("convolution index " + std::to_string(i) + "*" + std::to_string(j) +
                                  " exceeds sieve limit " + std::to_string(limit));
            acc[i * j] += ai * std::conj(bj);
        }
    }
    Sequence out;
    for (const auto& [n, v] : acc) out.set(n, v);
    return out;
}

/// (a, b) = sum_n a(n) b(n); neither argument is conjugated.
inline cplx bilinear_pair(const Sequence& a, const Sequence& b) {
    const Sequence& small = a.support_size() <= b.support_size() ? a : b;
    const Sequence& large = &small == &a ? b : a;
    cplx s{};
    for (const auto& [n, v] : small) s += v * large.at(n);
    return s;
}

}  // namespace helson
