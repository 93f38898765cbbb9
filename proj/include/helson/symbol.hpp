#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "helson/dilation.hpp"
#include "helson/errors.hpp"
#include "helson/io.hpp"
#include "helson/sequence.hpp"

namespace helson {

/// A generating sequence alpha that can be evaluated at any positive index:
/// either a finite Sequence or a closed-form fixture. Evaluation is pure.
class Symbol {
public:
    using Eval = std::function<cplx(index_t)>;

    Symbol(std::string id, Eval eval) : id_(std::move(id)), eval_(std::move(eval)) {}

    Symbol(const Sequence& s, std::string id = "sequence")
        : id_(std::move(id)), eval_([seq = std::make_shared<const Sequence>(s)](index_t n) {
              return seq->at(n);
          }) {}

    const std::string& id() const noexcept { return id_; }
    cplx operator()(index_t n) const { return eval_(n); }

    Symbol conj() const {
        return Symbol("conj(" + id_ + ")", [e = eval_](index_t n) { return std::conj(e(n)); });
    }

    /// alpha_r = D_r alpha, evaluated lazily.
    Symbol dilated(DilationParam r) const {
        return Symbol(id_ + "@r=" + format_double(r.value()),
                      [e = eval_, r](index_t n) { return dilation_weight(r, n) * e(n); });
    }

    /// Values on [1, m] as a sparse Sequence.
    Sequence restrict_to(index_t m) const {
        Sequence s;
        for (index_t n = 1; n <= m; ++n) s.set(n, eval_(n));
        return s;
    }

private:
    std::string id_;
    Eval eval_;
};

namespace fixtures {

inline Symbol delta(index_t k) {
    if (k == 0) throw DomainError("delta index must be positive");
    return Symbol("delta:" + std::to_string(k), [k](index_t n) { return n == k ? cplx{1.0} : cplx{}; });
}

/// alpha(n) = n^{-sigma}. M_N is rank one: w w^T with w(n) = n^{-sigma}.
inline Symbol power(double sigma) {
    return Symbol("power:" + format_double(sigma),
                  [sigma](index_t n) { return cplx{std::pow(static_cast<double>(n), -sigma)}; });
}

/// alpha(1) = 0, alpha(n) = 1 / (sqrt(n) log n).
inline Symbol mhilbert() {
    return Symbol("mhilbert", [](index_t n) {
        if (n < 2) return cplx{};
        const double x = static_cast<double>(n);
        return cplx{1.0 / (std::sqrt(x) * std::log(x))};
    });
}

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
inline double unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}
}  // namespace detail

/// alpha(n) = (u + i v) n^{-rate} with u, v uniform in [-1, 1], drawn from a
/// counter-based hash of (seed, n). Fully determined by seed.
inline Symbol random_decay(std::uint64_t seed, double rate) {
    return Symbol("random-decay:" + std::to_string(seed) + "," + format_double(rate),
                  [seed, rate](index_t n) {
                      const std::uint64_t h = detail::splitmix64(seed ^ detail::splitmix64(n));
                      const double u = 2.0 * detail::unit_interval(h) - 1.0;
                      const double v = 2.0 * detail::unit_interval(detail::splitmix64(h)) - 1.0;
                      return cplx{u, v} * std::pow(static_cast<double>(n), -rate);
                  });
}

inline Symbol from_file(const std::string& path) {
    return Symbol(read_sequence_file(path), "file:" + path);
}

inline Symbol sum(const std::vector<Symbol>& parts) {
    std::string id;
    for (const auto& p : parts) id += (id.empty() ? "" : "+") + p.id();
    return Symbol(id, [parts](index_t n) {
        cplx s{};
        for (const auto& p : parts) s += p(n);
        return s;
    });
}

inline double parse_number(const std::string& s, const std::string& spec) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DomainError("bad numeric parameter '" + s + "' in fixture '" + spec + "'");
    }
}

inline std::uint64_t parse_index(const std::string& s, const std::string& spec) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw DomainError("bad integer parameter '" + s + "' in fixture '" + spec + "'");
    return std::stoull(s);
}

/// Parses fixture specs: "delta:n", "power:sigma", "mhilbert",
/// "random-decay:seed,rate", "file:path", and '+'-joined sums of these
/// (e.g. "delta:1+delta:2"). A "file:" spec consumes the rest of the string.
inline Symbol parse(const std::string& spec) {
    if (spec.rfind("file:", 0) == 0) return from_file(spec.substr(5));
    if (const auto plus = spec.find('+'); plus != std::string::npos) {
        std::vector<Symbol> parts;
        std::size_t start = 0;
        while (true) {
            const auto next = spec.find('+', start);
            const std::string part = spec.substr(start, next == std::string::npos ? next : next - start);
            if (part.rfind("file:", 0) == 0) {
                parts.push_back(from_file(spec.substr(start + 5)));
                break;
            }
            parts.push_back(parse(part));
            if (next == std::string::npos) break;
            start = next + 1;
        }
        return sum(parts);
    }
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "delta") return delta(parse_index(args, spec));
    if (name == "power") return power(parse_number(args, spec));
    if (name == "mhilbert") {
        if (colon != std::string::npos) throw DomainError("mhilbert takes no parameters");
        return mhilbert();
    }
    if (name == "random-decay") {
        const auto comma = args.find(',');
        if (comma == std::string::npos) throw DomainError("random-decay needs 'seed,rate'");
        return random_decay(parse_index(args.substr(0, comma), spec),
                            parse_number(args.substr(comma + 1), spec));
    }
    throw DomainError("unknown fixture '" + spec + "'");
}

}  // namespace fixtures
}  // namespace helson
