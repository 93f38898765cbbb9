#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "helson/errors.hpp"
#include "helson/sequence.hpp"

namespace helson {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Sequences on disk: [[index, re, im], ...] with strictly increasing indices.
inline json sequence_to_json(const Sequence& s) {
    json arr = json::array();
    for (const auto& [n, v] : s) arr.push_back(json::array({n, v.real(), v.imag()}));
    return arr;
}

inline Sequence sequence_from_json(const json& j) {
    if (!j.is_array()) throw DomainError("sequence JSON must be an array of [index, re, im] triples");
    Sequence s;
    index_t prev = 0;
    for (const auto& t : j) {
        if (!t.is_array() || t.size() != 3 || !t[0].is_number_integer() || !t[1].is_number() ||
            !t[2].is_number())
            throw DomainError("sequence JSON entries must be [index, re, im] triples");
        const auto n = t[0].get<long long>();
        if (n < 1) throw DomainError("sequence index must be positive");
        const auto idx = static_cast<index_t>(n);
        if (idx <= prev) throw DomainError("sequence indices must be strictly increasing");
        prev = idx;
        const double re = t[1].get<double>();
        const double im = t[2].get<double>();
        if (!std::isfinite(re) || !std::isfinite(im)) throw DomainError("sequence values must be finite");
        s.set(idx, {re, im});
    }
    return s;
}

inline Sequence read_sequence_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open sequence file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw DomainError("malformed sequence file " + path + ": " + e.what());
    }
    return sequence_from_json(j);
}

/// 17 significant digits: round-trips every double, so text output is byte-stable.
inline std::string format_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace helson
