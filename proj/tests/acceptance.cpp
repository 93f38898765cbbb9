// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "helson/helson.hpp"
#include "support/oracles.hpp"

using namespace helson;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double time_limit_s;
    std::function<Outcome()> run;
};

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

double dense_norm(const Matrix& M) { return M.isZero(0.0) ? 0.0 : singular_values(M).front(); }

const std::vector<double> kRGrid{0.5, 0.9, 0.99};

std::vector<Symbol> fixture_set() {
    return {fixtures::delta(1),        fixtures::delta(2),
            fixtures::delta(6),        fixtures::power(1.0),
            fixtures::power(0.75),     fixtures::mhilbert(),
            fixtures::random_decay(1, 0.5), fixtures::random_decay(2, 1.0),
            fixtures::sum({fixtures::delta(1), fixtures::delta(2)})};
}

// invariants 1-3 on one window configuration; returns worst violations
struct ChainReport {
    double contraction_excess = -1.0;
    double l2_deficit = -1.0;
};

ChainReport contraction_chain(const std::vector<index_t>& Ns, const PrimeBudget& budget) {
    ChainReport rep;
    for (const auto& alpha : fixture_set())
        for (const index_t N : Ns) {
            const HelsonMatrix H = assemble(alpha, N, budget);
            const double base = operator_norm(H).norm;
            for (const double r : kRGrid) {
                const double dil = operator_norm(assemble(alpha.dilated(DilationParam{r}), N, budget)).norm;
                rep.contraction_excess = std::max(rep.contraction_excess, dil - base);
            }
            Sequence restricted;
            for (const index_t n : H.indices()) restricted.set(n, alpha(n));
            rep.l2_deficit = std::max(rep.l2_deficit, restricted.norm() - base);
        }
    return rep;
}

Outcome c1_form_identity() {
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const Sequence alpha_seq = oracles::random_sequence(rng, 256, 80);
        const Symbol alpha(alpha_seq);
        const Sequence a = oracles::random_sequence(rng, 16, 16);
        const Sequence b = oracles::random_sequence(rng, 16, 16);
        const cplx f = form(alpha, a, b);
        const cplx p = bilinear_pair(alpha_seq, dirichlet_convolve(a, b));
        worst = std::max(worst, std::abs(f - p) / (1.0 + std::abs(f)));
    }
    return {worst <= 1e-12, "max relative error " + fmt(worst)};
}

Outcome c2_intertwining_compression() {
    std::mt19937_64 rng(1002);
    double inter = 0.0;
    double comp = 0.0;
    for (const double rv : kRGrid) {
        const DilationParam r{rv};
        for (int trial = 0; trial < 20; ++trial) {
            const Sequence a = oracles::random_sequence(rng, 64, 64);
            const Sequence b = oracles::random_sequence(rng, 64, 64);
            const Sequence lhs = dilate(r, dirichlet_convolve(a, b));
            const Sequence rhs = dirichlet_convolve(dilate(r, a), dilate(r, b));
            inter = std::max(inter, (lhs - rhs).max_abs() / (1.0 + rhs.max_abs()));
        }
        for (const index_t N : {8u, 16u, 64u}) {
            const Symbol alpha = fixtures::random_decay(N + 7, 0.4);
            const Matrix lhs = assemble(Symbol(dilate_symbol(alpha, r, N)), N).matrix();
            const Eigen::VectorXd d = dilation_diagonal(r, window_indices(N));
            const Matrix rhs = d.asDiagonal() * assemble(alpha, N).matrix() * d.asDiagonal();
            comp = std::max(comp, (lhs - rhs).cwiseAbs().maxCoeff());
        }
    }
    return {inter <= 1e-12 && comp <= 1e-12, "intertwining " + fmt(inter) + ", compression " + fmt(comp)};
}

Outcome c3_contraction_chain() {
    const ChainReport rep = contraction_chain({16, 64, 256}, std::nullopt);
    return {rep.contraction_excess <= 1e-9 && rep.l2_deficit <= 1e-9,
            "max dilation excess " + fmt(rep.contraction_excess) + ", max l2 deficit " + fmt(rep.l2_deficit)};
}

double rank_one_norm(double sigma, index_t N) {
    double s = 0.0;
    for (index_t n = 1; n <= N; ++n) s += std::pow(static_cast<double>(n), -2.0 * sigma);
    return s;
}

Outcome c4_spectral_anchor() {
    const double golden =
        operator_norm(assemble(fixtures::sum({fixtures::delta(1), fixtures::delta(2)}), 2)).norm;
    const double e0 = std::abs(golden - std::numbers::phi);
    const double e1 = std::abs(operator_norm(assemble(fixtures::power(1.0), 64)).norm - rank_one_norm(1.0, 64));
    const double e2 = std::abs(operator_norm(assemble(fixtures::power(0.75), 256)).norm - rank_one_norm(0.75, 256));
    return {e0 <= 1e-9 && e1 <= 1e-9 && e2 <= 1e-9,
            "golden " + fmt(e0) + ", power:1@64 " + fmt(e1) + ", power:0.75@256 " + fmt(e2)};
}

Outcome c5_compact_approx() {
    const Symbol alpha = fixtures::power(1.0);
    const std::vector<double> grid{0.9, 0.99, 0.999};
    const index_t N = 32;
    const ApproxResult res = best_convex_approx(alpha, grid, N);
    const double norm = operator_norm(assemble(alpha, N)).norm;

    const Matrix T = assemble(alpha, N).matrix();
    std::vector<Matrix> fam;
    for (const double r : grid) fam.push_back(assemble(alpha.dilated(DilationParam{r}), N).matrix());
    const auto [oracle, arg] = oracles::simplex_grid_search(
        [&](const std::array<double, 3>& c) { return dense_norm(T - c[0] * fam[0] - c[1] * fam[1] - c[2] * fam[2]); },
        100);
    const bool ok = res.value <= 0.05 * norm && std::abs(res.value - oracle) <= 1e-3;
    return {ok, "value " + fmt(res.value) + " (0.05*norm " + fmt(0.05 * norm) + "), grid search " + fmt(oracle)};
}

Outcome c6_diagnostic() {
    double err = 0.0;
    for (const double r : {0.1, 0.5, 0.9, 0.99, 0.999})
        for (const auto& row : compactness_diagnostic(fixtures::delta(2), {r}, {2, 8, 32}))
            err = std::max(err, std::abs(row.value - (1.0 - r)));
    bool monotone = true;
    for (const index_t N : {16u, 32u, 64u}) {
        const auto rows = compactness_diagnostic(fixtures::power(1.0), {0.5, 0.9, 0.99, 0.999}, {N});
        for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].value < rows[i - 1].value;
    }
    return {err <= 1e-12 && monotone,
            "delta:2 error " + fmt(err) + ", power:1 monotone " + (monotone ? "yes" : "no")};
}

Outcome c7_xnorm_anchors() {
    const XNormResult d1 = xnorm(Sequence::delta(1), 4);
    const XNormResult d4 = xnorm(Sequence::delta(4), 4);
    const bool anchors = std::abs(d1.value - 1.0) <= 1e-6 && std::abs(d4.value - 1.0) <= 1e-6 &&
                         d1.primal_dual_gap <= 1e-6 && d4.primal_dual_gap <= 1e-6;
    std::mt19937_64 rng(1007);
    int coord_fail = 0;
    int l2_fail = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const index_t N = 2 + trial % 5;
        const Sequence c = oracles::random_sequence(rng, N, 1 + trial % 4);
        const double v = xnorm(c, N).value;
        if (c.max_abs() > v + 1e-6) ++coord_fail;
        if (v > c.norm() + 1e-6) ++l2_fail;
    }
    return {anchors && coord_fail == 0 && l2_fail == 0,
            "delta:1 " + fmt(d1.value) + ", delta:4 " + fmt(d4.value) + ", gaps " + fmt(d1.primal_dual_gap) + "/" +
                fmt(d4.primal_dual_gap) + ", coordinate failures " + std::to_string(coord_fail) +
                ", l2 failures " + std::to_string(l2_fail)};
}

Outcome c8_oracle_equivalence() {
    std::mt19937_64 rng(1008);
    int matched = 0;
    int below = 0;
    double worst = 0.0;
    const int instances = 40;
    for (int trial = 0; trial < instances; ++trial) {
        const index_t N = 3 + trial % 4;
        const Sequence c = oracles::random_sequence(rng, N, 1 + trial % 3);
        const double v = xnorm(c, N).value;
        oracles::AltMinOracle oracle(static_cast<int>(N), 4, 50, 5000 + trial);
        const double o = oracle(c);
        const double rel = std::abs(v - o) / std::max(1.0, o);
        worst = std::max(worst, rel);
        if (rel <= 1e-3) ++matched;
        if (v < o - 1e-3 * std::max(1.0, o)) ++below;
    }
    const bool ok = matched >= (instances * 95 + 99) / 100 && below == 0;
    return {ok, std::to_string(matched) + "/" + std::to_string(instances) + " matched, " + std::to_string(below) +
                    " below oracle, worst relative gap " + fmt(worst)};
}

Outcome c9_duality() {
    std::mt19937_64 rng(1009);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const index_t N = 2 + trial % 4;
        const Sequence c = oracles::random_sequence(rng, N, 1 + trial % 3);
        const Symbol alpha = fixtures::random_decay(static_cast<std::uint64_t>(trial) + 1, 0.5);
        worst = std::max(worst, duality_gap(alpha, c, N).ratio);
    }
    const Symbol alpha = fixtures::sum({fixtures::delta(1), fixtures::delta(2)});
    const double att = duality_gap(alpha, dual_attaining_sequence(alpha, 2), 2).ratio;
    return {worst <= 1.0 + 1e-6 && att >= 0.99, "max ratio " + fmt(worst) + ", attainment " + fmt(att)};
}

Outcome c10_splitting() {
    bool ok = true;
    std::string detail;
    for (const double q : {0.5, 0.9}) {
        const TailSource a = TailSource::geometric(1.0, q);
        for (const double delta : {0.1, 0.01}) {
            double sum = 0.0;
            for (const auto& blk : split_sequence(a, delta, 4096)) sum += blk.norm();
            const double excess = sum - a.norm();
            ok = ok && excess < delta;
            detail += "q=" + fmt(q) + " d=" + fmt(delta) + " excess " + fmt(excess) + "; ";
        }
    }
    const TailSource a = TailSource::geometric(1.0, 0.5);
    const TailSource b = TailSource::geometric(cplx(0.0, 2.0), 0.7);
    for (const double eps : {0.1, 0.01}) {
        const double inflation = refine_representation({{a, b}, {b, a}}, eps, 256).cost() - 2 * a.norm() * b.norm();
        ok = ok && inflation < 2 * eps;
        detail += "eps=" + fmt(eps) + " inflation " + fmt(inflation) + "; ";
    }
    return {ok, detail};
}

std::string run_cli(const std::string& args) {
    const std::string cmd = std::string(HELSON_CLI_PATH) + " " + args + " 2>/dev/null";
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return out;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    pclose(pipe);
    return out;
}

Outcome c11_prime_budget() {
    const PrimeBudget one = 1;
    // invariants 1-3 on the 2-smooth window
    std::mt19937_64 rng(1011);
    double form_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Sequence a;
        Sequence b;
        std::normal_distribution<double> g;
        for (int k = 0; k <= 4; ++k) {
            a.set(index_t{1} << k, {g(rng), g(rng)});
            b.set(index_t{1} << k, {g(rng), g(rng)});
        }
        const Symbol alpha = fixtures::random_decay(static_cast<std::uint64_t>(trial), 0.5);
        const cplx f = form(alpha, a, b);
        cplx p{};
        for (const auto& [n, v] : dirichlet_convolve(a, b)) p += alpha(n) * v;
        form_err = std::max(form_err, std::abs(f - p) / (1.0 + std::abs(f)));
    }
    double comp = 0.0;
    for (const double rv : kRGrid) {
        const DilationParam r{rv};
        const Symbol alpha = fixtures::random_decay(77, 0.3);
        const HelsonMatrix H = assemble(alpha, 256, one);
        const Eigen::VectorXd d = dilation_diagonal(r, H.indices());
        const Matrix lhs = assemble(Symbol(dilate_symbol(alpha, r, 256)), 256, one).matrix();
        comp = std::max(comp, (lhs - d.asDiagonal() * H.matrix() * d.asDiagonal()).cwiseAbs().maxCoeff());
    }
    const ChainReport chain = contraction_chain({16, 64, 256}, one);

    // Hankel pattern h(i + j) with h(k) = alpha(2^k), through the library and the CLI
    bool hankel = true;
    const Symbol alpha = fixtures::random_decay(5, 0.5);
    const HelsonMatrix H = assemble(alpha, 1024, one);
    for (Eigen::Index i = 0; i < H.size(); ++i) {
        hankel = hankel && H.indices()[static_cast<std::size_t>(i)] == (index_t{1} << i);
        for (Eigen::Index j = 0; j < H.size(); ++j) hankel = hankel && H(i, j) == alpha(index_t{1} << (i + j));
    }
    const std::string csv = run_cli("--primes 1 --format csv assemble random-decay:5,0.5 --N 64");
    std::istringstream lines(csv);
    std::string line;
    std::vector<std::vector<std::string>> cells;
    while (std::getline(lines, line)) {
        std::vector<std::string> row;
        for (std::size_t pos = 0; pos < line.size();) {
            const std::size_t close = line.find('"', pos + 1);
            row.push_back(line.substr(pos + 1, close - pos - 1));
            pos = close + 2;
        }
        cells.push_back(row);
    }
    bool cli_hankel = cells.size() == 7;
    for (std::size_t i = 0; cli_hankel && i < cells.size(); ++i) {
        cli_hankel = cells[i].size() == 7;
        for (std::size_t j = 0; cli_hankel && j < cells[i].size(); ++j) {
            const cplx want = alpha(index_t{1} << (i + j));
            cli_hankel = cells[i][j] == format_double(want.real()) + "," + format_double(want.imag());
        }
    }
    const bool ok = form_err <= 1e-12 && comp <= 1e-12 && chain.contraction_excess <= 1e-9 &&
                    chain.l2_deficit <= 1e-9 && hankel && cli_hankel;
    return {ok, "form " + fmt(form_err) + ", compression " + fmt(comp) + ", dilation excess " +
                    fmt(chain.contraction_excess) + ", l2 deficit " + fmt(chain.l2_deficit) + ", Hankel " +
                    (hankel ? "yes" : "no") + ", CLI Hankel " + (cli_hankel ? "yes" : "no")};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "form identity", 5, c1_form_identity},
        {2, "dilation intertwining and compression", 5, c2_intertwining_compression},
        {3, "contraction chain", 30, c3_contraction_chain},
        {4, "spectral anchor", 10, c4_spectral_anchor},
        {5, "compact approximation", 60, c5_compact_approx},
        {6, "compactness diagnostic", 10, c6_diagnostic},
        {7, "X-norm anchors", 60, c7_xnorm_anchors},
        {8, "oracle equivalence", 300, c8_oracle_equivalence},
        {9, "duality", 60, c9_duality},
        {10, "splitting", 5, c10_splitting},
        {11, "prime budget", 10, c11_prime_budget},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.time_limit_s;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): " << o.detail
                  << " [" << fmt(secs) << " s, limit " << c.time_limit_s << " s"
                  << (in_time ? "" : ", over time") << "]" << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
