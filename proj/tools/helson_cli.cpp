// helson: batch front end for the multiplicative Hankel operator library.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "helson/helson.hpp"

namespace {

using namespace helson;

constexpr int kExitDomain = 2;
constexpr int kExitConvergence = 3;

struct Options {
    index_t N = 16;
    std::string N_list;
    std::optional<std::size_t> primes;
    double norm_tol = 1e-10;
    double solver_tol = 1e-6;
    std::uint64_t iterations = 2000;
    std::uint64_t xnorm_iterations = 20000;
    std::string grid = "geometric(0.9,0.1,3)";
    std::string out;
    std::string format = "json";
};

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) parts.push_back(cur);
    return parts;
}

/// "geometric(r0,ratio,K)" -> r_k = 1 - (1 - r0) ratio^k, k = 0..K-1;
/// otherwise a comma-separated list of values.
std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> grid;
    const std::string prefix = "geometric(";
    if (spec.rfind(prefix, 0) == 0) {
        if (spec.back() != ')') throw DomainError("malformed grid spec: " + spec);
        const auto args = split(spec.substr(prefix.size(), spec.size() - prefix.size() - 1), ',');
        if (args.size() != 3) throw DomainError("geometric grid needs (r0, ratio, K)");
        const double r0 = fixtures::parse_number(args[0], spec);
        const double ratio = fixtures::parse_number(args[1], spec);
        const auto K = fixtures::parse_index(args[2], spec);
        if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("geometric grid ratio must lie in (0,1)");
        double gap = 1.0 - r0;
        for (index_t k = 0; k < K; ++k, gap *= ratio) grid.push_back(1.0 - gap);
    } else {
        for (const auto& item : split(spec, ',')) grid.push_back(fixtures::parse_number(item, spec));
    }
    for (const double r : grid) DilationParam{r};
    return grid;
}

std::vector<index_t> parse_N_list(const std::string& spec) {
    std::vector<index_t> out;
    for (const auto& item : split(spec, ',')) {
        const auto v = fixtures::parse_index(item, spec);
        if (v == 0) throw DomainError("N must be at least 1");
        out.push_back(v);
    }
    if (out.empty()) throw DomainError("empty N list");
    return out;
}

/// Sequence arguments: "file:path" is read as is, any other fixture is
/// restricted to the window [1, N].
Sequence parse_sequence_arg(const std::string& spec, index_t N) {
    if (spec.rfind("file:", 0) == 0) return read_sequence_file(spec.substr(5));
    return fixtures::parse(spec).restrict_to(N);
}

json envelope(const std::string& command, const std::string& config_hash) {
    return json{{"schema", kSchemaVersion}, {"command", command}, {"config_hash", config_hash}};
}

std::string csv_header(const std::string& config_hash) {
    return "# helson schema=" + std::to_string(kSchemaVersion) + " config_hash=" + config_hash + "\n";
}

std::string factor_line(index_t n) {
    const MultiIndex kappa = factorize(n);
    std::string expr;
    std::string exps;
    for (std::size_t j = 0; j < kappa.size(); ++j) {
        if (j) exps += ',';
        exps += std::to_string(kappa.exponents()[j]);
        const unsigned e = kappa.exponents()[j];
        if (e == 0) continue;
        if (!expr.empty()) expr += " · ";
        expr += std::to_string(default_sieve().prime(j + 1));
        if (e > 1) expr += "^" + std::to_string(e);
    }
    if (expr.empty()) expr = "1";
    return std::to_string(n) + " = " + expr + ", kappa=(" + exps + ")";
}

void emit(const Options& opt, const std::string& text) {
    if (opt.out.empty()) {
        std::cout << text;
        return;
    }
    const std::string tmp = opt.out + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw DomainError("cannot write output file " + opt.out);
        f << text;
    }
    std::filesystem::rename(tmp, opt.out);
}

void mark_failure(const Options& opt, const std::string& message) {
    if (opt.out.empty()) return;
    std::error_code ec;
    std::filesystem::remove(opt.out + ".tmp", ec);
    std::ofstream f(opt.out + ".failed");
    f << message << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiplicative Hankel (Helson) operators: norms, compact approximation, weak-product norms"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value configuration file mirroring the flags");

    Options opt;
    std::size_t primes_flag = 0;
    app.add_option("--primes", primes_flag, "restrict indices to p_1..p_d smooth integers")
        ->check(CLI::PositiveNumber);
    app.add_option("--norm-tol,--norm_tol", opt.norm_tol, "relative tolerance of operator norms");
    app.add_option("--solver-tol,--solver_tol", opt.solver_tol, "solver tolerance (gaps, certificates)");
    app.add_option("--out", opt.out, "write output to this file instead of stdout");
    app.add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    std::string cmd_name;
    std::string canonical;

    auto* factor = app.add_subcommand("factor", "prime factorization and multi-index");
    index_t factor_n = 0;
    factor->add_option("n", factor_n)->required();

    auto* convolve = app.add_subcommand("convolve", "Dirichlet convolution a * b");
    std::string conv_a, conv_b;
    convolve->add_option("a", conv_a)->required();
    convolve->add_option("b", conv_b)->required();
    convolve->add_option("--N", opt.N, "window for non-file sequence fixtures");

    auto* dilate_cmd = app.add_subcommand("dilate", "apply D_r to a sequence");
    double dilate_r = 0.5;
    std::string dilate_seq;
    dilate_cmd->add_option("r", dilate_r)->required();
    dilate_cmd->add_option("sequence", dilate_seq)->required();
    dilate_cmd->add_option("--N", opt.N, "window for non-file sequence fixtures");

    auto* norm = app.add_subcommand("norm", "operator norm of the truncated Helson matrix");
    std::string norm_fixture;
    norm->add_option("fixture", norm_fixture)->required();
    norm->add_option("--N", opt.N, "truncation size");

    auto* assemble_cmd = app.add_subcommand("assemble", "export the truncated Helson matrix");
    std::string assemble_fixture;
    assemble_cmd->add_option("fixture", assemble_fixture)->required();
    assemble_cmd->add_option("--N", opt.N, "truncation size");

    auto* essnorm = app.add_subcommand("essnorm", "best convex combination of dilations, per N");
    std::string ess_fixture;
    essnorm->add_option("fixture", ess_fixture)->required();
    essnorm->add_option("--grid", opt.grid, "r-grid: geometric(r0,ratio,K) or a comma list");
    essnorm->add_option("--N", opt.N_list, "truncation sizes, comma separated")->required();
    essnorm->add_option("--iterations", opt.iterations, "subgradient iterations");

    auto* diag = app.add_subcommand("diagnostic", "table of |M_N(alpha_r) - M_N(alpha)|");
    std::string diag_fixture;
    diag->add_option("fixture", diag_fixture)->required();
    diag->add_option("--grid", opt.grid, "r-schedule: geometric(r0,ratio,K) or a comma list");
    diag->add_option("--N", opt.N_list, "truncation sizes, comma separated")->required();

    auto* xn = app.add_subcommand("xnorm", "weak-product norm on the window with a dual certificate");
    std::string xn_seq;
    bool xn_matrix = false;
    xn->add_option("sequence", xn_seq)->required();
    xn->add_option("--N", opt.N, "window size");
    xn->add_option("--iterations", opt.xnorm_iterations, "iteration cap");
    xn->add_flag("--matrix", xn_matrix, "emit the optimal window matrix as CSV instead");

    auto* dual = app.add_subcommand("duality", "|(alpha, c)| against |M_N(alpha)| |c|_X");
    std::string dual_alpha, dual_c;
    dual->add_option("alpha", dual_alpha)->required();
    dual->add_option("c", dual_c)->required();
    dual->add_option("--N", opt.N, "window size");
    dual->add_option("--iterations", opt.xnorm_iterations, "iteration cap");

    auto* hs = app.add_subcommand("hs-sum", "Hilbert-Schmidt sum of D_r two ways");
    double hs_r = 0.5;
    double hs_tol = 1e-12;
    hs->add_option("r", hs_r)->required();
    hs->add_option("--tolerance", hs_tol);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitDomain;
    }
    if (primes_flag > 0) opt.primes = primes_flag;

    CLI::App* sub = app.get_subcommands().front();
    cmd_name = sub->get_name();
    {
        // canonical config string: the command line minus output routing
        std::string canon = cmd_name;
        for (int i = 1; i < argc; ++i) {
            const std::string a = argv[i];
            if (a == "--out") {
                ++i;
                continue;
            }
            if (a.rfind("--out=", 0) == 0) continue;
            canon += '\x1f' + a;
        }
        canonical = canon;
    }
    const std::string hash = hex64(fnv1a(canonical));
    const bool csv = opt.format == "csv";

    try {
        std::string text;
        const SpectralConfig scfg{opt.norm_tol, 50000};
        if (cmd_name == "factor") {
            if (csv) {
                const MultiIndex kappa = factorize(factor_n);
                text = csv_header(hash) + "n,j,prime,exponent\n";
                for (std::size_t j = 0; j < kappa.size(); ++j)
                    text += std::to_string(factor_n) + ',' + std::to_string(j + 1) + ',' +
                            std::to_string(default_sieve().prime(j + 1)) + ',' +
                            std::to_string(kappa.exponents()[j]) + '\n';
            } else {
                text = factor_line(factor_n) + '\n';
            }
        } else if (cmd_name == "convolve" || cmd_name == "dilate") {
            Sequence result;
            if (cmd_name == "convolve") {
                result = dirichlet_convolve(parse_sequence_arg(conv_a, opt.N), parse_sequence_arg(conv_b, opt.N));
            } else {
                result = dilate(DilationParam{dilate_r}, parse_sequence_arg(dilate_seq, opt.N));
            }
            if (csv) {
                text = csv_header(hash) + "index,re,im\n";
                for (const auto& [n, v] : result)
                    text += std::to_string(n) + ',' + format_double(v.real()) + ',' + format_double(v.imag()) + '\n';
            } else {
                text = sequence_to_json(result).dump() + '\n';
            }
        } else if (cmd_name == "norm") {
            const Symbol alpha = fixtures::parse(norm_fixture);
            SpectralReport rep;
            if (opt.N <= kDenseAssemblyCap) {
                rep = operator_norm(assemble(alpha, opt.N, opt.primes), scfg);
            } else {
                rep = operator_norm(HelsonOperator(alpha, opt.N, opt.primes), scfg);
            }
            if (csv) {
                text = csv_header(hash) + "fixture,N,norm,residual,iterations\n" + alpha.id() + ',' +
                       std::to_string(opt.N) + ',' + format_double(rep.norm) + ',' + format_double(rep.residual) +
                       ',' + std::to_string(rep.iterations) + '\n';
            } else {
                json j = envelope(cmd_name, hash);
                j["fixture"] = alpha.id();
                j["N"] = opt.N;
                j["prime_budget"] = opt.primes ? json(*opt.primes) : json(nullptr);
                j["report"] = to_json(rep);
                text = j.dump(2) + '\n';
            }
        } else if (cmd_name == "assemble") {
            const HelsonMatrix H = assemble(fixtures::parse(assemble_fixture), opt.N, opt.primes);
            if (csv) {
                text = to_csv(H.matrix());
            } else {
                json j = envelope(cmd_name, hash);
                j["header"] = header_json(H);
                text = j.dump(2) + '\n';
            }
        } else if (cmd_name == "essnorm" || cmd_name == "diagnostic") {
            const Symbol alpha = fixtures::parse(cmd_name == "essnorm" ? ess_fixture : diag_fixture);
            const std::vector<double> grid = parse_grid(opt.grid);
            const std::vector<index_t> Ns = parse_N_list(opt.N_list);
            const auto rows = compactness_diagnostic(alpha, grid, Ns, opt.primes, scfg);
            std::vector<ApproxResult> best;
            if (cmd_name == "essnorm") {
                ApproxConfig acfg;
                acfg.iterations = opt.iterations;
                acfg.solver_tol = opt.solver_tol;
                acfg.norm = scfg;
                for (const index_t N : Ns) best.push_back(best_convex_approx(alpha, grid, N, acfg, opt.primes));
            }
            if (csv) {
                text = csv_header(hash) + diagnostic_csv(rows);
                for (const auto& b : best) {
                    text += "best," + std::to_string(b.N) + ',' + format_double(b.value) + '\n';
                }
            } else {
                json j = envelope(cmd_name, hash);
                j["fixture"] = alpha.id();
                j["grid"] = grid;
                j["prime_budget"] = opt.primes ? json(*opt.primes) : json(nullptr);
                j["norm_tol"] = opt.norm_tol;
                json table = json::array();
                for (const auto& row : rows) table.push_back({{"r", row.r}, {"N", row.N}, {"value", row.value}});
                j["table"] = table;
                if (!best.empty()) {
                    json approx = json::array();
                    for (const auto& b : best) {
                        json a = to_json(b);
                        a["norm"] = operator_norm(assemble(alpha, b.N, opt.primes), scfg).norm;
                        approx.push_back(a);
                    }
                    j["approximants"] = approx;
                    j["solver_tol"] = opt.solver_tol;
                    j["iterations"] = opt.iterations;
                }
                j["determinism"] = "deterministic: fixed start vectors and uniform initial weights, no random seeds";
                text = j.dump(2) + '\n';
            }
        } else if (cmd_name == "xnorm") {
            XNormConfig xcfg;
            xcfg.max_iterations = opt.xnorm_iterations;
            xcfg.gap_tol = opt.solver_tol;
            const XNormResult r = xnorm(parse_sequence_arg(xn_seq, opt.N), opt.N, xcfg, opt.primes);
            if (xn_matrix || csv) {
                text = (csv ? csv_header(hash) : std::string{}) + to_csv(r.matrix);
            } else {
                json j = envelope(cmd_name, hash);
                j["prime_budget"] = opt.primes ? json(*opt.primes) : json(nullptr);
                j["result"] = to_json(r);
                text = j.dump(2) + '\n';
            }
        } else if (cmd_name == "duality") {
            XNormConfig xcfg;
            xcfg.max_iterations = opt.xnorm_iterations;
            xcfg.gap_tol = opt.solver_tol;
            const Symbol alpha = fixtures::parse(dual_alpha);
            const DualityReport r = duality_gap(alpha, parse_sequence_arg(dual_c, opt.N), opt.N, xcfg, opt.primes, scfg);
            if (csv) {
                text = csv_header(hash) + "pairing,op_norm,xnorm,bound,ratio\n" + format_double(r.pairing) + ',' +
                       format_double(r.op_norm) + ',' + format_double(r.xnorm) + ',' + format_double(r.bound) + ',' +
                       format_double(r.ratio) + '\n';
            } else {
                json j = envelope(cmd_name, hash);
                j["alpha"] = alpha.id();
                j["N"] = opt.N;
                j["pairing"] = r.pairing;
                j["op_norm"] = r.op_norm;
                j["xnorm"] = r.xnorm;
                j["bound"] = r.bound;
                j["ratio"] = r.ratio;
                text = j.dump(2) + '\n';
            }
        } else if (cmd_name == "hs-sum") {
            const HsSumReport r = dilation_hs_sum(DilationParam{hs_r}, hs_tol);
            json j = envelope(cmd_name, hash);
            j["r"] = hs_r;
            j["partial_sum"] = r.partial_sum;
            j["product_form"] = r.product_form;
            j["terms_used"] = r.terms_used;
            text = j.dump(2) + '\n';
        }
        emit(opt, text);
        return 0;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << " (best estimate " << format_double(e.best_estimate())
                  << ")\n";
        mark_failure(opt, e.what());
        return kExitConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        mark_failure(opt, e.what());
        return kExitDomain;
    }
}
