#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(HELSON_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "helson_cli_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

double json_value(const std::string& text, const nlohmann::json::json_pointer& ptr) {
    return nlohmann::json::parse(text).at(ptr).get<double>();
}

}  // namespace

TEST(Cli, Factor) {
    const RunResult r = run("factor 360");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "360 = 2^3 · 3^2 · 5, kappa=(3,2,1)\n");
    EXPECT_EQ(run("factor 1").out, "1 = 1, kappa=()\n");
}

TEST(Cli, ConvolveAndDilateFiles) {
    const auto a = scratch("a.json");
    const auto b = scratch("b.json");
    std::ofstream(a) << "[[2,1,0],[3,0,1]]";
    std::ofstream(b) << "[[2,1,0],[3,0,1]]";
    const RunResult c = run("convolve file:" + a.string() + " file:" + b.string());
    ASSERT_EQ(c.code, 0);
    EXPECT_EQ(c.out, "[[4,1.0,0.0],[9,1.0,0.0]]\n");

    const RunResult d = run("dilate 0.5 file:" + a.string());
    ASSERT_EQ(d.code, 0);
    EXPECT_EQ(d.out, "[[2,0.5,0.0],[3,0.0,0.25]]\n");
}

TEST(Cli, NormExamples) {
    using ptr = nlohmann::json::json_pointer;
    EXPECT_NEAR(json_value(run("norm delta:1 --N 8").out, ptr("/report/norm")), 1.0, 1e-12);
    EXPECT_NEAR(json_value(run("norm power:1 --N 2").out, ptr("/report/norm")), 1.25, 1e-12);
    const double n32 = json_value(run("norm mhilbert --N 32").out, ptr("/report/norm"));
    const double n64 = json_value(run("norm mhilbert --N 64").out, ptr("/report/norm"));
    const double n128 = json_value(run("norm mhilbert --N 128").out, ptr("/report/norm"));
    EXPECT_LT(n32, n64);
    EXPECT_LT(n64, n128);
}

TEST(Cli, XnormAndDuality) {
    using ptr = nlohmann::json::json_pointer;
    const std::string d1 = run("xnorm delta:1 --N 4").out;
    EXPECT_NEAR(json_value(d1, ptr("/result/value")), 1.0, 1e-6);
    EXPECT_LT(json_value(d1, ptr("/result/gap")), 1e-6);
    EXPECT_NEAR(json_value(run("xnorm delta:4 --N 4").out, ptr("/result/value")), 1.0, 1e-6);
    EXPECT_LE(json_value(run("duality power:1 delta:1 --N 4").out, ptr("/ratio")), 1.0 + 1e-6);
}

TEST(Cli, EssnormExamples) {
    const auto zeros = nlohmann::json::parse(run("essnorm delta:1 --N 8 --grid 0.5,0.9").out);
    for (const auto& row : zeros["table"]) EXPECT_EQ(row["value"].get<double>(), 0.0);
    for (const auto& a : zeros["approximants"]) EXPECT_EQ(a["value"].get<double>(), 0.0);

    const auto p = nlohmann::json::parse(run("essnorm power:1 --grid 'geometric(0.9,0.1,3)' --N 32").out);
    const auto& best = p["approximants"][0];
    EXPECT_LE(best["value"].get<double>(), 0.05 * best["norm"].get<double>());

    const auto m = nlohmann::json::parse(run("essnorm mhilbert --N 32,64").out);
    EXPECT_GE(m["approximants"][1]["value"].get<double>(), m["approximants"][0]["value"].get<double>() - 1e-9);
}

TEST(Cli, DeterministicOutputFiles) {
    const auto f1 = scratch("det1.json");
    const auto f2 = scratch("det2.json");
    const std::string args = "essnorm power:1 --N 16 --grid 0.8,0.95 --out ";
    ASSERT_EQ(run(args + f1.string()).code, 0);
    ASSERT_EQ(run(args + f2.string()).code, 0);
    const std::string s1 = slurp(f1);
    EXPECT_FALSE(s1.empty());
    EXPECT_EQ(s1, slurp(f2));
    EXPECT_NE(s1.find("\"config_hash\""), std::string::npos);
    EXPECT_NE(s1.find("\"schema\": 1"), std::string::npos);

    const auto c1 = scratch("det1.csv");
    const auto c2 = scratch("det2.csv");
    ASSERT_EQ(run("--format csv diagnostic power:1 --N 8,16 --out " + c1.string()).code, 0);
    ASSERT_EQ(run("--format csv diagnostic power:1 --N 8,16 --out " + c2.string()).code, 0);
    EXPECT_EQ(slurp(c1), slurp(c2));
    EXPECT_EQ(slurp(c1).rfind("# helson schema=1 config_hash=", 0), 0u);
}

TEST(Cli, ConfigHashTracksArguments) {
    const auto a = nlohmann::json::parse(run("norm power:1 --N 4").out);
    const auto b = nlohmann::json::parse(run("norm power:1 --N 5").out);
    EXPECT_NE(a["config_hash"], b["config_hash"]);
}

TEST(Cli, PrimeBudget) {
    const RunResult r = run("--primes 1 assemble delta:4 --N 16");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["header"]["indices"], nlohmann::json::parse("[1,2,4,8,16]"));
    EXPECT_EQ(j["header"]["prime_budget"], 1);
}

TEST(Cli, ExitCodesAndFailureMarker) {
    EXPECT_EQ(run("factor 0").code, 2);
    EXPECT_EQ(run("norm nosuch --N 4").code, 2);
    const auto seven = scratch("seven.json");
    std::ofstream(seven) << "[[7,1,0]]";
    EXPECT_EQ(run("xnorm file:" + seven.string() + " --N 6").code, 2);
    EXPECT_NE(run("").code, 0);
    EXPECT_EQ(run("--norm-tol 1e-3 norm power:1 --N 4").code, 2);
    EXPECT_EQ(run("xnorm random-decay:1,0.5 --N 3 --iterations 1").code, 0);

    const auto out = scratch("fail.json");
    std::filesystem::remove(out);
    std::filesystem::remove(out.string() + ".failed");
    EXPECT_EQ(run("norm delta:1 --N 0 --out " + out.string()).code, 2);
    EXPECT_FALSE(std::filesystem::exists(out));
    EXPECT_TRUE(std::filesystem::exists(out.string() + ".failed"));
}
