#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "cocoonlab/cli.hpp"

using namespace cocoonlab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("cocoonlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string path(const char* name) const { return (dir / name).string(); }
    fs::path dir;
};

}  // namespace

TEST_F(CliTest, SpectrumOfThreeSiteRing) {
    const auto r = run({"spectrum", "--L", "3", "--q", "0", "--p", "0", "--g", "0"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "re,im");
    const double want[] = {-4.0, -1.0, -1.0};
    for (double w : want) {
        ASSERT_TRUE(std::getline(in, line));
        const auto comma = line.find(',');
        EXPECT_NEAR(parse_number(line.substr(0, comma)), w, 1e-13);
        EXPECT_EQ(line.substr(comma + 1), "0");
    }
    EXPECT_FALSE(std::getline(in, line));
}

TEST_F(CliTest, VerifySmallGridPasses) {
    const auto r = run({"verify", "--L", "4", "--grid", "small"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("summary:"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
    EXPECT_NE(r.out.find("open_bc_reality"), std::string::npos);
    EXPECT_NE(r.out.find("energy_negation"), std::string::npos);
}

TEST_F(CliTest, VerifyFullGridPasses) {
    const auto r = run({"verify", "--grid", "full", "--out", path("report.txt")});
    EXPECT_EQ(r.code, 0);
    const auto text = slurp(path("report.txt"));
    EXPECT_NE(text.find("over 100 parameter points"), std::string::npos);
}

TEST_F(CliTest, ButterflyDesktopScale) {
    const auto r = run({"butterfly", "--L", "50", "--g", "-0.25", "--out", path("b.csv"), "--svg", path("b.svg")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = slurp(path("b.csv"));
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    EXPECT_EQ(lines, 125000u + 1u);
    const auto svg = slurp(path("b.svg"));
    EXPECT_NE(svg.find("flux q/L"), std::string::npos);
}

TEST_F(CliTest, WorkerCountNeverChangesBytes) {
    for (const char* sub : {"butterfly", "cocoon"}) {
        const auto a = run({sub, "--L", "12", "--g", "0.3", "--workers", "1", "--out", path("a.csv"), "--svg",
                            path("a.svg")});
        const auto b = run({sub, "--L", "12", "--g", "0.3", "--workers", "8", "--out", path("b.csv"), "--svg",
                            path("b.svg")});
        ASSERT_EQ(a.code, 0);
        ASSERT_EQ(b.code, 0);
        EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
        EXPECT_EQ(slurp(path("a.svg")), slurp(path("b.svg")));
    }
}

TEST_F(CliTest, JsonFormatEchoesConfig) {
    const auto r = run({"butterfly", "--L", "4", "--q", "1", "--g", "0.5", "--format", "json"});
    ASSERT_EQ(r.code, 0);
    const auto d = parse_dataset_json(r.out);
    EXPECT_EQ(d.L, 4);
    EXPECT_EQ(d.g, 0.5);
    EXPECT_EQ(d.points.size(), 16u);
    EXPECT_NE(r.out.find("\"subcommand\": \"butterfly\""), std::string::npos);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
    {
        std::ofstream cfg(path("run.cfg"));
        cfg << "# desk run\nL = 5\ng=0.5\nboundary=open\n";
    }
    const auto a = run({"spectrum", "--config", path("run.cfg")});
    ASSERT_EQ(a.code, 0) << a.err;
    const auto direct = run({"spectrum", "--L", "5", "--g", "0.5", "--boundary", "open"});
    EXPECT_EQ(a.out, direct.out);
    const auto b = run({"spectrum", "--config", path("run.cfg"), "--L", "6"});
    std::size_t rows = 0;
    for (char c : b.out) rows += c == '\n';
    EXPECT_EQ(rows, 7u);
}

TEST_F(CliTest, FanAndPitchforkAndCriticalG) {
    const auto f = run({"fan", "--L", "8", "--q", "1", "--g-min", "0", "--g-max", "0.5", "--g-step", "0.25",
                        "--svg", path("fan.svg")});
    ASSERT_EQ(f.code, 0) << f.err;
    EXPECT_EQ(f.out.rfind("g,q,p,eigen_index,re,im\n", 0), 0u);
    EXPECT_TRUE(fs::exists(path("fan.svg")));

    const auto p = run({"pitchfork", "--L", "50", "--q", "1", "--g-min", "0.02", "--g-max", "0.027", "--g-step",
                        "0.001", "--svg", path("pf.svg")});
    ASSERT_EQ(p.code, 0) << p.err;
    EXPECT_EQ(p.out.rfind("g,track,re,im\n", 0), 0u);
    EXPECT_NE(slurp(path("pf.svg")).find(">Im E</text>"), std::string::npos);

    const auto c = run({"critical-g", "--L", "50", "--q", "1", "--max-events", "1"});
    ASSERT_EQ(c.code, 0) << c.err;
    std::istringstream in(c.out);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "g_lo,g_hi,g_critical,count_before,count_after,resolved,seed_re,seed_im");
    const auto fields = detail::split(row, ',');
    ASSERT_EQ(fields.size(), 8u);
    EXPECT_NEAR(parse_number(fields[2]), 0.023591374877207, 1e-6);
}

TEST_F(CliTest, NegativeValuesParse) {
    const auto a = run({"spectrum", "--L", "4", "--g", "-0.5"});
    const auto b = run({"spectrum", "--L", "4", "--g=-0.5"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"launch"}).code, 2);
    EXPECT_EQ(run({"spectrum", "--bogus", "1"}).code, 2);
    EXPECT_EQ(run({"spectrum", "--L", "two"}).code, 2);
    EXPECT_EQ(run({"spectrum", "--L", "2"}).code, 2);
    EXPECT_EQ(run({"spectrum", "--L", "4", "--p", "9"}).code, 2);
    EXPECT_EQ(run({"spectrum", "--boundary", "twisted"}).code, 2);
    EXPECT_EQ(run({"spectrum", "--potential", "lorentz"}).code, 2);
    EXPECT_EQ(run({"spectrum", "--format", "xml"}).code, 2);
    EXPECT_EQ(run({"butterfly", "--workers", "0"}).code, 2);
    EXPECT_EQ(run({"fan", "--tol-im", "-1"}).code, 2);
    EXPECT_EQ(run({"verify", "--grid", "huge"}).code, 2);
    EXPECT_EQ(run({"spectrum", "--config", path("missing.cfg")}).code, 2);
    const auto w = run({"spectrum", "--L", "4", "--out", (dir / "no" / "such" / "dir.csv").string()});
    EXPECT_EQ(w.code, 2);
    EXPECT_NE(w.err.find("cannot write"), std::string::npos);
}

TEST_F(CliTest, HelpExitsCleanly) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("butterfly"), std::string::npos);
}

TEST_F(CliTest, BinaryExitCodes) {
    const std::string cli = COCOONLAB_CLI_PATH;
    const auto status = [&](const std::string& args) {
        const int raw = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    EXPECT_EQ(status("spectrum --L 3"), 0);
    EXPECT_EQ(status("spectrum --nope"), 2);
    EXPECT_EQ(status("verify --L 4 --grid small"), 0);
}
