#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("gpls_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    // Runs the binary and returns its exit status; stderr goes to err.txt.
    int run(const std::string& args) const {
        const std::string cmd = std::string(GPLS_CLI_PATH) + " " + args + " > " + path("out.txt") + " 2> " + path("err.txt");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    std::string stderr_text() const { return slurp(path("err.txt")); }
    std::string stdout_text() const { return slurp(path("out.txt")); }

    static std::size_t count_lines(const std::string& text) {
        return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SampleIsDeterministic) {
    ASSERT_EQ(run("sample --surface torus --params R=0.5,r=0.3 --n 100 --seed 7 --out " + path("a.xyzn")), 0);
    ASSERT_EQ(run("sample --surface torus --params R=0.5,r=0.3 --n 100 --seed 7 --out " + path("b.xyzn")), 0);
    const std::string a = slurp(path("a.xyzn"));
    EXPECT_EQ(count_lines(a), 100u);
    EXPECT_EQ(a, slurp(path("b.xyzn")));
    std::istringstream first(a);
    double v[6];
    for (double& x : v) first >> x;
    EXPECT_TRUE(first);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("sample --surface torus --n 0 --out " + path("x")), 2);
    EXPECT_EQ(run("sample --surface dodecahedron --n 5 --out " + path("x")), 2);
    EXPECT_EQ(run("no-such-command"), 2);
    EXPECT_EQ(run("bench --table 7"), 2);
    EXPECT_FALSE(fs::exists(path("x")));
}

TEST_F(Cli, FitVarietyEvalAndExport) {
    ASSERT_EQ(run("sample --surface sphere --n 60 --seed 1 --out " + path("s.xyzn")), 0);
    ASSERT_EQ(run("fit-variety --points " + path("s.xyzn") + " --degree 2 --out " + path("fit.json")), 0);
    EXPECT_NE(stderr_text().find("corank 1"), std::string::npos);
    const auto j = nlohmann::json::parse(slurp(path("fit.json")));
    EXPECT_EQ(j["n"], 2);
    EXPECT_EQ(j["coefficients"].size(), 11u);  // A_{3,2,2} includes (1,1,1)

    ASSERT_EQ(run("eval --surface " + path("fit.json") + " --points " + path("s.xyzn") + " --out " + path("e.json")), 0);
    EXPECT_EQ(stdout_text().rfind("E_inf ", 0), 0u);
    const auto e = nlohmann::json::parse(slurp(path("e.json")));
    EXPECT_LE(e["E_inf"].get<double>(), 1e-12);

    ASSERT_EQ(run("grid-export --surface " + path("fit.json") + " --res 4 --out " + path("g.vtk")), 0);
    EXPECT_EQ(count_lines(slurp(path("g.vtk"))), 10u + 64u);
    EXPECT_EQ(run("grid-export --surface " + path("fit.json") + " --res 1 --out " + path("h.vtk")), 2);

    ASSERT_EQ(run("fit-variety --points " + path("s.xyzn") + " --degree 2 --mode lagrange-sum --out " + path("l.json")), 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(path("l.json")))["fit_report"]["mode"], "lagrange-sum");
}

TEST_F(Cli, FitVarietyFailures) {
    // 8 points cannot pin down a quadric: the kernel is three-dimensional.
    ASSERT_EQ(run("sample --surface sphere --n 8 --seed 1 --out " + path("s.xyzn")), 0);
    EXPECT_EQ(run("fit-variety --points " + path("s.xyzn") + " --degree 2 --out " + path("f.json")), 4);
    // Generic points in the cube are unisolvent for degree 1: no variety.
    std::ofstream(path("cloud.xyz")) << "0 0 0\n1 0 0\n0 1 0\n0 0 1\n0.3 0.7 0.1\n";
    EXPECT_EQ(run("fit-variety --points " + path("cloud.xyz") + " --degree 1 --out " + path("f.json")), 4);
    EXPECT_FALSE(fs::exists(path("f.json")));
    std::ofstream(path("bad.xyz")) << "1 2\n";
    EXPECT_EQ(run("fit-variety --points " + path("bad.xyz") + " --degree 1 --out " + path("f.json")), 3);
}

TEST_F(Cli, FitSdf) {
    std::ofstream(path("plain.xyz")) << "0 0 1\n1 0 0\n0 1 0\n";
    EXPECT_EQ(run("fit-sdf --points " + path("plain.xyz") + " --out " + path("f.json")), 3);
    EXPECT_NE(stderr_text().find("normal"), std::string::npos);

    ASSERT_EQ(run("sample --surface sphere --n 200 --seed 1 --out " + path("s.xyzn")), 0);
    ASSERT_EQ(run("fit-sdf --points " + path("s.xyzn") + " --degree 2 --offsets 0.01 --out " + path("f.json")), 0);
    EXPECT_EQ(nlohmann::json::parse(slurp(path("f.json")))["fit_report"]["mode"], "signed-distance");
    EXPECT_EQ(run("fit-sdf --points " + path("s.xyzn") + " --degree 2 --offsets '' --out " + path("g.json")), 4);
    EXPECT_NE(stderr_text().find("no offsets"), std::string::npos);
    EXPECT_NE(stderr_text().find("gradient vanishes"), std::string::npos);
}

TEST_F(Cli, Curvature) {
    ASSERT_EQ(run("sample --surface torus --n 200 --seed 1 --out " + path("t.xyzn")), 0);
    ASSERT_EQ(run("fit-variety --points " + path("t.xyzn") + " --degree 4 --out " + path("fit.json")), 0);
    ASSERT_EQ(run("curvature --surface " + path("fit.json") + " --points " + path("t.xyzn") +
                  " --oracle torus --out " + path("c.csv")),
              0);
    const std::string csv = slurp(path("c.csv"));
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "x,y,z,grad_norm,k_mean,k_gauss,oracle_k_mean,err_k_mean,oracle_k_gauss,err_k_gauss");
    EXPECT_EQ(count_lines(csv), 201u);
    const auto summary = nlohmann::json::parse(slurp(path("c.json")));
    EXPECT_LE(summary["errors"]["k_mean"]["linf"].get<double>(), 1e-8);

    ASSERT_EQ(run("curvature --surface " + path("fit.json") + " --points " + path("t.xyzn") +
                  " --laplacian --out " + path("l.csv") + " --summary " + path("l_summary.json")),
              0);
    const std::string lap = slurp(path("l.csv"));
    EXPECT_EQ(lap.substr(0, lap.find('\n')), "x,y,z,grad_norm,k_mean,k_gauss,lap_k_mean");
    EXPECT_TRUE(fs::exists(path("l_summary.json")));

    EXPECT_EQ(run("curvature --surface " + path("fit.json") + " --points " + path("t.xyzn") +
                  " --oracle klein --out " + path("k.csv")),
              2);
    EXPECT_NE(stderr_text().find("non-orientable"), std::string::npos);
}

TEST_F(Cli, EmptyPointFile) {
    ASSERT_EQ(run("sample --surface sphere --n 20 --seed 1 --out " + path("s.xyzn")), 0);
    ASSERT_EQ(run("fit-variety --points " + path("s.xyzn") + " --degree 2 --out " + path("fit.json")), 0);
    std::ofstream(path("empty.xyz")) << "# no points\n";
    EXPECT_EQ(run("eval --surface " + path("fit.json") + " --points " + path("empty.xyz") + " --out " + path("e.json")), 2);
}

TEST_F(Cli, BenchTableThree) {
    ASSERT_EQ(run("bench --table 3 --config " + std::string(GPLS_BENCH_CONFIG) + " --out " + path("b.csv")), 0);
    const std::string csv = slurp(path("b.csv"));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "surface,params,N,degree,lp,metric,measured,paper_value,tolerance,pass");
    std::istringstream in(csv);
    std::size_t lap_rows = 0;
    for (std::string line; std::getline(in, line);)
        if (line.find(",lap_k_mean,") != std::string::npos) {
            ++lap_rows;
            EXPECT_EQ(line.substr(0, 10), "ellipsoid,");
            EXPECT_EQ(line.substr(line.size() - 4), "true");
        }
    EXPECT_EQ(lap_rows, 3u);
}
