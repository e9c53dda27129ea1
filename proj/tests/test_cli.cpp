#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "complasso/cli.hpp"
#include "complasso/io.hpp"
#include "complasso/rng.hpp"
#include "json.hpp"

using namespace complasso;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string log;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream log, err;
  const int code = cli::run(args, log, err);
  return {code, log.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("complasso_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

// p = 10 taxa in groups of 5, n = 100, seed 7. True support {0, 1, 5, 6} with
// strong effects; log counts i.i.d. normal, noise sd 0.3.
const std::vector<int> kSupport = {0, 1, 5, 6};

std::string fixture_csv(bool with_zero = false) {
  RandomStream r(7, 0);
  const double beta[10] = {1.5, -1.5, 0, 0, 0, 1.2, -1.2, 0, 0, 0};
  std::ostringstream out;
  out << "sample,response";
  for (int j = 0; j < 10; ++j) out << ",t" << j + 1;
  out << "\n";
  out.precision(17);
  for (int i = 0; i < 100; ++i) {
    double w[10], total = 0;
    for (double& v : w) v = std::exp(r.normal()), total += v;
    double y = 0;
    for (int j = 0; j < 10; ++j) y += beta[j] * std::log(w[j] / total);
    y += 0.3 * r.normal();
    out << "s" << i + 1 << "," << y;
    for (int j = 0; j < 10; ++j) out << "," << ((with_zero && i == 3 && j == 2) ? 0.0 : w[j] / total);
    out << "\n";
  }
  return out.str();
}

}  // namespace

TEST_F(CliTest, FitRecoversSupport) {
  io::write_text(path("data.csv"), fixture_csv());
  const CliRun r = run({"fit", "--input", path("data.csv"), "--groups", "5,5", "--out", path("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string sel = io::read_text(path("out/selection.txt"));
  EXPECT_EQ(sel, "t1\nt2\nt6\nt7\n");
  const auto j = nlohmann::json::parse(io::read_text(path("out/estimates.json")));
  EXPECT_EQ(j["schema"], io::kEstimatesSchema);
  EXPECT_EQ(j["coefficients"].size(), 10u);
  EXPECT_GT(j["sigma_hat"].get<double>(), 0.2);
  EXPECT_LT(j["sigma_hat"].get<double>(), 0.45);
  const auto t = io::read_csv(path("out/inference.csv"));
  EXPECT_EQ(t.rows.size(), 10u);
}

TEST_F(CliTest, ZeroWithoutPseudoIsInputError) {
  io::write_text(path("data.csv"), fixture_csv(true));
  CliRun r = run({"fit", "--input", path("data.csv"), "--groups", "5,5", "--out", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--pseudo"), std::string::npos) << r.err;
  r = run({"fit", "--input", path("data.csv"), "--groups", "5,5", "--pseudo", "0.0001", "--out", path("out")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(CliTest, SmallerAlphaGivesWiderIntervals) {
  io::write_text(path("data.csv"), fixture_csv());
  ASSERT_EQ(run({"fit", "--input", path("data.csv"), "--groups", "5,5", "--alpha", "0.05", "--out", path("a")}).code, 0);
  ASSERT_EQ(run({"fit", "--input", path("data.csv"), "--groups", "5,5", "--alpha", "0.01", "--out", path("b")}).code, 0);
  const auto a = io::read_csv(path("a/inference.csv"));
  const auto b = io::read_csv(path("b/inference.csv"));
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const double wa = std::stod(a.rows[i][5]) - std::stod(a.rows[i][4]);
    const double wb = std::stod(b.rows[i][5]) - std::stod(b.rows[i][4]);
    EXPECT_GT(wb, wa);
  }
}

TEST_F(CliTest, MalformedInputs) {
  io::write_text(path("bad.csv"), "response,a,b\n1,2,3\n1,oops,3\n1,2,3\n");
  CliRun r = run({"fit", "--input", path("bad.csv"), "--out", path("out")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":3"), std::string::npos) << r.err;
  EXPECT_EQ(run({"fit", "--input", path("missing.csv")}).code, 2);
  io::write_text(path("data.csv"), fixture_csv());
  EXPECT_EQ(run({"fit", "--input", path("data.csv"), "--groups", "4,4"}).code, 2);
  EXPECT_EQ(run({"fit", "--input", path("data.csv"), "--alpha", "1.5"}).code, 2);
  EXPECT_EQ(run({"fit"}).code, 2);
  EXPECT_EQ(run({"nonsense"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST_F(CliTest, HelpExitsCleanly) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.log.find("simulate"), std::string::npos);
}

TEST_F(CliTest, SimulateIsByteIdentical) {
  const std::vector<std::string> base = {"simulate", "--cell", "zeta=0.2,p=50,n=100", "--reps", "5", "--seed", "1"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a")});
  b.insert(b.end(), {"--out", path("b"), "--threads", "3"});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  for (const char* f : {"table1.csv", "table2.csv", "coverage.csv", "lengths.csv", "report.json"}) {
    EXPECT_EQ(io::read_text(path(std::string("a/") + f)), io::read_text(path(std::string("b/") + f))) << f;
  }
  const auto t1 = io::read_csv(path("a/table1.csv"));
  ASSERT_EQ(t1.rows.size(), 1u);
  EXPECT_EQ(t1.rows[0][0], "0.2");
  for (std::size_t k = 3; k < t1.rows[0].size(); ++k) EXPECT_FALSE(t1.rows[0][k].empty());
}

TEST_F(CliTest, SimulateRejectsBadGrid) {
  EXPECT_EQ(run({"simulate", "--out", path("o")}).code, 2);
  EXPECT_EQ(run({"simulate", "--grid", "other", "--out", path("o")}).code, 2);
  EXPECT_EQ(run({"simulate", "--cell", "zeta=0.2,p=30,n=50", "--out", path("o")}).code, 2);
  EXPECT_EQ(run({"simulate", "--cell", "zeta=0.2,p=50,n=50", "--modes", "some", "--out", path("o")}).code, 2);
}

TEST_F(CliTest, DiagnoseSingleGroup) {
  ASSERT_EQ(run({"diagnose", "--groups", "45", "--out", path("d")}).code, 0);
  const auto j = nlohmann::json::parse(io::read_text(path("d/conditions.json")));
  EXPECT_EQ(j["schema"], io::kConditionsSchema);
  EXPECT_NEAR(j["k0_observed"].get<double>(), 2.0 * 44 / 45, 1e-12);
  EXPECT_NEAR(j["cond2_min_diag"].get<double>(), 44.0 / 45, 1e-12);
}

TEST_F(CliTest, DiagnoseConditionTwoMonotone) {
  double prev = 0;
  for (int m = 2; m <= 10; ++m) {
    ASSERT_EQ(run({"diagnose", "--groups", std::to_string(m), "--out", path("d")}).code, 0);
    const double v = nlohmann::json::parse(io::read_text(path("d/conditions.json")))["cond2_min_diag"];
    EXPECT_NEAR(v, 1.0 - 1.0 / m, 1e-12);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST_F(CliTest, DiagnoseBudgetRefusal) {
  const CliRun r = run({"diagnose", "--groups", "100", "--rip-k", "4", "--out", path("d")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("cap"), std::string::npos) << r.err;
}

TEST_F(CliTest, DiagnoseSimulatedDesign) {
  const CliRun r = run({"diagnose", "--cell", "zeta=0.2,p=50,n=100", "--rip-k", "2", "--roc-k", "1", "1", "--out",
                     path("d")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(io::read_text(path("d/conditions.json")));
  EXPECT_EQ(j["group_sizes"].size(), 8u);
  EXPECT_LE(j["rip"]["lower"].get<double>(), j["rip"]["upper"].get<double>());
  EXPECT_LE(j["roc"]["theta"].get<double>(),
            0.5 * (j["rip"]["upper"].get<double>() - j["rip"]["lower"].get<double>()) + 1e-12);
  EXPECT_GT(j["eigen_bounds"]["min"].get<double>(), 0.0);
}

TEST_F(CliTest, DiagnoseDataDesign) {
  io::write_text(path("data.csv"), fixture_csv());
  ASSERT_EQ(run({"diagnose", "--input", path("data.csv"), "--groups", "5,5", "--rip-k", "3", "--out", path("d")}).code,
            0);
  const auto j = nlohmann::json::parse(io::read_text(path("d/conditions.json")));
  EXPECT_NEAR(j["k0_observed"].get<double>(), 1.6, 1e-12);
  EXPECT_TRUE(j.contains("rip"));
}
