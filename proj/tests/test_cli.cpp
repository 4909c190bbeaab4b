// Black-box runs of the qwalk-scan binary.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args)
{
  const std::string cmd = std::string(QWALK_SCAN_BIN) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

const std::string fixtures = QWALK_FIXTURE_DIR;

}  // namespace

TEST(Cli, NoSubcommandIsUsage) { EXPECT_EQ(run("").code, 2); }

TEST(Cli, BandsHeader)
{
  const auto r = run("bands --protocol 2d-phs --set alpha=pi/3 --sweep beta:0:pi:3 --grid 8");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "sweep_param,k1,k2,e_plus,v_k1,v_k2,status");
}

TEST(Cli, EmptySweepRange) { EXPECT_EQ(run("bands --protocol 1d-chs --set beta=0 --sweep alpha:1:1:4").code, 2); }

TEST(Cli, UnknownProtocol) { EXPECT_EQ(run("bands --protocol 9d-x --sweep alpha:0:1:4").code, 2); }

TEST(Cli, BadExpression) { EXPECT_EQ(run("bands --protocol 1d-chs --set beta=pi/ --sweep alpha:0:1:4").code, 2); }

TEST(Cli, UnknownFlag) { EXPECT_EQ(run("bands --frobnicate").code, 2); }

TEST(Cli, ThreeDimensionalInvariant)
{
  EXPECT_EQ(run("invariant --protocol 3d-simple --sweep beta:0:1:3").code, 2);
}

TEST(Cli, MissingConfig) { EXPECT_EQ(run("bands /nonexistent.cfg").code, 2); }

TEST(Cli, SeveralStepsWithoutOut) { EXPECT_EQ(run("bands " + fixtures + "/fig3.cfg --grid 8").code, 2); }

TEST(Cli, InvariantFixture)
{
  const auto r = run("invariant " + fixtures + "/fig11.cfg");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "sweep_param,invariant,raw,status");
}

TEST(Cli, WorkersDoNotChangeOutput)
{
  const auto a = run("invariant " + fixtures + "/fig10.cfg --workers 1");
  const auto b = run("invariant " + fixtures + "/fig10.cfg --workers 4");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SymmetryGolden)
{
  EXPECT_EQ(run("symmetry 1d-chs 2d-nosym --golden").code, 0);
  const std::string wrong = testing::TempDir() + "golden_wrong.json";
  {
    std::ofstream f(wrong);
    f << R"({"schema_version":1,"rows":[{"id":"1d-chs","P":1,"T":0,"C":1,"family":"BDI","invariant":"Z"}]})";
  }
  EXPECT_EQ(run("symmetry 1d-chs --golden --golden-file " + wrong).code, 1);
  EXPECT_EQ(run("symmetry 1d-chs --golden --golden-file /nonexistent.json").code, 2);
}

TEST(Cli, SymmetryUnknownId) { EXPECT_EQ(run("symmetry 7d-q").code, 2); }

TEST(Cli, ClassifyGapsJson)
{
  const auto r = run("classify-gaps --protocol 1d-chs --set beta=0 --sweep alpha:-0.5:0.7:13");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"dirac_type_one\""), std::string::npos);
  EXPECT_NE(r.out.find("\"schema_version\": 1"), std::string::npos);
}
