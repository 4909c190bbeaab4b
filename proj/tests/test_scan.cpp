#include <gtest/gtest.h>

#include <cstdlib>
#include <set>
#include <sstream>

#include "qwalk/scan.hpp"

using namespace qwalk;

namespace {

SweepConfig chs_config()
{
  SweepConfig c;
  c.protocol = "1d-chs";
  c.angles["beta"] = "(alpha + pi)/3";
  c.sweep = parse_sweep("alpha:-pi:pi:9");
  c.grid = 32;
  return c;
}

}  // namespace

TEST(Expr, Arithmetic)
{
  EXPECT_DOUBLE_EQ(eval_expr("1 + 2 * 3"), 7);
  EXPECT_DOUBLE_EQ(eval_expr("(1 + 2) * 3"), 9);
  EXPECT_DOUBLE_EQ(eval_expr("-pi/2"), -pi / 2);
  EXPECT_DOUBLE_EQ(eval_expr("2*pi/3"), 2 * pi / 3);
  EXPECT_DOUBLE_EQ(eval_expr("1e-3"), 1e-3);
  EXPECT_DOUBLE_EQ(eval_expr("- -1"), 1);
  EXPECT_DOUBLE_EQ(eval_expr("pi/(2*T)", {{"T", 4}}), pi / 8);
}

TEST(Expr, Errors)
{
  for (const char* bad : {"", "1 +", "(1", "1)", "foo", "2 pi", "1/0x"}) EXPECT_THROW(eval_expr(bad), ExprError) << bad;
}

TEST(Config, ParsesAllKeys)
{
  const auto c = parse_config(YAML::Load(R"(
protocol: 1d-phs
description: test
steps: [2, 3]
angles: {beta: pi/3}
sweep: "alpha:-pi:pi:11"
grid: 128
phi: pi/4
workers: 3
)"));
  EXPECT_EQ(c.protocol, "1d-phs");
  EXPECT_EQ(c.steps, (std::vector<int>{2, 3}));
  EXPECT_EQ(c.angles.at("beta"), "pi/3");
  EXPECT_EQ(c.sweep->symbol, "alpha");
  EXPECT_EQ(c.sweep->count, 11);
  EXPECT_EQ(c.grid, 128);
  EXPECT_EQ(*c.phi, "pi/4");
  EXPECT_EQ(c.workers, 3);
  EXPECT_NO_THROW(validate_config(c));
}

TEST(Config, ScalarSteps)
{
  const auto c = parse_config(YAML::Load("protocol: 1d-chs\nsteps: 4\n"));
  EXPECT_EQ(c.steps, std::vector<int>{4});
}

TEST(Config, RejectsUnknownKey) { EXPECT_THROW(parse_config(YAML::Load("protocol: x\ncolour: red\n")), UsageError); }

TEST(Config, RejectsBadSweep)
{
  EXPECT_THROW(parse_sweep("alpha:0:1"), UsageError);
  EXPECT_THROW(parse_sweep("alpha:0:1:x"), UsageError);
}

TEST(Config, FixturesLoad)
{
  for (const char* f : {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig8b", "fig9", "fig10", "fig11"}) {
    const auto c = load_config(std::string(QWALK_FIXTURE_DIR) + "/" + f + ".cfg");
    EXPECT_NO_THROW(validate_config(c)) << f;
    EXPECT_NO_THROW(sweep_values(c)) << f;
  }
}

TEST(Validate, Errors)
{
  auto bad = [](auto mutate) {
    SweepConfig c = chs_config();
    mutate(c);
    EXPECT_THROW(validate_config(c), UsageError);
  };
  bad([](SweepConfig& c) { c.protocol = "4d-x"; });
  bad([](SweepConfig& c) { c.protocol.clear(); });
  bad([](SweepConfig& c) { c.steps = {0}; });
  bad([](SweepConfig& c) { c.grid = 4; });
  bad([](SweepConfig& c) { c.workers = 0; });
  bad([](SweepConfig& c) { c.angles["omega"] = "1"; });
  bad([](SweepConfig& c) { c.sweep.reset(); });
  bad([](SweepConfig& c) { c.sweep->symbol = "k"; });
  bad([](SweepConfig& c) { c.angles["alpha"] = "1"; });
  bad([](SweepConfig& c) { c.sweep->count = 1; });
  bad([](SweepConfig& c) {
    c.sweep = parse_sweep("T:1:4:4");
    c.steps = {1, 2};
  });
  bad([](SweepConfig& c) {
    c.step_independent = true;
    c.steps = {2};
  });
}

TEST(SweepValues, Linspace)
{
  auto c = chs_config();
  const auto v = sweep_values(c);
  ASSERT_EQ(v.size(), 9u);
  EXPECT_EQ(v.front(), -pi);
  EXPECT_EQ(v.back(), pi);
  EXPECT_DOUBLE_EQ(v[4], 0.0);
}

TEST(SweepValues, EmptyRange)
{
  auto c = chs_config();
  c.sweep = parse_sweep("alpha:1:1:5");
  EXPECT_THROW(sweep_values(c), UsageError);
}

TEST(SweepValues, StepSweepNeedsIntegers)
{
  auto c = chs_config();
  c.sweep = parse_sweep("T:1:6:6");
  c.angles = {{"beta", "pi/3"}};
  EXPECT_EQ(sweep_values(c), (std::vector<double>{1, 2, 3, 4, 5, 6}));
  c.sweep = parse_sweep("T:1:6:4");
  EXPECT_THROW(sweep_values(c), UsageError);
}

TEST(Resolve, DependentAngles)
{
  auto c = chs_config();
  c.steps = {6};
  const auto s = resolve_protocol(c, 0.5, 6);
  EXPECT_EQ(s.T, 6);
  EXPECT_DOUBLE_EQ(s.angle(Angle::alpha), 0.5);
  EXPECT_DOUBLE_EQ(s.angle(Angle::beta), (0.5 + pi) / 3);
}

TEST(Resolve, StepSweep)
{
  SweepConfig c;
  c.protocol = "2d-phs";
  c.angles = {{"alpha", "pi/T"}, {"beta", "pi/(2*T)"}};
  c.sweep = parse_sweep("T:1:4:4");
  const auto s = resolve_protocol(c, 3, 1);
  EXPECT_EQ(s.T, 3);
  EXPECT_DOUBLE_EQ(s.angle(Angle::alpha), pi / 3);
  EXPECT_DOUBLE_EQ(s.angle(Angle::beta), pi / 6);
}

TEST(Resolve, Errors)
{
  auto c = chs_config();
  c.angles["gamma"] = "1";  // not used by 1d-chs
  EXPECT_THROW(resolve_protocol(c, 0.1, 1), UsageError);
  c = chs_config();
  c.angles["beta"] = "gamma + 1";
  EXPECT_THROW(resolve_protocol(c, 0.1, 1), UsageError);
}

TEST(Format, RoundTrips)
{
  for (double x : {0.1, -pi, 1e-300, 123456.789, 2.0 / 3}) EXPECT_EQ(std::strtod(fmt(x).c_str(), nullptr), x);
  EXPECT_EQ(fmt(-0.0), "0");
  EXPECT_EQ(fmt(2.0), "2");
}

TEST(Parallel, OrderIndependentOfWorkers)
{
  auto f = [](std::size_t i) { return static_cast<int>(i * i); };
  EXPECT_EQ(parallel_map<int>(100, 1, f), parallel_map<int>(100, 7, f));
  EXPECT_TRUE(parallel_map<int>(0, 4, f).empty());
}

TEST(Parallel, LowestIndexExceptionWins)
{
  auto f = [](std::size_t i) -> int {
    if (i == 3 || i == 50) throw std::runtime_error(std::to_string(i));
    return 0;
  };
  try {
    parallel_map<int>(100, 8, f);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "3");
  }
}

TEST(Commands, BandsDeterministicAcrossWorkers)
{
  auto c = chs_config();
  const auto a = cmd_bands(c);
  c.workers = 4;
  const auto b = cmd_bands(c);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].content, b[0].content);
  std::istringstream in(a[0].content);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "sweep_param,k1,e_plus,v_k1,status");
  int rows = 0;
  for (std::string l; std::getline(in, l);) ++rows;
  EXPECT_EQ(rows, 9 * 32);
}

TEST(Commands, BandsRejectDoubled)
{
  SweepConfig c;
  c.protocol = "2d-aii";
  c.angles = {{"alpha", "0.3"}, {"gamma", "0.2"}};
  c.sweep = parse_sweep("beta:0:1:3");
  c.grid = 8;
  EXPECT_THROW(cmd_bands(c), UsageError);
}

TEST(Commands, StepOneMatchesStepIndependent)
{
  SweepConfig c;
  c.protocol = "2d-nosym";
  c.angles = {{"alpha", "pi/3"}, {"gamma", "pi/4"}};
  c.sweep = parse_sweep("beta:0:pi:5");
  c.grid = 16;
  const auto a = cmd_bands(c);
  const auto ia = cmd_invariant(c);
  c.step_independent = true;
  EXPECT_EQ(a[0].content, cmd_bands(c)[0].content);
  EXPECT_EQ(ia[0].content, cmd_invariant(c)[0].content);
}

TEST(Commands, InvariantRows)
{
  SweepConfig c;
  c.protocol = "2d-nosym";
  c.steps = {3};
  c.angles = {{"alpha", "pi/3"}, {"gamma", "pi/4"}};
  c.sweep = parse_sweep("beta:0:pi/4:2");
  const auto a = cmd_invariant(c);
  EXPECT_EQ(a[0].content.substr(0, a[0].content.find('\n')), "sweep_param,invariant,raw,status");
  EXPECT_NE(a[0].content.find("\n0,0,"), std::string::npos);
  EXPECT_NE(a[0].content.find(",,,boundary"), std::string::npos);
}

TEST(Commands, InvariantRejectsThreeDimensions)
{
  SweepConfig c;
  c.protocol = "3d-nosym";
  c.angles = {{"alpha", "0.1"}, {"gamma", "0.2"}, {"zeta", "0.3"}};
  c.sweep = parse_sweep("beta:0:1:3");
  EXPECT_THROW(cmd_invariant(c), UsageError);
}

TEST(Commands, SeveralStepsNameFiles)
{
  auto c = chs_config();
  c.steps = {2, 3};
  const auto a = cmd_bands(c);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].suffix, "_T2");
  EXPECT_EQ(a[1].suffix, "_T3");
  std::ostringstream os;
  EXPECT_THROW(write_artifacts(a, "", os), UsageError);
}

TEST(Golden, DiffReportsMismatches)
{
  const std::string gold = R"({"schema_version":1,"rows":[{"id":"1d-chs","P":0,"T":0,"C":1,"family":"AIII","invariant":"Z"}]})";
  SymmetryOptions o;
  o.ids = {"1d-chs"};
  EXPECT_TRUE(golden_diff(cmd_symmetry(o), gold).empty());
  o.ids = {"1d-phs"};
  EXPECT_FALSE(golden_diff(cmd_symmetry(o), gold).empty());
}

TEST(Golden, SymmetryDeterministicAcrossWorkers)
{
  SymmetryOptions o;
  const auto a = cmd_symmetry(o);
  o.workers = 4;
  EXPECT_EQ(a, cmd_symmetry(o));
}

TEST(Golden, UnknownIdIsUsageError)
{
  SymmetryOptions o;
  o.ids = {"5d-x"};
  EXPECT_THROW(run_symmetry(o), UsageError);
}

TEST(Events, ChsWithoutCoins)
{
  SweepConfig c;
  c.protocol = "1d-chs";
  c.angles = {{"beta", "0"}};
  c.sweep = parse_sweep("alpha:-0.5:0.7:13");  // alpha = 0 is a sample
  const auto ev = sweep_events(c, 1);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_NEAR(ev[0].value, 0.0, 1e-9);
  EXPECT_EQ(ev[0].cls.kind, BoundaryKind::dirac_type_one);
}

TEST(Commands, StepSweepGivesOneProfilePerStep)
{
  auto c = load_config(std::string(QWALK_FIXTURE_DIR) + "/fig7.cfg");
  const auto a = cmd_bands(c);
  ASSERT_EQ(a.size(), 1u);
  std::set<std::string> steps;
  std::istringstream in(a[0].content);
  std::string l;
  std::getline(in, l);
  int rows = 0;
  for (; std::getline(in, l); ++rows) steps.insert(l.substr(0, l.find(',')));
  EXPECT_EQ(steps, (std::set<std::string>{"1", "2", "3", "4", "5", "6"}));
  EXPECT_EQ(rows, 6 * c.grid);
}

TEST(Commands, FlatBandColumnIsConstant)
{
  SweepConfig c;
  c.protocol = "3d-simple";
  c.sweep = parse_sweep("beta:pi:3*pi:2");  // T beta = pi and 3 pi with T = 1; only the first is flat
  c.grid = 8;
  std::istringstream in(cmd_bands(c)[0].content);
  std::string l;
  std::getline(in, l);
  int flat = 0;
  while (std::getline(in, l)) {
    if (l.rfind(fmt(pi) + ",", 0) != 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(l);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    EXPECT_NEAR(std::stod(f[4]), pi / 2, 1e-8);
    ++flat;
  }
  EXPECT_EQ(flat, 8 * 8 * 8);
}

TEST(Events, GappedSweepHasNone)
{
  SweepConfig c;
  c.protocol = "2d-phs";
  c.steps = {2};
  c.angles = {{"alpha", "pi/3"}};
  c.sweep = parse_sweep("beta:0.2:0.3:5");
  c.grid = 32;
  EXPECT_TRUE(sweep_events(c, 2).empty());
}
