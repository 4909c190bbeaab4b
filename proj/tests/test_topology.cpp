#include <gtest/gtest.h>

#include <random>

#include "qwalk/closed_form.hpp"
#include "qwalk/scan.hpp"
#include "qwalk/topology.hpp"

using namespace qwalk;

namespace {

ProtocolSpec chs6(double alpha) { return make_protocol("1d-chs", {{Angle::alpha, alpha}, {Angle::beta, (alpha + pi) / 3}}, 6); }

ProtocolSpec phs2d(double beta) { return make_protocol("2d-phs", {{Angle::alpha, pi / 3}, {Angle::beta, beta}}, 2); }

ProtocolSpec nosym2d(double beta)
{
  return make_protocol("2d-nosym", {{Angle::alpha, pi / 3}, {Angle::beta, beta}, {Angle::gamma, pi / 4}}, 3);
}

}  // namespace

TEST(GapClosings, LinearChsBands)
{
  const auto s = make_protocol("1d-chs", {{Angle::alpha, 0}, {Angle::beta, 0}}, 1);
  const auto g = find_gap_closings(s, 64);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_NEAR(std::abs(g[0].k[0]), pi, 1e-9);
  EXPECT_EQ(g[0].quasi_energy, pi);
  EXPECT_NEAR(g[1].k[0], 0.0, 1e-9);
  EXPECT_EQ(g[1].quasi_energy, 0.0);
}

TEST(GapClosings, OffGridClosingIsRefined)
{
  // E = |k - shift| type closing away from mesh points: sweep alpha to a transition and check residual
  const auto s = make_protocol("1d-phs", {{Angle::alpha, pi / 2}, {Angle::beta, pi / 2}}, 1);
  for (const auto& gp : find_gap_closings(s, 37)) EXPECT_LE(gp.residual, eps_gap);
}

TEST(GapClosings, GappedConfigurationIsEmpty) { EXPECT_TRUE(find_gap_closings(phs2d(pi / 12), 64).empty()); }

TEST(GapClosings, NeedsResolution)
{
  EXPECT_THROW(find_gap_closings(phs2d(pi / 12), 16), std::invalid_argument);
}

TEST(Boundary, FlatBand)
{
  const auto s = make_protocol("3d-simple", {{Angle::beta, pi}}, 1);
  const auto bc = classify_boundary(s, find_gap_closings(s, 32), 32);
  EXPECT_EQ(bc.kind, BoundaryKind::flat_band);
  EXPECT_LE(bc.band_variation, eps_flat);
}

TEST(Boundary, LinearClosingIsDirac)
{
  const auto s = make_protocol("1d-chs", {{Angle::alpha, 0}, {Angle::beta, 0}}, 1);
  const auto bc = classify_boundary(s, find_gap_closings(s, 64));
  EXPECT_EQ(bc.kind, BoundaryKind::dirac_type_one);
  EXPECT_EQ(bc.gapless_set, "0,pi");
  for (const auto& per : bc.fits)
    for (const auto& f : per) EXPECT_NEAR(std::abs(f.slope), 1.0, 1e-6);
}

TEST(Boundary, PhsCaseOneIsDirac)
{
  // T alpha / 2 = pi/2 and T beta / 2 = pi/2: rho = -cos k
  const auto s = make_protocol("1d-phs", {{Angle::alpha, pi / 2}, {Angle::beta, pi / 2}}, 2);
  const auto g = find_gap_closings(s, 64);
  ASSERT_FALSE(g.empty());
  const auto bc = classify_boundary(s, g);
  EXPECT_TRUE(bc.kind == BoundaryKind::dirac_type_one || bc.kind == BoundaryKind::dirac_type_two);
}

TEST(Boundary, QuadraticClosingIsFermiArc)
{
  // rho = cos(2k) cos^2 - ... at alpha = 0: rho = kb cos 2k - 0, closes quadratically only when kb = +-1 and
  // the band touches from one side; use T = 2, beta = 0, alpha = 0 where rho = cos 2k (linear) as control and
  // alpha such that only the second-order term survives.
  const auto s = make_protocol("1d-phs", {{Angle::alpha, 0.0}, {Angle::beta, 0.0}}, 2);
  const auto bc = classify_boundary(s, find_gap_closings(s, 64));
  EXPECT_NE(bc.kind, BoundaryKind::fermi_arc);  // rho = cos 2k: four linear closings
  EXPECT_EQ(bc.gapless_set, "0,pi,pi/2");
}

TEST(Boundary, NothingToClassify)
{
  const auto s = phs2d(pi / 12);
  EXPECT_EQ(classify_boundary(s, {}, 32).kind, BoundaryKind::none);
}

TEST(FlatDetector, NeverFiresOnMomentumDependentBands)
{
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (const auto& id : closed_form_ids()) {
    for (int t = 0; t < 10; ++t) {
      const auto s = make_protocol(id, {{Angle::alpha, u(rng)}, {Angle::beta, u(rng)}, {Angle::gamma, u(rng)}, {Angle::zeta, u(rng)}},
                                   1 + t);
      const int n = s.dimension == 3 ? 12 : 32;
      // closed-form rho depends on k whenever two mesh samples differ
      double lo = 1e300, hi = -1e300;
      const std::size_t m = grid_points(s.dimension, n);
      for (std::size_t i = 0; i < m; ++i) {
        const double r = rho_closed(s, mesh_momentum(s.dimension, n, i));
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
      if (hi - lo > 1e-6) EXPECT_FALSE(is_flat(s, n)) << id;
    }
  }
}

TEST(Winding, Quantized)
{
  for (double a = -3.0; a <= 3.0; a += 0.25) {
    try {
      const auto w = winding_number(chs6(a), 256);
      EXPECT_TRUE(w.accepted);
      EXPECT_LE(std::abs(w.raw - w.w), quantization_tol);
      EXPECT_LE(std::abs(w.w), 1);
    } catch (const BoundaryStateError&) {
    }
  }
}

TEST(Winding, StableUnderGridDoubling)
{
  for (double a = -3.0; a <= 3.0; a += 0.25) {
    try {
      const auto w1 = winding_number(chs6(a), 256);
      const auto w2 = winding_number(chs6(a), 512);
      EXPECT_EQ(w1.w, w2.w);
      EXPECT_LE(std::abs(w1.raw - w2.raw), 1e-3);
    } catch (const BoundaryStateError&) {
    }
  }
}

TEST(Winding, SameMagnitudeForNegatedD)
{
  for (double a = -3.0; a <= 3.0; a += 0.5) {
    try {
      const auto w = winding_number(chs6(a), 256);
      const auto wm = winding_number(chs6(a), 256, true);
      EXPECT_EQ(std::abs(w.w), std::abs(wm.w));
      EXPECT_EQ(w.w, wm.w);  // -d is a half-turn in the chiral plane
    } catch (const BoundaryStateError&) {
    }
  }
}

TEST(Winding, TrivialWhenCoinsVanish)
{
  // alpha = beta = 0 closes the gap; a small beta opens a trivial loop
  const auto s = make_protocol("1d-chs", {{Angle::alpha, 0.0}, {Angle::beta, 0.3}}, 1);
  const auto w = winding_number(s, 256);
  EXPECT_TRUE(w.accepted);
}

TEST(Winding, OriginPassingLoopIsBoundary)
{
  const auto s = make_protocol("1d-chs", {{Angle::alpha, 0.0}, {Angle::beta, 0.0}}, 1);
  EXPECT_THROW(winding_number(s, 256), BoundaryStateError);
}

TEST(Winding, NeedsChiralProtocol)
{
  EXPECT_THROW(winding_number(make_protocol("1d-phs", {{Angle::alpha, 0.4}, {Angle::beta, 1.1}}, 3), 128),
               std::invalid_argument);
  EXPECT_THROW(winding_number(phs2d(0.3), 128), std::invalid_argument);
}

TEST(Winding, ConstantBetweenClosings)
{
  // along the fig6 sweep the winding only changes where the loop touches the origin
  std::optional<int> last;
  double last_a = 0;
  for (int i = 0; i <= 240; ++i) {
    const double a = -pi + 2 * pi * i / 240;
    try {
      const int w = winding_number(chs6(a), 256).w;
      if (last && *last != w) {
        // a closing must lie between the two samples
        bool found = false;
        for (int j = 1; j < 64 && !found; ++j) {
          const double b = last_a + (a - last_a) * j / 64;
          found = gap_metric(chs6(b), 256).min_d < 1e-2;
        }
        EXPECT_TRUE(found) << "winding changed between " << last_a << " and " << a;
      }
      last = w;
      last_a = a;
    } catch (const BoundaryStateError&) {
      last.reset();
    }
  }
}

TEST(Chern, PeriodCell)
{
  const auto c = chern_number(phs2d(pi / 4), 64);
  EXPECT_EQ(c.period[0], pi);
  EXPECT_EQ(c.period[1], pi);
  EXPECT_EQ(c.copies, 4);
}

TEST(Chern, QuantizedAndGridStable)
{
  for (double b : {pi / 12, pi / 4, pi / 2, 0.9, 2.5}) {
    for (const auto& s : {phs2d(b), nosym2d(b)}) {
      try {
        const auto c1 = chern_number(s, 64), c2 = chern_number(s, 128);
        EXPECT_TRUE(c1.accepted);
        EXPECT_EQ(c1.c, c2.c);
        EXPECT_LE(std::abs(c1.raw - c2.raw), 1e-3);
      } catch (const BoundaryStateError&) {
      }
    }
  }
}

TEST(Chern, BandsCancel)
{
  for (double b : {0.0, pi / 3, pi / 2}) {
    const auto plus = chern_number(nosym2d(b), 64), minus = chern_number(nosym2d(b), 64, true);
    EXPECT_NEAR(plus.raw + minus.raw, 0.0, 1e-9);
  }
}

TEST(Chern, BoundaryDetected)
{
  EXPECT_THROW(chern_number(phs2d(pi / 6), 64), BoundaryStateError);
  EXPECT_THROW(chern_number(nosym2d(pi / 4), 64), BoundaryStateError);
}

TEST(Chern, NeedsTwoDimensions)
{
  EXPECT_THROW(chern_number(chs6(0.3), 64), std::invalid_argument);
}

TEST(Trace, NosymSequence)
{
  const auto tr = phase_boundary_trace(nosym2d(0), Angle::beta, {0, pi / 4, pi / 3, 3 * pi / 4, pi / 2}, 64);
  ASSERT_EQ(tr.size(), 5u);
  EXPECT_TRUE(tr[0].gapped);
  EXPECT_EQ(*tr[0].invariant, 0);
  EXPECT_FALSE(tr[1].gapped);
  EXPECT_TRUE(tr[2].gapped);
  EXPECT_EQ(*tr[2].invariant, 0);
  EXPECT_FALSE(tr[3].gapped);
  EXPECT_TRUE(tr[4].gapped);
  EXPECT_EQ(std::abs(*tr[4].invariant), 1);
}

TEST(Sweep, BoundaryCountGrowsWithSteps)
{
  // gap-closing events along the fig1 and fig2 sweeps should increase strictly with T
  for (const char* f : {"fig1", "fig2"}) {
    auto c = load_config(std::string(QWALK_FIXTURE_DIR) + "/" + f + ".cfg");
    c.workers = 4;
    std::optional<int> prev;
    for (int T : c.steps) {
      int n = 0;
      for (const auto& e : sweep_events(c, T)) n += !e.gaps.empty();
      if (prev) EXPECT_GT(n, *prev) << f << " T = " << T;
      prev = n;
    }
  }
}
