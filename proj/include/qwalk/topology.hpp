#ifndef QWALK_TOPOLOGY_HPP
#define QWALK_TOPOLOGY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/linalg.hpp"
#include "qwalk/protocol.hpp"
#include "qwalk/spectrum.hpp"
#include "qwalk/symmetry.hpp"

namespace qwalk {

inline constexpr double eps_flat = 1e-8;
inline constexpr double fit_window = 0.05;
inline constexpr double dirac_slope_min = 0.1;
inline constexpr double dirac_fit_tol = 1e-9;
inline constexpr double quantization_tol = 0.02;
inline constexpr double gap_merge_tol = 1e-6;

struct BoundaryStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GapPoint {
  Momentum k;
  double quasi_energy = 0;  // 0 or pi
  double residual = 0;      // ||d|| at k
};

enum class BoundaryKind { none, dirac_type_one, dirac_type_two, fermi_arc, flat_band, unclassified };

inline const char* boundary_kind_name(BoundaryKind k)
{
  switch (k) {
    case BoundaryKind::none: return "none";
    case BoundaryKind::dirac_type_one: return "dirac_type_one";
    case BoundaryKind::dirac_type_two: return "dirac_type_two";
    case BoundaryKind::fermi_arc: return "fermi_arc";
    case BoundaryKind::flat_band: return "flat_band";
    case BoundaryKind::unclassified: return "unclassified";
  }
  return "?";
}

struct ClosingFit {
  int axis = 0;
  double slope = 0;     // coefficient of |s|
  double curve = 0;     // coefficient of s^2
  double residual = 0;  // max deviation of the fit
  bool linear = false;
};

struct BoundaryClassification {
  BoundaryKind kind = BoundaryKind::none;
  std::vector<std::vector<ClosingFit>> fits;  // per gap point, per axis
  double band_variation = 0;                  // max - min of e_plus over the scan grid
  std::string gapless_set;
};

struct WindingResult {
  int w = 0;
  double raw = 0;
  Vec3 axis;
  bool accepted = false;
};

struct ChernResult {
  int c = 0;
  double raw = 0;
  std::array<double, 2> period{2 * pi, 2 * pi};  // primitive period of U(k) along each axis
  int copies = 1;                                // primitive cells per [-pi, pi)^2
  bool accepted = false;
};

// ---------------------------------------------------------------------------
// helpers

inline double wrap_pm_pi(double x)
{
  x = std::remainder(x, 2 * pi);
  if (x <= -pi) x += 2 * pi;
  if (x > pi) x -= 2 * pi;
  return x;
}

inline double dnorm(const ProtocolSpec& s, const Momentum& k) { return norm(band_point(s, k).dec.d); }

/// Standard mesh k_i = -pi + 2 pi i / n along each axis.
inline Momentum mesh_momentum(int dim, int n, std::size_t idx)
{
  Momentum k;
  k.n = dim;
  for (int a = 0; a < dim; ++a) {
    k[a] = -pi + 2 * pi * static_cast<double>(idx % n) / n;
    idx /= n;
  }
  return k;
}

namespace detail {

/// Damped Gauss-Newton on d(k) = 0 starting from k.
inline Momentum refine_closing(const ProtocolSpec& s, Momentum k)
{
  const int D = s.dimension;
  auto dvec = [&](const Momentum& q) { return band_point(s, q).dec.d; };
  Vec3 f = dvec(k);
  double fn = norm(f);
  double mu = 1e-6;
  for (int it = 0; it < 100 && fn > 1e-15; ++it) {
    std::array<Vec3, 3> J{};
    for (int a = 0; a < D; ++a) {
      const double h = 1e-7;
      Momentum kp = k, km = k;
      kp[a] += h;
      km[a] -= h;
      J[a] = (0.5 / h) * (dvec(kp) - dvec(km));
    }
    // normal equations (J^T J + mu I) dk = -J^T f
    double A[3][3] = {}, b[3] = {};
    for (int p = 0; p < D; ++p) {
      b[p] = -dot(J[p], f);
      for (int q = 0; q < D; ++q) A[p][q] = dot(J[p], J[q]);
      A[p][p] += mu * (1 + A[p][p]);
    }
    // Gaussian elimination, D <= 3
    double x[3] = {};
    {
      double M[3][4];
      for (int p = 0; p < D; ++p) {
        for (int q = 0; q < D; ++q) M[p][q] = A[p][q];
        M[p][3] = b[p];
      }
      bool ok = true;
      for (int c = 0; c < D && ok; ++c) {
        int piv = c;
        for (int r = c + 1; r < D; ++r)
          if (std::abs(M[r][c]) > std::abs(M[piv][c])) piv = r;
        if (std::abs(M[piv][c]) < 1e-300) {
          ok = false;
          break;
        }
        for (int q = 0; q < 4; ++q) std::swap(M[c][q], M[piv][q]);
        for (int r = 0; r < D; ++r) {
          if (r == c) continue;
          const double fct = M[r][c] / M[c][c];
          for (int q = c; q < 4; ++q) M[r][q] -= fct * M[c][q];
        }
      }
      if (!ok) break;
      for (int p = 0; p < D; ++p) x[p] = M[p][3] / M[p][p];
    }
    Momentum kn = k;
    for (int a = 0; a < D; ++a) kn[a] += x[a];
    const Vec3 fnew = dvec(kn);
    const double nn = norm(fnew);
    if (nn < fn) {
      k = kn;
      f = fnew;
      fn = nn;
      mu = std::max(mu * 0.1, 1e-15);
    } else {
      mu *= 10;
      if (mu > 1e8) break;
    }
  }
  for (int a = 0; a < D; ++a) k[a] = wrap_pm_pi(k[a]);
  return k;
}

inline double periodic_distance(const Momentum& a, const Momentum& b)
{
  double m = 0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, std::abs(wrap_pm_pi(a[i] - b[i])));
  return m;
}

}  // namespace detail

/// Gap closings of a two-band protocol: coarse mesh scan for local minima of ||d||, refined to ||d|| <= eps_gap.
inline std::vector<GapPoint> find_gap_closings(const ProtocolSpec& s, int grid_n)
{
  if (grid_n < 32) throw std::invalid_argument("find_gap_closings needs at least 32 points per axis");
  if (s.bands() != 2) throw std::invalid_argument("gap closings are computed for two-band protocols");
  const int D = s.dimension;
  const std::size_t m = grid_points(D, grid_n);
  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) g[i] = dnorm(s, mesh_momentum(D, grid_n, i));
  const double step = 2 * pi / grid_n;
  std::vector<GapPoint> out;
  for (std::size_t i = 0; i < m; ++i) {
    bool is_min = true;
    std::size_t stride = 1;
    for (int a = 0; a < D && is_min; ++a) {
      const std::size_t ia = (i / stride) % grid_n;
      const std::size_t up = i - ia * stride + ((ia + 1) % grid_n) * stride;
      const std::size_t dn = i - ia * stride + ((ia + grid_n - 1) % grid_n) * stride;
      if (g[up] < g[i] || g[dn] < g[i]) is_min = false;
      stride *= grid_n;
    }
    if (!is_min || g[i] > 4 * step * (s.T + 4)) continue;
    Momentum k = mesh_momentum(D, grid_n, i);
    if (g[i] > eps_gap) k = detail::refine_closing(s, k);
    const BandPoint bp = band_point(s, k);
    const double r = norm(bp.dec.d);
    if (r > eps_gap) continue;
    bool dup = false;
    for (const auto& p : out)
      if (detail::periodic_distance(p.k, k) <= gap_merge_tol) dup = true;
    if (dup) continue;
    out.push_back({k, bp.dec.d0 > 0 ? 0.0 : pi, r});
  }
  std::sort(out.begin(), out.end(), [](const GapPoint& a, const GapPoint& b) {
    for (int i = 0; i < a.k.size(); ++i)
      if (a.k[i] != b.k[i]) return a.k[i] < b.k[i];
    return false;
  });
  return out;
}

/// Smallest refined ||d|| over the BZ: 0 up to eps_gap when the gap closes.
inline double gap_size(const ProtocolSpec& s, int grid_n)
{
  const int D = s.dimension;
  const std::size_t m = grid_points(D, grid_n);
  double best = 1e300;
  std::size_t bi = 0;
  std::vector<double> g(m);
  for (std::size_t i = 0; i < m; ++i) {
    g[i] = dnorm(s, mesh_momentum(D, grid_n, i));
    if (g[i] < best) {
      best = g[i];
      bi = i;
    }
  }
  if (best <= eps_gap) return best;
  const auto cl = find_gap_closings(s, std::max(grid_n, 32));
  if (!cl.empty()) return cl.front().residual;
  const Momentum k = detail::refine_closing(s, mesh_momentum(D, grid_n, bi));
  return std::min(best, dnorm(s, k));
}

namespace detail {

inline ClosingFit fit_closing(const ProtocolSpec& s, const GapPoint& gp, int axis)
{
  const int ns = 41;
  double Saa = 0, Sab = 0, Sbb = 0, Sya = 0, Syb = 0;
  std::vector<std::array<double, 3>> rows;
  for (int i = 0; i < ns; ++i) {
    const double sv = -fit_window + 2 * fit_window * i / (ns - 1);
    Momentum k = gp.k;
    k[axis] += sv;
    const double e = e_plus(s, k);
    const double y = gp.quasi_energy == 0.0 ? e : pi - e;
    const double a = std::abs(sv), b = sv * sv;
    rows.push_back({a, b, y});
    Saa += a * a;
    Sab += a * b;
    Sbb += b * b;
    Sya += y * a;
    Syb += y * b;
  }
  const double det = Saa * Sbb - Sab * Sab;
  ClosingFit f;
  f.axis = axis;
  f.slope = (Sya * Sbb - Syb * Sab) / det;
  f.curve = (Saa * Syb - Sab * Sya) / det;
  for (const auto& r : rows) f.residual = std::max(f.residual, std::abs(f.slope * r[0] + f.curve * r[1] - r[2]));
  f.linear = std::abs(f.slope) >= dirac_slope_min && f.residual <= dirac_fit_tol;
  return f;
}

inline bool near_value(double x, double v) { return std::abs(wrap_pm_pi(x - v)) <= gap_merge_tol; }

}  // namespace detail

inline bool is_flat(const ProtocolSpec& s, int grid_n, double* variation = nullptr)
{
  const std::size_t m = grid_points(s.dimension, grid_n);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = e_plus(s, mesh_momentum(s.dimension, grid_n, i));
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  if (variation) *variation = hi - lo;
  return hi - lo <= eps_flat;
}

/// Flat band if e_plus is constant; otherwise Dirac when every closing is linear along every axis, else Fermi arc.
inline BoundaryClassification classify_boundary(const ProtocolSpec& s, const std::vector<GapPoint>& gaps, int grid_n = 64)
{
  BoundaryClassification bc;
  if (is_flat(s, grid_n, &bc.band_variation)) {
    bc.kind = BoundaryKind::flat_band;
    return bc;
  }
  if (gaps.empty()) return bc;
  bool all_linear = true;
  for (const auto& gp : gaps) {
    std::vector<ClosingFit> per;
    for (int a = 0; a < s.dimension; ++a) {
      per.push_back(detail::fit_closing(s, gp, a));
      all_linear = all_linear && per.back().linear;
    }
    bc.fits.push_back(per);
  }
  bool half = false;
  std::set<std::string> labels;
  for (const auto& gp : gaps)
    for (int a = 0; a < gp.k.size(); ++a) {
      const double x = gp.k[a];
      if (detail::near_value(x, 0))
        labels.insert("0");
      else if (detail::near_value(x, pi))
        labels.insert("pi");
      else if (detail::near_value(x, pi / 2) || detail::near_value(x, -pi / 2)) {
        labels.insert("pi/2");
        half = true;
      } else
        labels.insert("other");
    }
  for (const auto& l : labels) bc.gapless_set += (bc.gapless_set.empty() ? "" : ",") + l;
  if (!all_linear)
    bc.kind = BoundaryKind::fermi_arc;
  else
    bc.kind = half ? BoundaryKind::dirac_type_two : BoundaryKind::dirac_type_one;
  return bc;
}

// ---------------------------------------------------------------------------
// winding number

/// Chiral axis A with Gamma = A.sigma: closed form where known, plane fit otherwise.
inline Vec3 chiral_axis(const ProtocolSpec& s)
{
  if (s.id == "1d-chs") {
    const double h = s.T / 2.0 * s.angle(Angle::beta);
    return {std::cos(h), -std::sin(h) / std::sqrt(2.0), std::sin(h) / std::sqrt(2.0)};
  }
  const auto g = hamiltonian_grid2(s, 64);
  const PlaneFit pf = plane_fit(g);
  if (pf.residual > 1e-20) throw std::invalid_argument("protocol " + s.id + " has no chiral plane for a winding number");
  return pf.axis;
}

inline WindingResult winding_number(const ProtocolSpec& s, int grid_n, bool negate = false)
{
  if (s.dimension != 1 || s.bands() != 2) throw std::invalid_argument("winding number needs a one-dimensional two-band protocol");
  WindingResult res;
  res.axis = chiral_axis(s);
  const Vec3 A = res.axis;
  const Vec3 ref = std::abs(A.x) <= std::abs(A.y) && std::abs(A.x) <= std::abs(A.z)
                       ? Vec3{1, 0, 0}
                       : (std::abs(A.y) <= std::abs(A.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
  Vec3 e1 = cross(A, ref);
  e1 = (1 / norm(e1)) * e1;
  const Vec3 e2 = cross(A, e1);  // e1 x e2 = A
  double total = 0, prev = 0;
  for (int i = 0; i <= grid_n; ++i) {
    const Momentum k{-pi + 2 * pi * i / grid_n};
    Vec3 d = band_point(s, k).dec.d;
    if (negate) d = -d;
    const double x = dot(d, e1), y = dot(d, e2);
    if (std::hypot(x, y) <= eps_gap) throw BoundaryStateError("winding loop passes through the origin");
    const double th = std::atan2(y, x);
    if (i > 0) total += wrap_pm_pi(th - prev);
    prev = th;
  }
  if (!find_gap_closings(s, std::max(grid_n, 32)).empty())
    throw BoundaryStateError("winding loop passes through the origin");
  res.raw = total / (2 * pi);
  res.w = static_cast<int>(std::lround(res.raw));
  res.accepted = std::abs(res.raw - res.w) <= quantization_tol;
  return res;
}

// ---------------------------------------------------------------------------
// Chern number

/// pi when U(k + pi e_axis) = U(k) on sample points, 2 pi otherwise.
inline double momentum_period(const ProtocolSpec& s, int axis)
{
  static const double samples[4][3] = {{0.31, -1.17, 2.03}, {-2.71, 0.45, -0.62}, {1.49, 2.88, -2.2}, {-0.05, -0.93, 1.1}};
  for (const auto& smp : samples) {
    Momentum k;
    k.n = s.dimension;
    for (int a = 0; a < s.dimension; ++a) k[a] = smp[a];
    Momentum kp = k;
    kp[axis] += pi;
    if (max_abs_diff(build_base(s, k), build_base(s, kp)) > 1e-12) return 2 * pi;
  }
  return pi;
}

namespace detail {

inline double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c)
{
  return 2 * std::atan2(dot(a, cross(b, c)), 1 + dot(a, b) + dot(b, c) + dot(c, a));
}

}  // namespace detail

/// Degree of k -> d/|d| over one primitive period cell, oriented by (k1, k2).
inline ChernResult chern_number(const ProtocolSpec& s, int grid_n, bool negate = false)
{
  if (s.dimension != 2 || s.bands() != 2) throw std::invalid_argument("Chern number needs a two-dimensional two-band protocol");
  ChernResult res;
  res.period = {momentum_period(s, 0), momentum_period(s, 1)};
  res.copies = static_cast<int>(std::lround(2 * pi / res.period[0] * 2 * pi / res.period[1]));
  const int n = grid_n;
  std::vector<Vec3> nv(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Momentum k{-res.period[0] / 2 + res.period[0] * i / n, -res.period[1] / 2 + res.period[1] * j / n};
      const BandPoint bp = band_point(s, k);
      if (bp.gapless) throw BoundaryStateError("d passes through the origin on the mesh");
      nv[i * n + j] = negate ? -bp.n : bp.n;
    }
  if (!find_gap_closings(s, std::max(grid_n, 32)).empty()) throw BoundaryStateError("d passes through the origin");
  double total = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec3& a = nv[i * n + j];
      const Vec3& b = nv[((i + 1) % n) * n + j];
      const Vec3& c = nv[((i + 1) % n) * n + (j + 1) % n];
      const Vec3& d = nv[i * n + (j + 1) % n];
      total += detail::solid_angle(a, b, c) + detail::solid_angle(a, c, d);
    }
  res.raw = total / (4 * pi);
  res.c = static_cast<int>(std::lround(res.raw));
  res.accepted = std::abs(res.raw - res.c) <= quantization_tol;
  return res;
}

// ---------------------------------------------------------------------------
// sweeps

/// Smallest ||d|| (refined from every coarse local minimum) and total e_plus variation on the mesh.
struct GapMetric {
  double min_d = 0;
  double band_variation = 0;
};

inline GapMetric gap_metric(const ProtocolSpec& s, int grid_n)
{
  const int D = s.dimension;
  const std::size_t m = grid_points(D, grid_n);
  std::vector<double> g(m);
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i < m; ++i) {
    const BandPoint bp = band_point(s, mesh_momentum(D, grid_n, i));
    g[i] = norm(bp.dec.d);
    lo = std::min(lo, bp.e_plus);
    hi = std::max(hi, bp.e_plus);
  }
  GapMetric gm;
  gm.band_variation = hi - lo;
  gm.min_d = *std::min_element(g.begin(), g.end());
  if (gm.min_d <= eps_gap) return gm;
  const double cut = std::max(2 * gm.min_d, gm.min_d + 0.1);
  for (std::size_t i = 0; i < m; ++i) {
    if (g[i] > cut) continue;
    bool is_min = true;
    std::size_t stride = 1;
    for (int a = 0; a < D && is_min; ++a) {
      const std::size_t ia = (i / stride) % grid_n;
      const std::size_t up = i - ia * stride + ((ia + 1) % grid_n) * stride;
      const std::size_t dn = i - ia * stride + ((ia + grid_n - 1) % grid_n) * stride;
      if (g[up] < g[i] || g[dn] < g[i]) is_min = false;
      stride *= grid_n;
    }
    if (!is_min) continue;
    gm.min_d = std::min(gm.min_d, dnorm(s, detail::refine_closing(s, mesh_momentum(D, grid_n, i))));
  }
  return gm;
}

struct TracePoint {
  double value = 0;
  bool gapped = true;
  std::optional<int> invariant;  // winding (1D) or Chern (2D), empty at a boundary
  double raw = 0;
};

/// Gap status and invariant of one configuration.
inline TracePoint trace_point(const ProtocolSpec& s, int grid_n)
{
  if (s.bands() != 2 || s.dimension > 2) throw std::invalid_argument("invariants are computed for 1D and 2D two-band protocols");
  TracePoint tp;
  try {
    if (s.dimension == 1) {
      const auto w = winding_number(s, grid_n);
      tp.invariant = w.w;
      tp.raw = w.raw;
    } else {
      const auto c = chern_number(s, grid_n);
      tp.invariant = c.c;
      tp.raw = c.raw;
    }
  } catch (const BoundaryStateError&) {
    tp.gapped = false;
  }
  return tp;
}

inline std::vector<TracePoint> phase_boundary_trace(ProtocolSpec s, Angle a, const std::vector<double>& values, int grid_n)
{
  std::vector<TracePoint> out;
  for (double v : values) {
    s.angles[a] = v;
    TracePoint tp = trace_point(s, grid_n);
    tp.value = v;
    out.push_back(tp);
  }
  return out;
}

}  // namespace qwalk

#endif  // QWALK_TOPOLOGY_HPP
