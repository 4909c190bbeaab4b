#ifndef QWALK_CLOSED_FORM_HPP
#define QWALK_CLOSED_FORM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "qwalk/protocol.hpp"
#include "qwalk/spectrum.hpp"

namespace qwalk {

struct UnsupportedError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline const std::array<const char*, 9>& closed_form_ids()
{
  static const std::array<const char*, 9> ids = {"1d-phs",    "1d-chs",   "2d-phs", "2d-nosym", "3d-simple",
                                                 "3d-split",  "3d-phs",   "3d-chs", "3d-nosym"};
  return ids;
}

inline bool has_closed_form(const std::string& id)
{
  for (const char* c : closed_form_ids())
    if (id == c) return true;
  return false;
}

namespace detail {

struct Trig {
  double ka = 1, la = 0, kb = 1, lb = 0, kg = 1, lg = 0, kz = 1, lz = 0;
  double x = 0, y = 0, z = 0;
  int T = 1;
  double al = 0, be = 0;
};

inline Trig trig(const ProtocolSpec& s, const Momentum& k)
{
  if (!has_closed_form(s.id) || s.doubled != Doubling::none)
    throw UnsupportedError("no closed form for protocol " + s.id);
  if (k.size() != s.dimension) throw std::invalid_argument("momentum dimension mismatch for " + s.id);
  Trig t;
  t.T = s.T;
  auto get = [&](Angle a) {
    auto it = s.angles.find(a);
    return it == s.angles.end() ? 0.0 : it->second;
  };
  t.al = get(Angle::alpha);
  t.be = get(Angle::beta);
  const double h = s.T / 2.0;
  t.ka = std::cos(h * t.al);
  t.la = std::sin(h * t.al);
  t.kb = std::cos(h * t.be);
  t.lb = std::sin(h * t.be);
  t.kg = std::cos(h * get(Angle::gamma));
  t.lg = std::sin(h * get(Angle::gamma));
  t.kz = std::cos(h * get(Angle::zeta));
  t.lz = std::sin(h * get(Angle::zeta));
  t.x = k[0];
  if (k.size() > 1) t.y = k[1];
  if (k.size() > 2) t.z = k[2];
  return t;
}

inline const double r2 = std::sqrt(2.0);

}  // namespace detail

/// cos(E) for the + band, from the analytic expressions.
inline double rho_closed(const ProtocolSpec& s, const Momentum& k)
{
  using std::cos;
  using std::sin;
  const auto t = detail::trig(s, k);
  const double ka = t.ka, la = t.la, kb = t.kb, lb = t.lb, kg = t.kg, lg = t.lg, kz = t.kz, lz = t.lz;
  const double x = t.x, y = t.y, z = t.z, r2 = detail::r2;
  const std::string& id = s.id;
  if (id == "1d-phs") return ka * kb * (cos(x) * cos(x) - sin(x) * sin(x)) - cos(x) * la * lb;
  if (id == "1d-chs")
    return -0.5 * la * lb * (1 + cos(x)) + ka * kb * cos(x) + sin(t.T * (t.al + t.be) / 2) * sin(x) / r2;
  if (id == "2d-phs")
    return ka * (cos(t.T * t.be) * cos(x) * cos(x + 2 * y) - sin(x) * sin(x + 2 * y)) -
           la * sin(t.T * t.be) * cos(x) * cos(x);
  if (id == "2d-nosym")
    return r2 * la / 2 * (kb * kg * sin(2 * x + 2 * y) - lb * kg - kb * lg * cos(2 * y) - lb * lg * sin(2 * x)) +
           ka * (kb * kg * cos(2 * x + 2 * y) - lb * lg * cos(2 * x));
  if (id == "3d-simple") return kb * cos(x + y + z);
  if (id == "3d-split")
    return cos(x + y + z) * kg * ka * kb - cos(x - y - z) * kg * la * lb - cos(x - y + z) * lg * la * kb -
           cos(x + y - z) * lg * ka * lb;
  if (id == "3d-phs")
    return ka * kb * (kg * kz * cos(2 * x + 2 * y + 2 * z) - lg * lz * cos(2 * x + 2 * z)) -
           ka * lb * (lg * kz * cos(2 * x) + kg * lz * cos(2 * x + 2 * y)) -
           la * kb * (lg * kz * cos(2 * y + 2 * z) + kg * lz * cos(2 * z)) - la * lb * (kg * kz - lg * lz * cos(2 * y));
  if (id == "3d-chs") {
    const double a = x + y - z, b = x - y - z, c = x + y + z, e = x - y + z, q = 2 * r2;
    return (2 * la * kb * kg + 2 * ka * lb * kg + 2 * ka * kb * lg - la * lb * lg) * sin(c) / q -
           0.5 * (la * lb * kg * cos(b) + ka * lb * lg * cos(a) + la * kb * lg * cos(e)) +
           (2 * ka * kb * kg - la * lb * kg - la * kb * lg - ka * lb * lg) * cos(c) / 2 +
           (sin(b) - sin(a) - sin(e)) * la * lb * lg / q;
  }
  // 3d-nosym
  const double S = 2 * x + 2 * y + 2 * z;
  return ka * kb * kg * kz * cos(S) + la * kb * kg * kz * sin(S) / r2 +
         (lz * cos(2 * y) - kz * sin(2 * x)) * la * lb * lg / r2 - la * lb * kg * kz / r2 -
         ka * lb * lg * kz * cos(2 * x) - ka * lb * kg * lz * cos(2 * x + 2 * y) - ka * kb * lg * lz * cos(2 * x + 2 * z) -
         la / r2 *
             (lb * kg * lz * sin(2 * x + 2 * y) + kb * lg * lz * sin(2 * x + 2 * z) + kb * lg * kz * cos(2 * y + 2 * z) +
              kb * kg * lz * cos(2 * z));
}

/// Analytic Bloch vector d (unnormalized), same sign convention as decompose().
inline Vec3 d_closed(const ProtocolSpec& s, const Momentum& k)
{
  using std::cos;
  using std::sin;
  const auto t = detail::trig(s, k);
  const double ka = t.ka, la = t.la, kb = t.kb, lb = t.lb, kg = t.kg, lg = t.lg, kz = t.kz, lz = t.lz;
  const double x = t.x, y = t.y, z = t.z, r2 = detail::r2;
  const std::string& id = s.id;
  if (id == "1d-phs")
    return {-la * kb * sin(x), la * kb * cos(x) + ka * lb, sin(x) * la * lb - 2 * ka * kb * cos(x) * sin(x)};
  if (id == "1d-chs")
    return {lb / 2 * (r2 * ka * sin(x) + la * (1 - cos(x))), la * kb / r2 + lb / 2 * (la * sin(x) + r2 * ka * cos(x)),
            0.5 * (la * lb - 2 * ka * kb) * sin(x) + sin(t.T * (t.al + t.be) / 2) * cos(x) / r2};
  if (id == "2d-phs")
    return {2 * lb * sin(x) * (ka * kb * cos(x + 2 * y) - la * lb * cos(x)),
            la * kb * kb - la * lb * lb * cos(2 * x) + 2 * ka * kb * lb * cos(x) * cos(x + 2 * y),
            la * kb * lb * sin(2 * x) - ka * (kb * kb * sin(2 * (x + y)) + lb * lb * sin(2 * y))};
  if (id == "2d-nosym")
    return {r2 * la / 2 * (kb * lg * cos(2 * x) - lb * kg * cos(2 * x + 2 * y) - lb * lg * sin(2 * y)) +
                ka * (lb * kg * sin(2 * x + 2 * y) - kb * lg * sin(2 * x)),
            r2 * la / 2 * (kb * kg + kb * lg * sin(2 * x) + lb * kg * sin(2 * x + 2 * y) - lb * lg * cos(2 * y)) +
                ka * (kb * lg * cos(2 * x) + lb * kg * cos(2 * x + 2 * y)),
            r2 * la / 2 * (kb * kg * cos(2 * x + 2 * y) + kb * lg * sin(2 * y) + lb * lg * cos(2 * x)) -
                ka * (lb * lg * sin(2 * x) + kb * kg * sin(2 * x + 2 * y))};
  if (id == "3d-simple") {
    const double c = x + y + z;
    return {lb * sin(c), lb * cos(c), -kb * sin(c)};
  }
  if (id == "3d-split")
    return {lb * (ka * kg * sin(x + y + z) - la * lg * sin(x - y + z)) -
                kb * (la * kg * sin(x - y - z) + ka * lg * sin(x + y - z)),
            lb * (ka * kg * cos(x + y + z) - la * lg * cos(x - y + z)) +
                kb * (la * kg * cos(x - y - z) + ka * lg * cos(x + y - z)),
            lg * (la * kb * sin(x - y + z) - ka * lb * sin(x + y - z)) -
                kg * (la * lb * sin(x - y - z) + ka * kb * sin(x + y + z))};
  if (id == "3d-phs")
    return {-ka * kb * lg * kz * sin(2 * x) - ka * kb * kg * lz * sin(2 * x + 2 * y) +
                ka * lb * kg * kz * sin(2 * x + 2 * y + 2 * z) - ka * lb * lg * lz * sin(2 * x + 2 * z) +
                la * kb * lg * lz * sin(2 * y) - la * lb * lg * kz * sin(2 * y + 2 * z) - la * lb * kg * lz * sin(2 * z),
            la * kb * kg * kz + ka * kb * lg * kz * cos(2 * x) + ka * kb * kg * lz * cos(2 * x + 2 * y) +
                ka * lb * kg * kz * cos(2 * x + 2 * y + 2 * z) - ka * lb * lg * lz * cos(2 * x + 2 * z) -
                la * kb * lg * lz * cos(2 * y) - la * lb * lg * kz * cos(2 * y + 2 * z) - la * lb * kg * lz * cos(2 * z),
            ka * kb * lg * lz * sin(2 * x + 2 * z) + la * lb * lg * lz * sin(2 * y) + la * kb * lg * kz * sin(2 * y + 2 * z) +
                la * kb * kg * lz * sin(2 * z) - ka * lb * lg * kz * sin(2 * x) - ka * lb * kg * lz * sin(2 * x + 2 * y) -
                ka * kb * kg * kz * sin(2 * x + 2 * y + 2 * z)};
  if (id == "3d-chs") {
    const double a = x + y - z, b = x - y - z, c = x + y + z, e = x - y + z, q = 2 * r2;
    const double l3 = la * lb * lg;
    return {(l3 - 2 * ka * kb * lg) * sin(a) / q - (2 * la * kb * kg + l3) * sin(b) / q +
                (2 * ka * lb * kg - l3) * sin(c) / q - l3 * sin(e) / q + (ka * lb * lg + la * kb * lg) * cos(a) / 2 +
                (la * lb * kg - la * kb * lg) * cos(b) / 2 - (la * lb * kg + ka * lb * lg) * cos(c) / 2,
            (la * kb * lg + ka * lb * lg) * sin(a) / 2 + (la * lb * kg - la * kb * lg) * sin(b) / 2 +
                (la * lb * kg + ka * lb * lg) * sin(c) / 2 + (2 * ka * lb * kg - l3) * cos(c) / q +
                (2 * la * kb * kg + l3) * cos(b) / q + (2 * ka * kb * lg - l3) * cos(a) / q - l3 * cos(e) / q,
            0.5 * (la * kb * lg * sin(e) - la * lb * kg * sin(b) - ka * lb * lg * sin(a)) +
                (la * lb * kg + la * kb * lg + ka * lb * lg - 2 * ka * kb * kg) * sin(c) / 2 +
                (2 * la * kb * kg + 2 * ka * lb * kg + 2 * ka * kb * lg - l3) * cos(c) / q +
                (cos(a) - cos(b) - cos(e)) * l3 / q};
  }
  // 3d-nosym
  const double S = 2 * x + 2 * y + 2 * z;
  const double l3 = la * lb * lg;
  return {ka * lb * kg * kz * sin(S) - la * lb * kg * kz * cos(S) / r2 - ka * kb * kg * lz * sin(2 * x + 2 * y) +
              l3 / r2 * (lz * cos(2 * x + 2 * z) - kz * sin(2 * y + 2 * z)) - ka * lb * lg * lz * sin(2 * x + 2 * z) -
              ka * kb * lg * kz * sin(2 * x) +
              la / r2 *
                  (kb * lg * kz * cos(2 * x) + kb * lg * lz * sin(2 * y) - lb * kg * lz * sin(2 * z) +
                   kb * kg * lz * cos(2 * x + 2 * y)),
          la * lb * kg * kz * sin(S) / r2 + ka * lb * kg * kz * cos(S) + la * kb * kg * kz / r2 +
              ka * kb * lg * kz * cos(2 * x) - l3 / r2 * (lz * sin(2 * x + 2 * z) + kz * cos(2 * y + 2 * z)) +
              ka * kb * kg * lz * cos(2 * x + 2 * y) - ka * lb * lg * lz * cos(2 * x + 2 * z) +
              la / r2 *
                  (kb * kg * lz * sin(2 * x + 2 * y) + kb * lg * kz * sin(2 * x) - kb * lg * lz * cos(2 * y) -
                   lb * kg * lz * cos(2 * z)),
          la * kb * kg * kz * cos(S) / r2 - ka * kb * kg * kz * sin(S) + (kz * cos(2 * x) + lz * sin(2 * y)) * l3 / r2 +
              ka * kb * lg * lz * sin(2 * x + 2 * z) - ka * lb * lg * kz * sin(2 * x) -
              ka * lb * kg * lz * sin(2 * x + 2 * y) +
              la / r2 *
                  (lb * kg * lz * cos(2 * x + 2 * y) - kb * lg * lz * cos(2 * x + 2 * z) +
                   kb * lg * kz * sin(2 * y + 2 * z) + kb * kg * lz * sin(2 * z))};
}

/// Analytic group velocity of the + band along an axis; empty at a gap closing.
inline std::optional<double> group_velocity_closed(const ProtocolSpec& s, const Momentum& k, int axis)
{
  using std::cos;
  using std::sin;
  if (axis < 0 || axis >= s.dimension) throw std::invalid_argument("velocity axis out of range");
  const auto t = detail::trig(s, k);
  const double ka = t.ka, la = t.la, kb = t.kb, lb = t.lb, kg = t.kg, lg = t.lg, kz = t.kz, lz = t.lz;
  const double x = t.x, y = t.y, z = t.z, r2 = detail::r2;
  const double rho = rho_closed(s, k);
  const double sq = std::sqrt(std::max(0.0, 1 - rho * rho));
  if (sq <= eps_gap) return std::nullopt;
  const std::string& id = s.id;
  double num = 0;
  if (id == "1d-phs") {
    num = sin(x) * la * lb - 4 * ka * kb * cos(x) * sin(x);
  } else if (id == "1d-chs") {
    return -d_closed(s, k).z / sq;
  } else if (id == "2d-phs") {
    const double ctb = cos(t.T * t.be), stb = sin(t.T * t.be);
    if (axis == 0)
      num = 2 * la * stb * sin(x) * cos(x) - ka * (1 + ctb) * sin(2 * x + 2 * y);
    else
      num = -2 * ka * ctb * cos(x) * sin(x + 2 * y) - 2 * ka * sin(x) * cos(x + 2 * y);
  } else if (id == "2d-nosym") {
    if (axis == 0)
      num = 2 * ka * lb * lg * sin(2 * x) + r2 * la * kb * kg * cos(2 * x + 2 * y) -
            2 * ka * kb * kg * sin(2 * x + 2 * y) - r2 * la * lb * lg * cos(2 * x);
    else
      num = r2 * la * kb * kg * cos(2 * x + 2 * y) - 2 * ka * kb * kg * sin(2 * x + 2 * y) +
            r2 * la * kb * lg * sin(2 * y);
  } else if (id == "3d-simple") {
    return -d_closed(s, k).z / sq;
  } else if (id == "3d-split") {
    static const int A[3][4] = {{1, 1, 1, -1}, {1, -1, 1, 1}, {1, 1, -1, 1}};
    static const int sign[3] = {-1, 1, 1};
    const int* a = A[axis];
    const double v = a[0] * kg * la * lb * sin(x - y - z) + a[1] * ka * lg * lb * sin(x + y - z) +
                     a[2] * kb * lg * la * sin(x - y + z) + a[3] * ka * kg * kb * sin(x + y + z);
    return sign[axis] * v / sq;
  } else if (id == "3d-phs") {
    const double S = 2 * x + 2 * y + 2 * z;
    if (axis == 0)
      num = 2 * ka *
            (lb * lg * kz * sin(2 * x) + lb * kg * lz * sin(2 * x + 2 * y) - kb * kg * kz * sin(S) +
             kb * lg * lz * sin(2 * x + 2 * z));
    else if (axis == 1)
      num = 2 * (ka * lb * kg * lz * sin(2 * x + 2 * y) - ka * kb * kg * kz * sin(S) - la * lb * lg * lz * sin(2 * y) +
                 la * kb * lg * kz * sin(2 * y + 2 * z));
    else
      num = 2 * kb *
            (ka * lg * lz * sin(2 * x + 2 * z) + la * lg * kz * sin(2 * y + 2 * z) + la * kg * lz * sin(2 * z) -
             ka * kg * kz * sin(S));
  } else if (id == "3d-chs") {
    static const int A[3][6] = {{1, 1, 1, -1, 1, -1}, {-1, -1, 1, -1, -1, 1}, {1, -1, -1, 1, -1, -1}};
    const int* c = A[axis];
    const double a = x + y - z, b = x - y - z, cc = x + y + z, e = x - y + z, q = 2 * r2;
    const double l3 = la * lb * lg;
    num = 0.5 * (c[0] * la * kb * lg * sin(e) + c[1] * la * lb * kg * sin(b) + c[2] * ka * lb * lg * sin(a)) +
          (la * lb * kg + la * kb * lg + ka * lb * lg - 2 * ka * kb * kg) * sin(cc) / 2 +
          (2 * la * kb * kg + 2 * ka * lb * kg + 2 * ka * kb * lg - l3) * cos(cc) / q +
          (c[3] * cos(a) + c[4] * cos(b) + c[5] * cos(e)) * l3 / q;
  } else {  // 3d-nosym
    const double S = 2 * x + 2 * y + 2 * z;
    if (axis == 0)
      num = 2 * ka * lb * lg * kz * sin(2 * x) - r2 * la * lb * lg * kz * cos(2 * x) +
            2 * ka * lb * kg * lz * sin(2 * x + 2 * y) - r2 * la * lb * kg * lz * cos(2 * x + 2 * y) +
            r2 * la * kb * kg * kz * cos(S) - 2 * ka * kb * kg * kz * sin(S) + 2 * ka * kb * lg * lz * sin(2 * x + 2 * z) -
            r2 * la * kb * lg * lz * cos(2 * x + 2 * z);
    else if (axis == 1)
      num = 2 * ka * lb * kg * lz * sin(2 * x + 2 * y) - r2 * la * lb * kg * lz * cos(2 * x + 2 * y) +
            r2 * la * kb * kg * kz * cos(S) - 2 * ka * kb * kg * kz * sin(S) - r2 * la * lb * lg * lz * sin(2 * y) +
            r2 * la * kb * lg * kz * sin(2 * y + 2 * z);
    else
      num = r2 * la * kb * kg * kz * cos(S) - 2 * ka * kb * kg * kz * sin(S) + 2 * ka * kb * lg * lz * sin(2 * x + 2 * z) -
            r2 * la * kb * lg * lz * cos(2 * x + 2 * z) + r2 * la * kb * lg * kz * sin(2 * y + 2 * z) +
            r2 * la * kb * kg * lz * sin(2 * z);
  }
  return -num / sq;
}

}  // namespace qwalk

#endif  // QWALK_CLOSED_FORM_HPP
