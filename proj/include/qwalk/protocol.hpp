#ifndef QWALK_PROTOCOL_HPP
#define QWALK_PROTOCOL_HPP

#include <array>
#include <cmath>
#include <initializer_list>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qwalk/linalg.hpp"

namespace qwalk {

enum class Angle { alpha, beta, gamma, zeta };

inline const char* angle_name(Angle a)
{
  switch (a) {
    case Angle::alpha: return "alpha";
    case Angle::beta: return "beta";
    case Angle::gamma: return "gamma";
    case Angle::zeta: return "zeta";
  }
  return "?";
}

inline Angle angle_from_name(const std::string& s)
{
  if (s == "alpha") return Angle::alpha;
  if (s == "beta") return Angle::beta;
  if (s == "gamma") return Angle::gamma;
  if (s == "zeta") return Angle::zeta;
  throw std::invalid_argument("unknown angle symbol '" + s + "' (expected alpha, beta, gamma or zeta)");
}

inline bool is_angle_name(const std::string& s)
{
  return s == "alpha" || s == "beta" || s == "gamma" || s == "zeta";
}

using AngleMap = std::map<Angle, double>;

inline const Vec3 axis_y{0, 1, 0};
inline const Vec3 axis_nu{0, 1 / std::sqrt(2.0), 1 / std::sqrt(2.0)};

/// Up to three momentum components, each nominally in [-pi, pi).
struct Momentum {
  std::array<double, 3> c{};
  int n = 0;

  Momentum() = default;
  Momentum(std::initializer_list<double> v)
  {
    if (v.size() > 3) throw std::invalid_argument("momentum has at most 3 components");
    for (double x : v) c[n++] = x;
  }
  double operator[](int i) const { return c[i]; }
  double& operator[](int i) { return c[i]; }
  int size() const { return n; }

  Momentum operator-() const
  {
    Momentum m = *this;
    for (int i = 0; i < n; ++i) m.c[i] = -c[i];
    return m;
  }
};

struct CoinElement {
  Vec3 axis;
  Angle angle;
};

enum class ShiftForm {
  updown,  // exp(i phi sigma_z)
  down,    // exp(i phi/2 (sigma_z + 1))
  up       // exp(i phi/2 (sigma_z - 1))
};

struct ShiftElement {
  ShiftForm form;
  std::array<int, 3> coeff;  // phi = coeff . k
};

using Element = std::variant<CoinElement, ShiftElement>;

enum class Doubling { none, transpose_block, conjugate_block, trs_sandwich };

inline const char* doubling_name(Doubling d)
{
  switch (d) {
    case Doubling::none: return "none";
    case Doubling::transpose_block: return "transpose_block";
    case Doubling::conjugate_block: return "conjugate_block";
    case Doubling::trs_sandwich: return "trs_sandwich";
  }
  return "?";
}

inline Doubling doubling_from_name(const std::string& s)
{
  if (s == "none") return Doubling::none;
  if (s == "transpose_block") return Doubling::transpose_block;
  if (s == "conjugate_block") return Doubling::conjugate_block;
  if (s == "trs_sandwich") return Doubling::trs_sandwich;
  throw std::invalid_argument("unknown doubling '" + s + "'");
}

struct ProtocolSpec {
  std::string id;
  int dimension = 1;
  std::vector<Element> elements;  // application order: elements[0] acts first
  int T = 1;
  AngleMap angles;
  Doubling doubled = Doubling::none;
  double phi = pi / 2;
  std::string base_id;  // two-band protocol a doubled one is built from
  bool bare_coins = false;  // evaluate through the step-independent path (T must be 1)

  int bands() const { return doubled == Doubling::none ? 2 : 4; }

  double angle(Angle a) const
  {
    auto it = angles.find(a);
    if (it == angles.end()) throw std::invalid_argument(std::string("angle ") + angle_name(a) + " not set for " + id);
    return it->second;
  }

  std::set<Angle> used_angles() const
  {
    std::set<Angle> s;
    for (const auto& e : elements)
      if (auto c = std::get_if<CoinElement>(&e)) s.insert(c->angle);
    return s;
  }

  void validate() const
  {
    if (T < 1) throw std::invalid_argument("step number T must be >= 1");
    if (dimension < 1 || dimension > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
    const auto used = used_angles();
    for (Angle a : used) {
      auto it = angles.find(a);
      if (it == angles.end())
        throw std::invalid_argument(std::string("angle ") + angle_name(a) + " is required by " + id);
      if (!std::isfinite(it->second)) throw std::invalid_argument(std::string("angle ") + angle_name(a) + " is not finite");
    }
    for (const auto& [a, v] : angles) {
      (void)v;
      if (!used.count(a)) throw std::invalid_argument(std::string("angle ") + angle_name(a) + " is not used by " + id);
    }
    if (!std::isfinite(phi)) throw std::invalid_argument("phi must be finite");
    if (bare_coins && T != 1) throw std::invalid_argument("step-independent evaluation needs T = 1");
    for (const auto& e : elements)
      if (auto c = std::get_if<CoinElement>(&e)) {
        if (std::abs(norm(c->axis) - 1.0) > 1e-12) throw std::invalid_argument("coin axis must be normalized");
      } else {
        const auto& s = std::get<ShiftElement>(e);
        for (int i = dimension; i < 3; ++i)
          if (s.coeff[i] != 0) throw std::invalid_argument("shift acts on an axis beyond the protocol dimension");
      }
  }
};

// ---------------------------------------------------------------------------
// element matrices

inline Mat2 shift_matrix(const ShiftElement& s, const Momentum& k)
{
  double ph = 0;
  for (int i = 0; i < k.size(); ++i) ph += s.coeff[i] * k[i];
  Mat2 m;
  switch (s.form) {
    case ShiftForm::updown: m(0, 0) = std::polar(1.0, ph); m(1, 1) = std::polar(1.0, -ph); break;
    case ShiftForm::down: m(0, 0) = std::polar(1.0, ph); m(1, 1) = 1.0; break;
    case ShiftForm::up: m(0, 0) = 1.0; m(1, 1) = std::polar(1.0, -ph); break;
  }
  return m;
}

/// Step-dependent coin: rotation by T*theta about the axis.
inline Mat2 coin_matrix(const CoinElement& c, double theta, int T) { return pauli_exp(c.axis, T * theta); }

// ---------------------------------------------------------------------------
// registry

namespace detail {

inline ShiftElement sx_() { return {ShiftForm::updown, {1, 0, 0}}; }
inline ShiftElement sy_() { return {ShiftForm::updown, {0, 1, 0}}; }
inline ShiftElement sz_() { return {ShiftForm::updown, {0, 0, 1}}; }
inline ShiftElement sxy_() { return {ShiftForm::updown, {1, 1, 0}}; }
inline ShiftElement sxyz_() { return {ShiftForm::updown, {1, 1, 1}}; }
inline ShiftElement sup_() { return {ShiftForm::up, {1, 0, 0}}; }
inline ShiftElement sdn_() { return {ShiftForm::down, {1, 0, 0}}; }
inline CoinElement cy(Angle a) { return {axis_y, a}; }
inline CoinElement cnu(Angle a) { return {axis_nu, a}; }

struct Entry {
  std::string id;
  int dim;
  std::vector<Element> written;  // leftmost first, as products are written
  Doubling doubled;
  std::string base;
};

inline const std::vector<Entry>& registry_table()
{
  using A = Angle;
  static const std::vector<Entry> t = {
      {"1d-simple", 1, {sup_(), sdn_(), cy(A::beta)}, Doubling::none, ""},
      {"1d-split", 1, {sup_(), cy(A::alpha), sdn_(), cy(A::beta)}, Doubling::none, ""},
      {"1d-phs", 1, {sup_(), cy(A::alpha), sdn_(), cy(A::beta), sx_()}, Doubling::none, ""},
      {"1d-diii", 1, {}, Doubling::transpose_block, "1d-phs"},
      {"1d-chs", 1, {sup_(), cnu(A::alpha), sdn_(), cnu(A::beta)}, Doubling::none, ""},
      {"1d-cii", 1, {}, Doubling::transpose_block, "1d-chs"},
      {"2d-simple", 2, {sy_(), sx_(), cy(A::beta)}, Doubling::none, ""},
      {"2d-split", 2, {sy_(), cy(A::alpha), sx_(), cy(A::beta)}, Doubling::none, ""},
      {"2d-phs", 2, {sx_(), cy(A::beta), sy_(), cy(A::alpha), sxy_(), cy(A::beta)}, Doubling::none, ""},
      {"2d-diii", 2, {}, Doubling::transpose_block, "2d-phs"},
      {"2d-nosym", 2, {sy_(), cy(A::gamma), sx_(), cnu(A::alpha), sxy_(), cy(A::beta)}, Doubling::none, ""},
      {"2d-aii", 2, {}, Doubling::trs_sandwich, "2d-nosym"},
      {"2d-c", 2, {}, Doubling::conjugate_block, "2d-nosym"},
      {"3d-simple", 3, {sz_(), sy_(), sx_(), cy(A::beta)}, Doubling::none, ""},
      {"3d-split", 3, {sz_(), cy(A::gamma), sy_(), cy(A::alpha), sx_(), cy(A::beta)}, Doubling::none, ""},
      {"3d-phs", 3, {sz_(), cy(A::zeta), sy_(), cy(A::gamma), sx_(), cy(A::alpha), sxyz_(), cy(A::beta)}, Doubling::none, ""},
      {"3d-diii", 3, {}, Doubling::transpose_block, "3d-phs"},
      {"3d-chs", 3, {sz_(), cnu(A::gamma), sy_(), cnu(A::alpha), sx_(), cnu(A::beta)}, Doubling::none, ""},
      {"3d-cii", 3, {}, Doubling::transpose_block, "3d-chs"},
      {"3d-nosym", 3, {sz_(), cy(A::zeta), sy_(), cy(A::gamma), sx_(), cnu(A::alpha), sxyz_(), cy(A::beta)}, Doubling::none, ""},
      {"3d-aii", 3, {}, Doubling::trs_sandwich, "3d-nosym"},
      {"3d-c", 3, {}, Doubling::conjugate_block, "3d-nosym"},
  };
  return t;
}

}  // namespace detail

inline std::vector<std::string> registry_ids()
{
  std::vector<std::string> ids;
  for (const auto& e : detail::registry_table()) ids.push_back(e.id);
  return ids;
}

struct LookupError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Protocol template for a registry key. Angles are left empty.
inline ProtocolSpec registry_lookup(const std::string& id)
{
  const auto& t = detail::registry_table();
  for (const auto& e : t) {
    if (e.id != id) continue;
    const detail::Entry* src = &e;
    if (e.doubled != Doubling::none)
      for (const auto& b : t)
        if (b.id == e.base) src = &b;
    ProtocolSpec s;
    s.id = e.id;
    s.dimension = e.dim;
    s.elements.assign(src->written.rbegin(), src->written.rend());
    s.doubled = e.doubled;
    s.base_id = e.base;
    return s;
  }
  std::string valid;
  for (const auto& e : t) valid += (valid.empty() ? "" : ", ") + e.id;
  throw LookupError("unknown protocol id '" + id + "'; valid ids: " + valid);
}

/// Registry template with the given angles and step number filled in.
inline ProtocolSpec make_protocol(const std::string& id, const AngleMap& angles, int T)
{
  ProtocolSpec s = registry_lookup(id);
  s.T = T;
  for (Angle a : s.used_angles()) {
    auto it = angles.find(a);
    if (it != angles.end()) s.angles[a] = it->second;
  }
  s.validate();
  return s;
}

/// The two-band protocol underneath a doubled one (or the protocol itself).
inline ProtocolSpec base_protocol(const ProtocolSpec& s)
{
  if (s.doubled == Doubling::none) return s;
  ProtocolSpec b = s;
  b.id = s.base_id;
  b.doubled = Doubling::none;
  b.base_id.clear();
  return b;
}

inline ProtocolSpec step_independent_reduction(const ProtocolSpec& s)
{
  ProtocolSpec r = s;
  r.T = 1;
  return r;
}

// ---------------------------------------------------------------------------
// Floquet operators

namespace detail {

inline void check_momentum(const ProtocolSpec& s, const Momentum& k)
{
  if (k.size() != s.dimension)
    throw std::invalid_argument("momentum has " + std::to_string(k.size()) + " components, protocol " + s.id +
                                " needs " + std::to_string(s.dimension));
}

template <class CoinFn>
Mat2 compose(const ProtocolSpec& s, const Momentum& k, CoinFn coin)
{
  Mat2 u = Mat2::identity();
  for (const auto& e : s.elements) {
    if (auto c = std::get_if<CoinElement>(&e))
      u = coin(*c) * u;
    else
      u = shift_matrix(std::get<ShiftElement>(e), k) * u;
  }
  return u;
}

}  // namespace detail

inline Mat2 build_base_step_independent(const ProtocolSpec& s, const Momentum& k);

/// Two-band product of the element list (ignores any doubling).
inline Mat2 build_base(const ProtocolSpec& s, const Momentum& k)
{
  if (s.bare_coins) return build_base_step_independent(s, k);
  detail::check_momentum(s, k);
  return detail::compose(s, k, [&](const CoinElement& c) { return coin_matrix(c, s.angle(c.angle), s.T); });
}

/// Coins rotate by the bare angle; no step number enters.
inline Mat2 build_base_step_independent(const ProtocolSpec& s, const Momentum& k)
{
  detail::check_momentum(s, k);
  return detail::compose(s, k, [&](const CoinElement& c) { return pauli_exp(c.axis, s.angle(c.angle)); });
}

/// exp(-i tau_y sigma_y phi/2)
inline Mat4 trs_mixer(double phi)
{
  const Mat4 yy = tensor(pauli(2), pauli(2));
  return cplx(std::cos(phi / 2)) * Mat4::identity() + cplx(0, -std::sin(phi / 2)) * yy;
}

namespace detail {

// Lower-block partners are taken at -k: the lattice transpose (or conjugate)
// of a translation-invariant walk has Bloch matrix U(-k)^T (or U(-k)*).
template <class Base>
Mat4 assemble_doubled(const ProtocolSpec& s, const Momentum& k, Base base)
{
  const Mat2 u = base(k);
  const Mat2 um = base(-k);
  switch (s.doubled) {
    case Doubling::transpose_block: return block_diag(u, transpose(um));
    case Doubling::conjugate_block: return block_diag(u, conj(um));
    case Doubling::trs_sandwich:
      return block_diag(u, Mat2::identity()) * trs_mixer(s.phi) * block_diag(Mat2::identity(), transpose(um));
    case Doubling::none: break;
  }
  throw std::invalid_argument("protocol " + s.id + " is not doubled");
}

}  // namespace detail

inline Mat4 build_doubled(const ProtocolSpec& s, const Momentum& k)
{
  return detail::assemble_doubled(s, k, [&](const Momentum& q) { return build_base(s, q); });
}

inline Mat4 build_doubled_step_independent(const ProtocolSpec& s, const Momentum& k)
{
  return detail::assemble_doubled(s, k, [&](const Momentum& q) { return build_base_step_independent(s, q); });
}

using Unitary = std::variant<Mat2, Mat4>;

inline Unitary build_unitary(const ProtocolSpec& s, const Momentum& k)
{
  if (s.doubled == Doubling::none) return build_base(s, k);
  return build_doubled(s, k);
}

/// Written form of the product, leftmost operator first.
inline std::string describe(const ProtocolSpec& s)
{
  static const char* ax = "xyz";
  std::string out;
  for (auto it = s.elements.rbegin(); it != s.elements.rend(); ++it) {
    if (!out.empty()) out += " ";
    if (auto c = std::get_if<CoinElement>(&*it)) {
      out += std::string(c->axis.z == 0.0 ? "C_y(" : "C_nu(") + angle_name(c->angle) + ")";
    } else {
      const auto& sh = std::get<ShiftElement>(*it);
      std::string arg;
      for (int i = 0; i < 3; ++i)
        if (sh.coeff[i]) arg += (arg.empty() ? "" : "+") + std::string(1, ax[i]);
      const char* f = sh.form == ShiftForm::updown ? "S_ud(" : (sh.form == ShiftForm::up ? "S_u(" : "S_d(");
      out += f + arg + ")";
    }
  }
  return out;
}

}  // namespace qwalk

#endif  // QWALK_PROTOCOL_HPP
