#ifndef QWALK_SYMMETRY_HPP
#define QWALK_SYMMETRY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/linalg.hpp"
#include "qwalk/protocol.hpp"
#include "qwalk/spectrum.hpp"

namespace qwalk {

inline constexpr double symmetry_threshold = 1e-8;
inline constexpr int symmetry_grid = 16;

enum class Relation { phs, trs, chs };

inline const char* relation_name(Relation r)
{
  switch (r) {
    case Relation::phs: return "phs";
    case Relation::trs: return "trs";
    case Relation::chs: return "chs";
  }
  return "?";
}

template <std::size_t N>
struct SymmetryOperator {
  Mat<N> matrix = Mat<N>::identity();
  bool antiunitary = false;
  bool momentum_flip = false;
  std::string label;
};

/// +1 or -1 when the operator squares to +-identity, 0 otherwise.
template <std::size_t N>
int operator_square(const SymmetryOperator<N>& op)
{
  const Mat<N> sq = op.antiunitary ? op.matrix * conj(op.matrix) : op.matrix * op.matrix;
  if (max_abs_diff(sq, Mat<N>::identity()) <= 1e-10) return 1;
  if (max_abs_diff(sq, cplx(-1) * Mat<N>::identity()) <= 1e-10) return -1;
  return 0;
}

struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Effective Hamiltonians on a symmetric offset grid k_i = -pi + 2 pi (i + 1/2)/n.
/// The grid maps onto itself under k -> -k, so H(-k) is a lookup.
template <std::size_t N>
struct HGrid {
  int n = 0;
  int dim = 1;
  std::vector<Mat<N>> h;
  std::vector<char> usable;
  std::vector<Vec3> nvec;  // Bloch direction for two-band grids

  std::size_t size() const { return h.size(); }

  std::size_t mirror(std::size_t idx) const
  {
    std::size_t r = 0, stride = 1;
    for (int a = 0; a < dim; ++a) {
      const std::size_t i = idx % n;
      idx /= n;
      r += (n - 1 - i) * stride;
      stride *= n;
    }
    return r;
  }
};

inline Momentum grid_momentum(int dim, int n, std::size_t idx)
{
  Momentum k;
  k.n = dim;
  for (int a = 0; a < dim; ++a) {
    const std::size_t i = idx % n;
    idx /= n;
    k[a] = -pi + 2 * pi * (i + 0.5) / n;
  }
  return k;
}

inline std::size_t grid_points(int dim, int n)
{
  std::size_t t = 1;
  for (int a = 0; a < dim; ++a) t *= n;
  return t;
}

namespace detail {

inline constexpr double branch_margin = 1e-6;

}  // namespace detail

inline HGrid<2> hamiltonian_grid2(const ProtocolSpec& s, int n)
{
  HGrid<2> g;
  g.n = n;
  g.dim = s.dimension;
  const std::size_t m = grid_points(s.dimension, n);
  g.h.resize(m);
  g.usable.resize(m);
  g.nvec.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const BandPoint p = band_point(s, grid_momentum(s.dimension, n, i));
    g.h[i] = cplx(p.e_plus) * pauli_dot(p.gapless ? Vec3{} : p.n);
    g.usable[i] = (pi - p.e_plus) > detail::branch_margin && !p.gapless;
    g.nvec[i] = p.n;
  }
  return g;
}

inline HGrid<4> hamiltonian_grid4(const ProtocolSpec& s, int n)
{
  HGrid<4> g;
  g.n = n;
  g.dim = s.dimension;
  const std::size_t m = grid_points(s.dimension, n);
  g.h.resize(m);
  g.usable.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto hm = hamiltonian(build_doubled(s, grid_momentum(s.dimension, n, i)));
    g.h[i] = hm.h;
    g.usable[i] = hm.branch_distance > detail::branch_margin;
  }
  return g;
}

/// Max residual of a symmetry relation over the usable grid points.
///   phs: M H*(k') M^dagger + H(k);  trs: M H*(k') M^dagger - H(k);  chs: M^dagger H(k) M + H(k)
/// with k' = -k under momentum flip; unitary operators act without conjugation.
template <std::size_t N>
double relation_residual(const HGrid<N>& g, const SymmetryOperator<N>& op, Relation rel, double stop_above = 1e300)
{
  const Mat<N> m = op.matrix, md = adjoint(op.matrix);
  double worst = 0;
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const std::size_t j = op.momentum_flip ? g.mirror(i) : i;
    if (!g.usable[i] || !g.usable[j]) continue;
    any = true;
    Mat<N> t;
    if (rel == Relation::chs && !op.antiunitary)
      t = md * g.h[j] * m;
    else
      t = m * (op.antiunitary ? conj(g.h[j]) : g.h[j]) * md;
    const double sgn = rel == Relation::trs ? -1.0 : 1.0;
    double r = 0;
    for (std::size_t e = 0; e < N * N; ++e) r = std::max(r, std::abs(t.a[e] + sgn * g.h[i].a[e]));
    worst = std::max(worst, r);
    if (worst > stop_above) return worst;
  }
  if (!any) throw DegenerateInputError("no gap-open grid points available for the symmetry check");
  return worst;
}

template <std::size_t N>
HGrid<N> hamiltonian_grid(const ProtocolSpec& s, int n)
{
  if constexpr (N == 2) {
    if (s.bands() != 2) throw std::invalid_argument("protocol " + s.id + " has four bands");
    return hamiltonian_grid2(s, n);
  } else {
    if (s.bands() != 4) throw std::invalid_argument("protocol " + s.id + " has two bands");
    return hamiltonian_grid4(s, n);
  }
}

template <std::size_t N>
double check_relation(const ProtocolSpec& s, const SymmetryOperator<N>& op, Relation rel, int grid_n = symmetry_grid)
{
  return relation_residual(hamiltonian_grid<N>(s, grid_n), op, rel);
}

// ---------------------------------------------------------------------------
// candidate operators

namespace detail {

/// Eigenvector of the smallest eigenvalue of a real symmetric 3x3 matrix, plus that eigenvalue.
inline std::pair<Vec3, double> smallest_eigvec3(std::array<std::array<double, 3>, 3> a)
{
  std::array<std::array<double, 3>, 3> v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (off < 1e-40) break;
    for (int p = 0; p < 3; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double tau = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        const double c = 1 / std::sqrt(1 + t * t), s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (a[i][i] < a[best][best]) best = i;
  Vec3 e{v[0][best], v[1][best], v[2][best]};
  for (int i = 0; i < 3; ++i)
    if (std::abs(e[i]) > 1e-12) {
      if (e[i] < 0) e = -e;
      break;
    }
  return {e, a[best][best]};
}

}  // namespace detail

struct PlaneFit {
  Vec3 axis;
  double residual = 0;  // smallest eigenvalue of the mean n n^T
};

/// Best-fit normal of the plane containing n(k) over the usable grid.
inline PlaneFit plane_fit(const HGrid<2>& g)
{
  std::array<std::array<double, 3>, 3> m{};
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.usable[i]) continue;
    ++cnt;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) m[a][b] += g.nvec[i][a] * g.nvec[i][b];
  }
  if (cnt == 0) throw DegenerateInputError("no gap-open grid points for plane fit");
  for (auto& r : m)
    for (auto& x : r) x /= static_cast<double>(cnt);
  auto [v, l] = detail::smallest_eigvec3(m);
  return {v, l};
}

inline std::string pauli_label(int j)
{
  static const char* n[] = {"s0", "sx", "sy", "sz"};
  return n[j];
}

template <std::size_t N>
std::vector<std::pair<Mat<N>, std::string>> pauli_products()
{
  std::vector<std::pair<Mat<N>, std::string>> out;
  if constexpr (N == 2) {
    for (int j = 0; j < 4; ++j) out.push_back({pauli(j), pauli_label(j)});
  } else {
    static const char* t[] = {"t0", "tx", "ty", "tz"};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out.push_back({tensor(pauli(i), pauli(j)), std::string(t[i]) + "*" + pauli_label(j)});
  }
  return out;
}

/// Default search set: phase * Pauli product, phase in {1, i}, unitary and antiunitary, with and without flip.
template <std::size_t N>
std::vector<SymmetryOperator<N>> default_candidates()
{
  std::vector<SymmetryOperator<N>> out;
  for (const auto& [m, name] : pauli_products<N>())
    for (int ph = 0; ph < 2; ++ph)
      for (int anti = 0; anti < 2; ++anti)
        for (int flip = 0; flip < 2; ++flip) {
          SymmetryOperator<N> op;
          op.matrix = ph ? cplx(0, 1) * m : m;
          op.antiunitary = anti;
          op.momentum_flip = flip;
          op.label = (ph ? "i*" : "") + name + (anti ? " K" : "");
          out.push_back(op);
        }
  return out;
}

template <std::size_t N>
void add_roles(std::vector<SymmetryOperator<N>>& out, const Mat<N>& m, const std::string& name)
{
  for (int ph = 0; ph < 2; ++ph)
    for (int anti = 0; anti < 2; ++anti)
      for (int flip = 0; flip < 2; ++flip) {
        SymmetryOperator<N> op;
        op.matrix = ph ? cplx(0, 1) * m : m;
        op.antiunitary = anti;
        op.momentum_flip = flip;
        op.label = (ph ? "i*" : "") + name + (anti ? " K" : "");
        out.push_back(op);
      }
}

inline std::string vec_label(const Vec3& a)
{
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.6f,%.6f,%.6f).s", a.x, a.y, a.z);
  return buf;
}

/// Operators built from the plane normal A of a two-band protocol: A.sigma and,
/// for doubled protocols, its block lifts diag(G, +-G*) and offdiag(G, +-G*).
inline std::vector<SymmetryOperator<2>> known_candidates(const ProtocolSpec& s, const HGrid<2>& g)
{
  std::vector<SymmetryOperator<2>> out;
  (void)s;
  const PlaneFit pf = plane_fit(g);
  add_roles<2>(out, pauli_dot(pf.axis), vec_label(pf.axis));
  return out;
}

inline std::vector<SymmetryOperator<4>> known_candidates(const ProtocolSpec& s, const HGrid<4>& g, int grid_n)
{
  (void)g;
  std::vector<SymmetryOperator<4>> out;
  const ProtocolSpec b = base_protocol(s);
  const HGrid<2> bg = hamiltonian_grid2(b, grid_n);
  const PlaneFit pf = plane_fit(bg);
  const Mat2 gm = pauli_dot(pf.axis);
  const std::string n = vec_label(pf.axis);
  for (int sgn : {1, -1}) {
    const Mat2 lower = cplx(sgn) * conj(gm);
    const std::string sl = sgn > 0 ? "+" : "-";
    add_roles<4>(out, block_diag(gm, lower), "diag(" + n + "," + sl + "conj)");
    add_roles<4>(out, block_offdiag(gm, lower), "offdiag(" + n + "," + sl + "conj)");
  }
  return out;
}

template <std::size_t N>
struct SearchHit {
  SymmetryOperator<N> op;
  double residual;
  int square;
};

/// Candidates satisfying the relation within the threshold, annotated with their squares.
template <std::size_t N>
std::vector<SearchHit<N>> operator_search(const HGrid<N>& g, Relation rel, const std::vector<SymmetryOperator<N>>& cands)
{
  std::vector<SearchHit<N>> hits;
  for (const auto& op : cands) {
    const double r = relation_residual(g, op, rel, symmetry_threshold);
    if (r <= symmetry_threshold) hits.push_back({op, r, operator_square(op)});
  }
  return hits;
}

template <std::size_t N>
std::vector<SearchHit<N>> operator_search(const ProtocolSpec& s, Relation rel, int grid_n = symmetry_grid)
{
  return operator_search(hamiltonian_grid<N>(s, grid_n), rel, default_candidates<N>());
}

// ---------------------------------------------------------------------------
// classification

struct SymmetryEntry {
  bool present = false;
  int square = 0;                 // +1 / -1 when present
  double residual = 0;            // best residual of the reported operator
  double residual_noflip = -1;    // antiunitary only: best residual without momentum flip; -1 if not computed
  bool squares_both = false;      // operators of both squares were found
  std::string op;
};

struct SymmetryReport {
  std::string id;
  int dimension = 1;
  SymmetryEntry phs, trs, chs;
  std::string az_family;
  std::string invariant_group;  // "Z", "Z2" or "0"
};

/// Tenfold-way label from (P^2, T^2, Gamma present).
inline std::string az_family(int p, int t, int c)
{
  if (p == 0 && t == 0) return c ? "AIII" : "A";
  if (p == 0 && t == 1) return "AI";
  if (p == 0 && t == -1) return "AII";
  if (p == 1 && t == 0) return "D";
  if (p == -1 && t == 0) return "C";
  if (p == 1 && t == 1) return "BDI";
  if (p == 1 && t == -1) return "DIII";
  if (p == -1 && t == -1) return "CII";
  return "CI";
}

/// Invariant group of a family in dimension 1, 2 or 3.
inline std::string invariant_group(int dim, const std::string& fam)
{
  static const char* fams[] = {"A", "AIII", "AI", "BDI", "D", "DIII", "AII", "CII", "C", "CI"};
  static const char* tab[3][10] = {
      {"0", "Z", "0", "Z", "Z2", "Z2", "0", "Z", "0", "0"},
      {"Z", "0", "0", "0", "Z", "Z2", "Z2", "0", "Z", "0"},
      {"0", "Z", "0", "0", "0", "Z", "Z2", "Z2", "0", "Z"},
  };
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1..3");
  for (int i = 0; i < 10; ++i)
    if (fam == fams[i]) return tab[dim - 1][i];
  throw std::invalid_argument("unknown family " + fam);
}

struct InconsistentSymmetryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <std::size_t N>
SymmetryOperator<N> compose_ops(const SymmetryOperator<N>& a, const SymmetryOperator<N>& b)
{
  // (A K^a)(B K^b) = A B^(*a) K^(a xor b)
  SymmetryOperator<N> r;
  r.matrix = a.matrix * (a.antiunitary ? conj(b.matrix) : b.matrix);
  r.antiunitary = a.antiunitary != b.antiunitary;
  r.momentum_flip = a.momentum_flip != b.momentum_flip;
  r.label = "(" + a.label + ")(" + b.label + ")";
  return r;
}

template <std::size_t N>
SymmetryEntry summarize(const std::vector<SearchHit<N>>& hits, bool antiunitary)
{
  SymmetryEntry e;
  bool plus = false, minus = false;
  double rp = 1e300, rm = 1e300;
  std::string lp, lm;
  for (const auto& h : hits) {
    if (h.square == 1 && h.residual < rp) {
      plus = true;
      rp = h.residual;
      lp = h.op.label;
    }
    if (h.square == -1 && h.residual < rm) {
      minus = true;
      rm = h.residual;
      lm = h.op.label;
    }
  }
  if (!plus && !minus) return e;
  e.present = true;
  e.squares_both = plus && minus;
  // both squares realised: antiunitary reports -1, unitary reports the Hermitian (+1) representative
  const bool pick_minus = plus && minus ? antiunitary : minus;
  e.square = pick_minus ? -1 : 1;
  e.residual = pick_minus ? rm : rp;
  e.op = pick_minus ? lm : lp;
  return e;
}

template <std::size_t N>
std::vector<SearchHit<N>> filter_role(const std::vector<SearchHit<N>>& hits, bool antiunitary, bool flip)
{
  std::vector<SearchHit<N>> out;
  for (const auto& h : hits)
    if (h.op.antiunitary == antiunitary && h.op.momentum_flip == flip && h.square != 0) out.push_back(h);
  return out;
}

template <std::size_t N>
double best_residual(const std::vector<SearchHit<N>>& hits)
{
  double r = -1;
  for (const auto& h : hits) r = r < 0 ? h.residual : std::min(r, h.residual);
  return r;
}

template <std::size_t N>
SymmetryReport classify_grid(const ProtocolSpec& s, const HGrid<N>& g, std::vector<SymmetryOperator<N>> cands)
{
  const auto extra = [&]() {
    if constexpr (N == 2)
      return known_candidates(s, g);
    else
      return known_candidates(s, g, g.n);
  }();
  cands.insert(cands.end(), extra.begin(), extra.end());

  auto p_hits = operator_search(g, Relation::phs, cands);
  auto t_hits = operator_search(g, Relation::trs, cands);
  auto c_hits = operator_search(g, Relation::chs, cands);

  auto P = filter_role(p_hits, true, true);
  auto Tm = filter_role(t_hits, true, true);
  auto C = filter_role(c_hits, false, false);

  // closure under composition: Gamma P -> T, T P -> Gamma, Gamma T -> P
  auto close = [&](const auto& xs, const auto& ys, Relation rel, auto& into) {
    for (const auto& x : xs)
      for (const auto& y : ys) {
        const auto op = compose_ops(x.op, y.op);
        const double r = relation_residual(g, op, rel, symmetry_threshold);
        if (r <= symmetry_threshold) into.push_back({op, r, operator_square(op)});
      }
  };
  std::vector<SearchHit<N>> t_new, c_new, p_new;
  close(C, P, Relation::trs, t_new);
  close(Tm, P, Relation::chs, c_new);
  close(C, Tm, Relation::phs, p_new);
  for (auto& h : filter_role(t_new, true, true)) Tm.push_back(h);
  for (auto& h : filter_role(c_new, false, false)) C.push_back(h);
  for (auto& h : filter_role(p_new, true, true)) P.push_back(h);

  SymmetryReport rep;
  rep.id = s.id;
  rep.dimension = s.dimension;
  rep.phs = summarize(P, true);
  rep.trs = summarize(Tm, true);
  rep.chs = summarize(C, false);
  rep.phs.residual_noflip = best_residual(filter_role(p_hits, true, false));
  rep.trs.residual_noflip = best_residual(filter_role(t_hits, true, false));

  const int present = rep.phs.present + rep.trs.present + rep.chs.present;
  if (present == 2) {
    std::string msg = "inconsistent symmetry findings for " + s.id + ": ";
    msg += std::string("phs=") + (rep.phs.present ? "yes" : "no") + " trs=" + (rep.trs.present ? "yes" : "no") +
           " chs=" + (rep.chs.present ? "yes" : "no");
    throw InconsistentSymmetryError(msg);
  }
  rep.az_family = az_family(rep.phs.present ? rep.phs.square : 0, rep.trs.present ? rep.trs.square : 0,
                            rep.chs.present ? 1 : 0);
  rep.invariant_group = invariant_group(s.dimension, rep.az_family);
  return rep;
}

}  // namespace detail

inline SymmetryReport classify(const ProtocolSpec& s, int grid_n = symmetry_grid)
{
  s.validate();
  if (s.bands() == 2) return detail::classify_grid(s, hamiltonian_grid2(s, grid_n), default_candidates<2>());
  return detail::classify_grid(s, hamiltonian_grid4(s, grid_n), default_candidates<4>());
}

/// Generic parameters used for catalog classification.
inline AngleMap catalog_angles() { return {{Angle::alpha, 0.37}, {Angle::beta, 1.13}, {Angle::gamma, -0.71}, {Angle::zeta, 0.52}}; }
inline constexpr int catalog_steps = 3;

inline ProtocolSpec catalog_protocol(const std::string& id)
{
  return make_protocol(id, catalog_angles(), catalog_steps);
}

}  // namespace qwalk

#endif  // QWALK_SYMMETRY_HPP
