#ifndef QWALK_SPECTRUM_HPP
#define QWALK_SPECTRUM_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

#include "qwalk/linalg.hpp"
#include "qwalk/protocol.hpp"

namespace qwalk {

inline constexpr double eps_gap = 1e-9;

/// U = e^{i phase} (d0 I - i d . sigma)
struct BlochDecomposition {
  double d0 = 1;
  Vec3 d;
  double phase = 0;
};

struct BandPoint {
  double e_plus = 0;  // in [0, pi]
  BlochDecomposition dec;
  bool gapless = false;  // ||d|| <= eps_gap, n undefined
  Vec3 n;                // d/||d|| when gapped
};

inline BlochDecomposition decompose(const Mat2& u)
{
  BlochDecomposition b;
  Mat2 v = u;
  if (std::abs(trace(u).imag()) / 2 > 1e-10) {
    b.phase = std::arg(det(u)) / 2;
    v = std::polar(1.0, -b.phase) * u;
  }
  b.d0 = trace(v).real() / 2;
  for (int j = 1; j <= 3; ++j) b.d[j - 1] = -trace(pauli(j) * v).imag() / 2;
  return b;
}

inline BandPoint bands_from_unitary(const Mat2& u)
{
  if (unitarity_error(u) > 1e-10) throw std::invalid_argument("bands_from_unitary: matrix is not unitary");
  BandPoint p;
  p.dec = decompose(u);
  p.e_plus = std::acos(std::clamp(p.dec.d0, -1.0, 1.0));
  const double dn = norm(p.dec.d);
  p.gapless = dn <= eps_gap;
  if (!p.gapless) p.n = (1 / dn) * p.dec.d;
  return p;
}

inline BandPoint band_point(const ProtocolSpec& s, const Momentum& k) { return bands_from_unitary(build_base(s, k)); }

inline double e_plus(const ProtocolSpec& s, const Momentum& k) { return band_point(s, k).e_plus; }

/// Central difference of the + band along one axis; empty when the stencil touches a gap closing.
inline std::optional<double> group_velocity_numeric(const ProtocolSpec& s, const Momentum& k, int axis, double h = 1e-5)
{
  if (axis < 0 || axis >= s.dimension) throw std::invalid_argument("velocity axis out of range");
  Momentum kp = k, km = k;
  kp[axis] += h;
  km[axis] -= h;
  const BandPoint p = band_point(s, kp), m = band_point(s, km), c = band_point(s, k);
  if (p.gapless || m.gapless || c.gapless) return std::nullopt;
  return (p.e_plus - m.e_plus) / (2 * h);
}

/// Effective Hamiltonian H with U = exp(-i H); eigenphases taken in (-pi, pi].
template <std::size_t N>
struct Hamiltonian {
  Mat<N> h;
  double branch_distance = 0;  // min over eigenphases of pi - |eps|
};

inline Hamiltonian<2> hamiltonian(const Mat2& u)
{
  const BandPoint p = bands_from_unitary(u);
  Hamiltonian<2> r;
  r.h = cplx(p.e_plus) * pauli_dot(p.gapless ? Vec3{} : p.n);
  r.branch_distance = pi - p.e_plus;
  return r;
}

inline Hamiltonian<4> hamiltonian(const Mat4& u)
{
  const auto ev = eig_unitary(u);
  Hamiltonian<4> r;
  r.branch_distance = pi;
  for (const auto& e : ev) {
    const double eps = -principal_arg(e.value);
    r.branch_distance = std::min(r.branch_distance, pi - std::abs(eps));
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) r.h(i, j) += eps * e.vector[i] * std::conj(e.vector[j]);
  }
  return r;
}

/// Quasi-energies of a 4-band protocol, descending.
inline std::array<double, 4> quasi_energies(const Mat4& u)
{
  const auto ev = eig_unitary(u);
  std::array<double, 4> e{};
  for (std::size_t i = 0; i < 4; ++i) e[i] = -principal_arg(ev[i].value);
  std::sort(e.begin(), e.end(), std::greater<>());
  return e;
}

}  // namespace qwalk

#endif  // QWALK_SPECTRUM_HPP
