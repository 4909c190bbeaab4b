#ifndef QWALK_LINALG_HPP
#define QWALK_LINALG_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qwalk {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

/// Dense N x N complex matrix, row-major. N is 2 or 4.
template <std::size_t N>
struct Mat {
  static_assert(N == 2 || N == 4, "only 2x2 and 4x4 matrices are supported");
  std::array<cplx, N * N> a{};

  cplx& operator()(std::size_t i, std::size_t j) { return a[i * N + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return a[i * N + j]; }

  static constexpr std::size_t dim() { return N; }

  static Mat identity()
  {
    Mat m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat zero() { return Mat{}; }
};

using Mat2 = Mat<2>;
using Mat4 = Mat<4>;

template <std::size_t N>
using CVec = std::array<cplx, N>;

/// Real 3-vector used for rotation axes, Bloch vectors and Pauli coefficients.
struct Vec3 {
  double x = 0, y = 0, z = 0;

  double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
  double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(const Vec3& u, const Vec3& v) { return {u.x + v.x, u.y + v.y, u.z + v.z}; }
inline Vec3 operator-(const Vec3& u, const Vec3& v) { return {u.x - v.x, u.y - v.y, u.z - v.z}; }
inline Vec3 operator-(const Vec3& u) { return {-u.x, -u.y, -u.z}; }
inline Vec3 operator*(double s, const Vec3& v) { return {s * v.x, s * v.y, s * v.z}; }
inline double dot(const Vec3& u, const Vec3& v) { return u.x * v.x + u.y * v.y + u.z * v.z; }
inline Vec3 cross(const Vec3& u, const Vec3& v)
{
  return {u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

// ---------------------------------------------------------------------------
// elementwise and algebraic helpers

template <std::size_t N>
Mat<N> operator*(const Mat<N>& x, const Mat<N>& y)
{
  Mat<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t k = 0; k < N; ++k) {
      const cplx xik = x(i, k);
      for (std::size_t j = 0; j < N; ++j) r(i, j) += xik * y(k, j);
    }
  return r;
}

template <std::size_t N>
CVec<N> operator*(const Mat<N>& x, const CVec<N>& v)
{
  CVec<N> r{};
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r[i] += x(i, j) * v[j];
  return r;
}

template <std::size_t N>
Mat<N> operator+(const Mat<N>& x, const Mat<N>& y)
{
  Mat<N> r;
  for (std::size_t i = 0; i < N * N; ++i) r.a[i] = x.a[i] + y.a[i];
  return r;
}

template <std::size_t N>
Mat<N> operator-(const Mat<N>& x, const Mat<N>& y)
{
  Mat<N> r;
  for (std::size_t i = 0; i < N * N; ++i) r.a[i] = x.a[i] - y.a[i];
  return r;
}

template <std::size_t N>
Mat<N> operator*(cplx s, const Mat<N>& x)
{
  Mat<N> r;
  for (std::size_t i = 0; i < N * N; ++i) r.a[i] = s * x.a[i];
  return r;
}

template <std::size_t N>
Mat<N> adjoint(const Mat<N>& x)
{
  Mat<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r(i, j) = std::conj(x(j, i));
  return r;
}

template <std::size_t N>
Mat<N> transpose(const Mat<N>& x)
{
  Mat<N> r;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) r(i, j) = x(j, i);
  return r;
}

template <std::size_t N>
Mat<N> conj(const Mat<N>& x)
{
  Mat<N> r;
  for (std::size_t i = 0; i < N * N; ++i) r.a[i] = std::conj(x.a[i]);
  return r;
}

template <std::size_t N>
cplx trace(const Mat<N>& x)
{
  cplx t = 0;
  for (std::size_t i = 0; i < N; ++i) t += x(i, i);
  return t;
}

/// Max-abs entry norm.
template <std::size_t N>
double max_abs(const Mat<N>& x)
{
  double m = 0;
  for (const auto& v : x.a) m = std::max(m, std::abs(v));
  return m;
}

template <std::size_t N>
double max_abs_diff(const Mat<N>& x, const Mat<N>& y)
{
  double m = 0;
  for (std::size_t i = 0; i < N * N; ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
  return m;
}

/// ||U^dagger U - I||_max
template <std::size_t N>
double unitarity_error(const Mat<N>& u)
{
  return max_abs_diff(adjoint(u) * u, Mat<N>::identity());
}

inline cplx det(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

// ---------------------------------------------------------------------------
// Pauli algebra

/// sigma_0 .. sigma_3
inline Mat2 pauli(int j)
{
  Mat2 m;
  const cplx I(0, 1);
  switch (j) {
    case 0: m(0, 0) = 1; m(1, 1) = 1; break;
    case 1: m(0, 1) = 1; m(1, 0) = 1; break;
    case 2: m(0, 1) = -I; m(1, 0) = I; break;
    case 3: m(0, 0) = 1; m(1, 1) = -1; break;
    default: throw std::invalid_argument("pauli index must be 0..3");
  }
  return m;
}

/// v . sigma
inline Mat2 pauli_dot(const Vec3& v)
{
  const cplx I(0, 1);
  Mat2 m;
  m(0, 0) = v.z;
  m(1, 1) = -v.z;
  m(0, 1) = v.x - I * v.y;
  m(1, 0) = v.x + I * v.y;
  return m;
}

/// cos(angle/2) I - i sin(angle/2) (axis . sigma)
inline Mat2 pauli_exp(const Vec3& axis, double angle)
{
  if (!std::isfinite(angle)) throw std::invalid_argument("pauli_exp: angle must be finite");
  if (std::abs(norm(axis) - 1.0) > 1e-12) throw std::invalid_argument("pauli_exp: axis is not normalized");
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  const cplx mis(0, -s);
  Mat2 m;
  m(0, 0) = c + mis * axis.z;
  m(1, 1) = c - mis * axis.z;
  m(0, 1) = mis * cplx(axis.x, -axis.y);
  m(1, 0) = mis * cplx(axis.x, axis.y);
  return m;
}

/// Kronecker product of two 2x2 matrices.
inline Mat4 tensor(const Mat2& x, const Mat2& y)
{
  Mat4 r;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) r(2 * i + k, 2 * j + l) = x(i, j) * y(k, l);
  return r;
}

/// Dynamic-shape overload; throws on anything but 2x2 inputs.
inline Mat4 tensor(const std::vector<cplx>& x, std::size_t nx, const std::vector<cplx>& y, std::size_t ny)
{
  if (nx != 2 || ny != 2 || x.size() != 4 || y.size() != 4)
    throw std::invalid_argument("tensor: both factors must be 2x2");
  Mat2 a, b;
  std::copy(x.begin(), x.end(), a.a.begin());
  std::copy(y.begin(), y.end(), b.a.begin());
  return tensor(a, b);
}

inline Mat4 block_diag(const Mat2& x, const Mat2& y)
{
  Mat4 r;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      r(i, j) = x(i, j);
      r(i + 2, j + 2) = y(i, j);
    }
  return r;
}

inline Mat4 block_offdiag(const Mat2& upper, const Mat2& lower)
{
  Mat4 r;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      r(i, j + 2) = upper(i, j);
      r(i + 2, j) = lower(i, j);
    }
  return r;
}

// ---------------------------------------------------------------------------
// eigen-decomposition of small unitaries

/// Principal argument in (-pi, pi].
inline double principal_arg(cplx z)
{
  const double a = std::arg(z);
  return a <= -pi ? pi : a;
}

template <std::size_t N>
struct EigenPair {
  cplx value;
  CVec<N> vector;
};

namespace detail {

/// Jacobi diagonalization of a Hermitian matrix. Columns of v are eigenvectors.
template <std::size_t N>
void hermitian_jacobi(Mat<N> h, std::array<double, N>& w, Mat<N>& v)
{
  v = Mat<N>::identity();
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = p + 1; q < N; ++q) off += std::norm(h(p, q));
    if (off < 1e-34) break;
    for (std::size_t p = 0; p < N; ++p)
      for (std::size_t q = p + 1; q < N; ++q) {
        const double r = std::abs(h(p, q));
        if (r < 1e-300) continue;
        const cplx ph = h(p, q) / r;
        const double tau = (h(q, q).real() - h(p, p).real()) / (2 * r);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        const double c = 1 / std::sqrt(1 + t * t), s = t * c;
        Mat<N> j = Mat<N>::identity();
        j(p, p) = c;
        j(q, q) = c;
        j(p, q) = s * ph;
        j(q, p) = -s * std::conj(ph);
        h = adjoint(j) * h * j;
        v = v * j;
      }
  }
  for (std::size_t i = 0; i < N; ++i) w[i] = h(i, i).real();
}

template <std::size_t N>
void phase_fix(CVec<N>& x)
{
  double nrm = 0;
  for (const auto& c : x) nrm += std::norm(c);
  nrm = std::sqrt(nrm);
  for (auto& c : x) c /= nrm;
  for (const auto& c : x)
    if (std::abs(c) > 1e-12) {
      const cplx ph = std::conj(c) / std::abs(c);
      for (auto& d : x) d *= ph;
      break;
    }
}

template <std::size_t N>
bool lex_less(const CVec<N>& x, const CVec<N>& y)
{
  for (std::size_t i = 0; i < N; ++i) {
    if (x[i].real() != y[i].real()) return x[i].real() < y[i].real();
    if (x[i].imag() != y[i].imag()) return x[i].imag() < y[i].imag();
  }
  return false;
}

}  // namespace detail

/// Eigenpairs of a unitary, sorted by principal argument descending.
/// Eigenvectors are unit norm with first nonzero component real-positive.
template <std::size_t N>
std::vector<EigenPair<N>> eig_unitary(const Mat<N>& u)
{
  if (unitarity_error(u) > 1e-10) throw std::invalid_argument("eig_unitary: matrix is not unitary");
  static constexpr double mix[] = {0.5772156649015329, 1.618033988749895, -0.7390851332151607,
                                   2.718281828459045, -0.3183098861837907};
  const Mat<N> ud = adjoint(u);
  std::vector<EigenPair<N>> best;
  double best_res = 1e300;
  for (double c : mix) {
    // K = (U+U^dagger)/2 + c (U-U^dagger)/(2i) commutes with U and is Hermitian.
    Mat<N> k;
    for (std::size_t i = 0; i < N * N; ++i)
      k.a[i] = 0.5 * (u.a[i] + ud.a[i]) + c * (u.a[i] - ud.a[i]) / cplx(0, 2);
    std::array<double, N> w;
    Mat<N> v;
    detail::hermitian_jacobi(k, w, v);
    std::vector<EigenPair<N>> out(N);
    double res = 0;
    for (std::size_t j = 0; j < N; ++j) {
      CVec<N> x;
      for (std::size_t i = 0; i < N; ++i) x[i] = v(i, j);
      detail::phase_fix(x);
      const CVec<N> ux = u * x;
      cplx lam = 0;
      for (std::size_t i = 0; i < N; ++i) lam += std::conj(x[i]) * ux[i];
      lam /= std::abs(lam);
      for (std::size_t i = 0; i < N; ++i) res = std::max(res, std::abs(ux[i] - lam * x[i]));
      out[j] = {lam, x};
    }
    if (res < best_res) {
      best_res = res;
      best = out;
    }
    if (res <= 1e-12) break;
  }
  std::sort(best.begin(), best.end(), [](const EigenPair<N>& p, const EigenPair<N>& q) {
    const double ap = principal_arg(p.value), aq = principal_arg(q.value);
    if (std::abs(ap - aq) > 1e-12) return ap > aq;
    return detail::lex_less(p.vector, q.vector);
  });
  return best;
}

}  // namespace qwalk

#endif  // QWALK_LINALG_HPP
