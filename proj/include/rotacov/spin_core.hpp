// Copyright 2026 The rotacov Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

#include "rotacov/common.hpp"
#include "rotacov/half_int.hpp"
#include "rotacov/states.hpp"

namespace rotacov {

struct SpinMatrices {
  MatrixXc jx, jy, jz;
};

/// Angular momentum matrices in the basis |j,j>, ..., |j,-j>.
inline SpinMatrices spin_matrices(HalfInt j) {
  if (j.twice_value() < 0) throw std::invalid_argument("spin_matrices: negative j");
  const int d = irrep_dim(j);
  const double jj = j.value();
  MatrixXc jp = MatrixXc::Zero(d, d);
  MatrixXc jz = MatrixXc::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    double m = m_at(j, i).value();
    jz(i, i) = m;
    // <m+1| J+ |m> sits one row above.
    if (i > 0) jp(i - 1, i) = std::sqrt(jj * (jj + 1) - m * (m + 1));
  }
  MatrixXc jm = jp.adjoint();
  SpinMatrices s;
  s.jx = 0.5 * (jp + jm);
  s.jy = cplx(0, -0.5) * (jp - jm);
  s.jz = jz;
  return s;
}

/// Unit vector on the sphere.
struct SphereVec {
  double x = 0, y = 0, z = 1;

  SphereVec() = default;
  SphereVec(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {
    double n = std::sqrt(x * x + y * y + z * z);
    if (std::abs(n - 1.0) > 1e-9) throw std::invalid_argument("SphereVec: not a unit vector");
  }

  /// Direction of the spin-1/2 state z1|up> + z2|down>.
  static SphereVec from_spinor(cplx z1, cplx z2) {
    double n2 = std::norm(z1) + std::norm(z2);
    if (n2 <= 0) throw std::invalid_argument("SphereVec: zero spinor");
    cplx w = std::conj(z1) * z2 / n2;
    double z = (std::norm(z1) - std::norm(z2)) / n2;
    SphereVec s;
    s.x = 2 * w.real();
    s.y = 2 * w.imag();
    s.z = z;
    double n = std::sqrt(s.x * s.x + s.y * s.y + s.z * s.z);
    s.x /= n;
    s.y /= n;
    s.z /= n;
    return s;
  }

  /// Some spinor (z1, z2) with from_spinor(z1, z2) == *this.
  std::pair<cplx, cplx> to_spinor() const {
    double theta = std::acos(std::clamp(z, -1.0, 1.0));
    double phi = std::atan2(y, x);
    return {std::cos(theta / 2), std::sin(theta / 2) * std::polar(1.0, phi)};
  }

  std::array<double, 3> array() const { return {x, y, z}; }
  double dot(const SphereVec& o) const { return x * o.x + y * o.y + z * o.z; }
  double chordal_distance(const SphereVec& o) const {
    return std::sqrt((x - o.x) * (x - o.x) + (y - o.y) * (y - o.y) + (z - o.z) * (z - o.z));
  }
  /// Great-circle angle to another vector.
  double angle(const SphereVec& o) const {
    double c = 2 * std::asin(std::min(1.0, 0.5 * chordal_distance(o)));
    return c;
  }
};

/// Spin coherent state psi_m = sqrt(C(2j, j-m)) z1^{j+m} z2^{j-m}.
inline SpinKet coherent_state(HalfInt j, cplx z1, cplx z2) {
  if (std::abs(std::norm(z1) + std::norm(z2) - 1.0) > kTol) {
    throw std::invalid_argument("coherent_state: |z1|^2 + |z2|^2 must be 1");
  }
  const int tj = j.twice_value();
  VectorXc v(tj + 1);
  for (int i = 0; i <= tj; ++i) {
    // i = j - m, so j + m = 2j - i.
    v(i) = std::sqrt(binomial(tj, i)) * ipow(z1, tj - i) * ipow(z2, i);
  }
  SpinKet k;
  k.set_block(j, v);
  return k;
}

/// Antipodal spinor: |-n> for |n> given by (z1, z2).
inline std::pair<cplx, cplx> antipodal(cplx z1, cplx z2) { return {-std::conj(z2), std::conj(z1)}; }

namespace detail {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline cpp_int factorial(int n) {
  cpp_int r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace detail

/// Wigner 3j symbol (j1 j2 j3; m1 m2 m3) by the Racah sum in exact arithmetic.
inline double wigner_3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
  using detail::cpp_int;
  using detail::cpp_rational;
  using detail::factorial;
  if ((m1 + m2 + m3).twice_value() != 0) return 0.0;
  if (!triangle(j1, j2, j3)) return 0.0;
  if (!valid_projection(j1, m1) || !valid_projection(j2, m2) || !valid_projection(j3, m3)) return 0.0;

  // All combinations below are integers once the checks above pass.
  auto I = [](HalfInt h) { return h.as_int(); };
  const int a = I(j1 + j2 - j3), b = I(j1 - j2 + j3), c = I(-j1 + j2 + j3);
  const int s1 = I(j1 + j2 + j3) + 1;
  const int t1 = I(j3 - j2 + m1), t2 = I(j3 - j1 - m2);
  const int t3 = I(j1 + j2 - j3), t4 = I(j1 - m1), t5 = I(j2 + m2);
  const int kmin = std::max({0, -t1, -t2});
  const int kmax = std::min({t3, t4, t5});

  cpp_rational sum = 0;
  for (int k = kmin; k <= kmax; ++k) {
    cpp_int den = factorial(k) * factorial(t1 + k) * factorial(t2 + k) * factorial(t3 - k) *
                  factorial(t4 - k) * factorial(t5 - k);
    cpp_rational term(cpp_int(1), den);
    if (k % 2) sum -= term;
    else sum += term;
  }
  if (sum == 0) return 0.0;

  cpp_rational delta(factorial(a) * factorial(b) * factorial(c), factorial(s1));
  cpp_int prod = factorial(I(j1 + m1)) * factorial(I(j1 - m1)) * factorial(I(j2 + m2)) *
                 factorial(I(j2 - m2)) * factorial(I(j3 + m3)) * factorial(I(j3 - m3));
  cpp_rational square = delta * cpp_rational(prod) * sum * sum;
  double mag = std::sqrt(square.convert_to<double>());
  int phase = I(j1 - j2 - m3);
  bool negative = (sum < 0) != (phase % 2 != 0);
  return negative ? -mag : mag;
}

/// exp(i n.J) in irrep j, via the eigendecomposition of the Hermitian generator.
inline MatrixXc exp_rotation(HalfInt j, const std::array<double, 3>& n) {
  SpinMatrices s = spin_matrices(j);
  MatrixXc g = n[0] * s.jx + n[1] * s.jy + n[2] * s.jz;
  g = 0.5 * (g + g.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(g);
  VectorXc phases = es.eigenvalues().unaryExpr([](double d) { return std::polar(1.0, d); }).cast<cplx>();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Group element V = [[u, -v*], [v, u*]] with |u|^2 + |v|^2 = 1.
struct Su2 {
  cplx u = 1.0, v = 0.0;

  static Su2 checked(cplx u, cplx v, double tol = kTol) {
    if (std::abs(std::norm(u) + std::norm(v) - 1.0) > tol) {
      throw std::invalid_argument("group element needs |u|^2 + |v|^2 = 1");
    }
    return Su2{u, v};
  }

  Eigen::Matrix2cd matrix() const {
    Eigen::Matrix2cd m;
    m << u, -std::conj(v), v, std::conj(u);
    return m;
  }

  /// Matrix product (*this) * o.
  Su2 operator*(const Su2& o) const {
    return Su2{u * o.u - std::conj(v) * o.v, v * o.u + std::conj(u) * o.v};
  }

  Su2 inverse() const { return Su2{std::conj(u), -v}; }

  /// Rotation vector n with V = exp(i n.sigma/2). Principal branch, |n| < 2 pi.
  std::array<double, 3> axis_angle() const {
    double c = u.real();
    double sx = v.imag(), sy = -v.real(), sz = u.imag();
    double s = std::sqrt(sx * sx + sy * sy + sz * sz);
    if (s < 1e-15) return {0.0, 0.0, 0.0};
    double r = 2 * std::atan2(s, c);
    return {r * sx / s, r * sy / s, r * sz / s};
  }

  static Su2 from_axis_angle(const std::array<double, 3>& n) {
    double r = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
    if (r == 0) return Su2{};
    double c = std::cos(r / 2), s = std::sin(r / 2) / r;
    return Su2{cplx(c, s * n[2]), cplx(-s * n[1], s * n[0])};
  }

  /// SO(3) image: R_ab = tr(sigma_a V sigma_b V^dagger) / 2.
  Eigen::Matrix3d rotation() const {
    const Eigen::Matrix2cd V = matrix();
    std::array<Eigen::Matrix2cd, 3> sig;
    sig[0] << 0, 1, 1, 0;
    sig[1] << 0, cplx(0, -1), cplx(0, 1), 0;
    sig[2] << 1, 0, 0, -1;
    Eigen::Matrix3d R;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) R(a, b) = 0.5 * (sig[a] * V * sig[b] * V.adjoint()).trace().real();
    return R;
  }
};

}  // namespace rotacov
