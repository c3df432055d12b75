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
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rotacov/common.hpp"
#include "rotacov/half_int.hpp"
#include "rotacov/spin_core.hpp"
#include "rotacov/states.hpp"

namespace rotacov {

/// Exponents (a, b, c, d) of u^a u*^b v^c v*^d.
using Monomial = std::array<int, 4>;

inline std::string monomial_key(const Monomial& m) {
  return std::to_string(m[0]) + "," + std::to_string(m[1]) + "," + std::to_string(m[2]) + "," +
         std::to_string(m[3]);
}

inline Monomial parse_monomial_key(const std::string& key) {
  Monomial m{};
  std::istringstream in(key);
  std::string part;
  for (int i = 0; i < 4; ++i) {
    if (!std::getline(in, part, ',')) throw std::invalid_argument("bad monomial key '" + key + "'");
    std::size_t used = 0;
    m[i] = std::stoi(part, &used);
    if (used != part.size() || m[i] < 0) throw std::invalid_argument("bad monomial key '" + key + "'");
  }
  if (std::getline(in, part)) throw std::invalid_argument("bad monomial key '" + key + "'");
  return m;
}

/// Sparse polynomial in u, u*, v, v* with complex coefficients.
class GroupPoly {
 public:
  static constexpr double kPrune = 1e-12;

  GroupPoly() = default;
  static GroupPoly constant(cplx c) { return monomial({0, 0, 0, 0}, c); }
  static GroupPoly monomial(const Monomial& m, cplx c = 1.0) {
    GroupPoly p;
    p.add_term(m, c);
    p.prune();
    return p;
  }
  static GroupPoly u() { return monomial({1, 0, 0, 0}); }
  static GroupPoly u_conj() { return monomial({0, 1, 0, 0}); }
  static GroupPoly v() { return monomial({0, 0, 1, 0}); }
  static GroupPoly v_conj() { return monomial({0, 0, 0, 1}); }

  const std::map<Monomial, cplx>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  cplx coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? cplx(0.0) : it->second;
  }

  /// Accumulates without pruning; call prune() when done.
  void add_term(const Monomial& m, cplx c) { terms_[m] += c; }

  void prune(double cutoff = kPrune) {
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (std::abs(it->second) <= cutoff) it = terms_.erase(it);
      else ++it;
    }
  }

  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m[0] + m[1] + m[2] + m[3]);
    return d;
  }

  cplx evaluate(cplx u, cplx v) const {
    const cplx uc = std::conj(u), vc = std::conj(v);
    cplx s = 0.0;
    for (const auto& [m, c] : terms_) s += c * ipow(u, m[0]) * ipow(uc, m[1]) * ipow(v, m[2]) * ipow(vc, m[3]);
    return s;
  }
  cplx evaluate(const Su2& g) const { return evaluate(g.u, g.v); }

  GroupPoly& operator+=(const GroupPoly& o) {
    for (const auto& [m, c] : o.terms_) terms_[m] += c;
    prune();
    return *this;
  }
  GroupPoly& operator-=(const GroupPoly& o) {
    for (const auto& [m, c] : o.terms_) terms_[m] -= c;
    prune();
    return *this;
  }
  GroupPoly operator+(const GroupPoly& o) const {
    GroupPoly r = *this;
    return r += o;
  }
  GroupPoly operator-(const GroupPoly& o) const {
    GroupPoly r = *this;
    return r -= o;
  }
  GroupPoly operator*(cplx s) const {
    GroupPoly r;
    for (const auto& [m, c] : terms_) r.terms_[m] = c * s;
    r.prune();
    return r;
  }
  GroupPoly operator*(const GroupPoly& o) const {
    GroupPoly r;
    for (const auto& [m1, c1] : terms_) {
      for (const auto& [m2, c2] : o.terms_) {
        r.terms_[{m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2], m1[3] + m2[3]}] += c1 * c2;
      }
    }
    r.prune();
    return r;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << "(" << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i)";
      const char* names[4] = {"u", "u*", "v", "v*"};
      for (int i = 0; i < 4; ++i) {
        if (m[i] == 1) os << " " << names[i];
        else if (m[i] > 1) os << " " << names[i] << "^" << m[i];
      }
    }
    return os.str();
  }

 private:
  std::map<Monomial, cplx> terms_;
};

inline GroupPoly poly_add(const GroupPoly& p, const GroupPoly& q) { return p + q; }
inline GroupPoly poly_mul(const GroupPoly& p, const GroupPoly& q) { return p * q; }
inline GroupPoly poly_scale(const GroupPoly& p, cplx c) { return p * c; }
inline cplx evaluate(const GroupPoly& p, cplx u, cplx v) { return p.evaluate(u, v); }

/// Row index m', column index m, both in the order j..-j.
using PolyMatrix = std::vector<std::vector<GroupPoly>>;

/// Entry U^{(j)}_{m',m} as the alternating double-binomial sum.
inline GroupPoly rep_entry(HalfInt j, HalfInt mp, HalfInt m) {
  if (!valid_projection(j, m) || !valid_projection(j, mp)) {
    throw std::invalid_argument("rep_entry: invalid magnetic label");
  }
  const int tj = j.twice_value();
  const int jm = (j - m).as_int(), jpm = (j + m).as_int();
  const int jmp = (j - mp).as_int(), jpmp = (j + mp).as_int();
  const int dm = (m - mp).as_int();
  // sqrt(C(2j, j-m) / C(2j, j-m')) applied per term as sqrt(S^2 A / B) to keep
  // small cases exactly equal to their surd values.
  const double A = binomial(tj, jm), B = binomial(tj, jmp);
  GroupPoly p;
  for (int a = std::max(0, -dm); a <= std::min(jm, jpmp); ++a) {
    double s = binomial(jm, a) * binomial(jpm, dm + a);
    if (s == 0) continue;
    double mag = std::sqrt(s * s * A / B);
    if (a % 2) mag = -mag;
    p.add_term({jpmp - a, jm - a, dm + a, a}, mag);
  }
  p.prune();
  return p;
}

/// Polynomial representation matrix of irrep j.
inline PolyMatrix rep_matrix(HalfInt j) {
  const int d = irrep_dim(j);
  PolyMatrix M(d, std::vector<GroupPoly>(d));
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) M[r][c] = rep_entry(j, m_at(j, r), m_at(j, c));
  return M;
}

inline MatrixXc evaluate(const PolyMatrix& M, cplx u, cplx v) {
  const int d = static_cast<int>(M.size());
  MatrixXc out(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) out(r, c) = M[r][c].evaluate(u, v);
  return out;
}

/// Numeric U^{(j)}(g) from the polynomial form.
inline MatrixXc rep_matrix_at(HalfInt j, const Su2& g) { return evaluate(rep_matrix(j), g.u, g.v); }

namespace detail {

/// Terminating 2F1(a, b; c; z) with a a non-positive integer.
inline cplx hyp2f1_terminating(int a, int b, int c, cplx z) {
  cplx term = 1.0, sum = 1.0;
  for (int k = 0; a + k < 0; ++k) {
    term *= static_cast<double>(a + k) * static_cast<double>(b + k) / (static_cast<double>(c + k) * (k + 1));
    term *= z;
    sum += term;
  }
  return sum;
}

}  // namespace detail

/// U^{(j)}_{m',m}(u, v) through the hypergeometric closed form. Undefined at u = 0.
inline cplx rep_matrix_hypergeom(HalfInt j, HalfInt mp, HalfInt m, cplx u, cplx v) {
  if (!valid_projection(j, m) || !valid_projection(j, mp)) {
    throw std::invalid_argument("rep_matrix_hypergeom: invalid magnetic label");
  }
  if (std::abs(std::norm(u) + std::norm(v) - 1.0) > kTol) {
    throw std::invalid_argument("rep_matrix_hypergeom: |u|^2 + |v|^2 must be 1");
  }
  if (std::abs(u) < 1e-300) {
    throw std::domain_error("rep_matrix_hypergeom: u = 0 is a removable singularity, use the sum form");
  }
  const int tj = j.twice_value();
  const int jm = (j - m).as_int(), jpm = (j + m).as_int();
  const int jmp = (j - mp).as_int(), jpmp = (j + mp).as_int();
  const double ratio = std::sqrt(binomial(tj, jm) / binomial(tj, jmp));
  const cplx uc = std::conj(u), vc = std::conj(v);
  const cplx x = -(v * vc) / (u * uc);
  if (m >= mp) {
    const int d = (m - mp).as_int();
    return binomial(jpm, d) * ratio * ipow(v, d) * ipow(uc, jm) * ipow(u, jpmp) *
           detail::hyp2f1_terminating(-jm, -jpmp, d + 1, x);
  }
  const int d = (mp - m).as_int();
  const double sign = d % 2 ? -1.0 : 1.0;
  return binomial(jm, d) * ratio * sign * ipow(u, jpm) * ipow(vc, d) * ipow(uc, jmp) *
         detail::hyp2f1_terminating(-jpm, -jmp, d + 1, x);
}

/// Applies the group element to every irrep block.
inline SpinKet rotate_state(const SpinKet& ket, cplx u, cplx v) {
  Su2 g = Su2::checked(u, v);
  SpinKet out;
  for (const auto& [j, vec] : ket.blocks()) out.set_block(j, rep_matrix_at(j, g) * vec);
  return out;
}

/// chi_psi = <psi|U_g|psi> = sum_j sum_{m',m} U_{m',m} psi*_{m'} psi_m.
inline GroupPoly charfun_pure(const SpinKet& ket) {
  GroupPoly chi;
  for (const auto& [j, vec] : ket.blocks()) {
    const PolyMatrix U = rep_matrix(j);
    const int d = irrep_dim(j);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        cplx w = std::conj(vec(r)) * vec(c);
        if (w == cplx(0.0)) continue;
        for (const auto& [mono, coef] : U[r][c].terms()) chi.add_term(mono, coef * w);
      }
    }
  }
  chi.prune();
  return chi;
}

/// chi_rho = tr(rho U_g) = sum_j sum_{m,m'} rho_j[m,m'] U_{m',m}.
inline GroupPoly charfun_mixed(const BlockDensity& rho) {
  GroupPoly chi;
  for (const auto& [j, block] : rho.blocks()) {
    const PolyMatrix U = rep_matrix(j);
    const int d = irrep_dim(j);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        cplx w = block(c, r);
        if (w == cplx(0.0)) continue;
        for (const auto& [mono, coef] : U[r][c].terms()) chi.add_term(mono, coef * w);
      }
    }
  }
  chi.prune();
  return chi;
}

/// Coefficients of a polynomial reduced modulo uu* + vv* - 1: no key has both a > 0 and b > 0.
class CanonicalCoeffs {
 public:
  static constexpr double kEqualTol = 1e-8;

  CanonicalCoeffs() = default;
  explicit CanonicalCoeffs(std::map<Monomial, cplx> c) : coeffs_(std::move(c)) {}

  const std::map<Monomial, cplx>& coeffs() const { return coeffs_; }
  cplx at(const Monomial& m) const {
    auto it = coeffs_.find(m);
    return it == coeffs_.end() ? cplx(0.0) : it->second;
  }
  std::size_t size() const { return coeffs_.size(); }

  GroupPoly as_poly() const {
    GroupPoly p;
    for (const auto& [m, c] : coeffs_) p.add_term(m, c);
    p.prune();
    return p;
  }
  cplx evaluate(cplx u, cplx v) const { return as_poly().evaluate(u, v); }

  /// Largest coefficient difference over the union of supports.
  friend double max_abs_diff(const CanonicalCoeffs& a, const CanonicalCoeffs& b) {
    double d = 0.0;
    for (const auto& [m, c] : a.coeffs_) d = std::max(d, std::abs(c - b.at(m)));
    for (const auto& [m, c] : b.coeffs_) d = std::max(d, std::abs(c - a.at(m)));
    return d;
  }
  bool approx_equal(const CanonicalCoeffs& o, double tol = kEqualTol) const {
    return max_abs_diff(*this, o) <= tol;
  }

 private:
  std::map<Monomial, cplx> coeffs_;
};

/// Normal form: every (uu*)^k is rewritten as (1 - vv*)^k.
inline CanonicalCoeffs canonical(const GroupPoly& p) {
  std::map<Monomial, cplx> out;
  for (const auto& [m, c] : p.terms()) {
    const int k = std::min(m[0], m[1]);
    for (int i = 0; i <= k; ++i) {
      double s = binomial(k, i) * (i % 2 ? -1.0 : 1.0);
      out[{m[0] - k, m[1] - k, m[2] + i, m[3] + i}] += s * c;
    }
  }
  for (auto it = out.begin(); it != out.end();) {
    if (std::abs(it->second) <= GroupPoly::kPrune) it = out.erase(it);
    else ++it;
  }
  return CanonicalCoeffs(std::move(out));
}

}  // namespace rotacov
