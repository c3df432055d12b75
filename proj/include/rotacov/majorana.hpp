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

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rotacov/common.hpp"
#include "rotacov/spin_core.hpp"
#include "rotacov/states.hpp"

namespace rotacov {

struct Star {
  SphereVec n;
  int multiplicity = 1;
};

struct Constellation {
  HalfInt j;
  std::vector<Star> stars;

  int total() const {
    int t = 0;
    for (const Star& s : stars) t += s.multiplicity;
    return t;
  }
  /// One entry per star, repeated by multiplicity.
  std::vector<SphereVec> expanded() const {
    std::vector<SphereVec> out;
    for (const Star& s : stars)
      for (int i = 0; i < s.multiplicity; ++i) out.push_back(s.n);
    return out;
  }
};

inline constexpr double kLeadingCutoff = 1e-10;
inline constexpr double kStarMerge = 1e-13;

/// Coefficients c_k of <-n|psi> / z1^{2j} as a polynomial in w = z2/z1:
/// c_{j+m} = sqrt(C(2j, j-m)) (-1)^{j+m} psi_m.
inline VectorXc overlap_polynomial(HalfInt j, const VectorXc& psi) {
  const int tj = j.twice_value();
  VectorXc c(tj + 1);
  for (int i = 0; i <= tj; ++i) {
    const int k = tj - i;  // j + m
    c(k) = std::sqrt(binomial(tj, i)) * (k % 2 ? -1.0 : 1.0) * psi(i);
  }
  return c;
}

namespace detail {

/// Roots of sum_k c_k w^k with c_deg != 0, via the companion matrix.
inline std::vector<cplx> poly_roots(const VectorXc& c, int deg) {
  std::vector<cplx> roots;
  int low = 0;
  while (low < deg && std::abs(c(low)) == 0.0) {
    roots.push_back(0.0);
    ++low;
  }
  const int n = deg - low;
  if (n == 0) return roots;
  MatrixXc comp = MatrixXc::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -c(low + i) / c(deg);
  Eigen::ComplexEigenSolver<MatrixXc> es(comp, false);
  for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()(i));
  return roots;
}

// An m-fold root moves by about (rounding)^(1/m) under perturbation, so the
// merge radius depends on the group size. Largest groups are tried first and
// merged stars sit at the normalized centroid, which is accurate to rounding.
inline std::vector<Star> merge_stars(const std::vector<SphereVec>& pts, double rel) {
  const int n = static_cast<int>(pts.size());
  std::vector<Eigen::Vector3d> v;
  for (const SphereVec& p : pts) v.emplace_back(p.x, p.y, p.z);
  std::vector<bool> used(n, false);
  std::vector<Star> out;
  auto emit = [&](const std::vector<int>& group) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (int i : group) {
      sum += v[i];
      used[i] = true;
    }
    sum.normalize();
    out.push_back({SphereVec(sum.x(), sum.y(), sum.z()), static_cast<int>(group.size())});
  };
  for (int k = n; k >= 2; --k) {
    const double tol = 4.0 * std::pow(rel, 1.0 / k);
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      std::vector<int> near;
      for (int q = 0; q < n; ++q)
        if (!used[q]) near.push_back(q);
      if (static_cast<int>(near.size()) < k) break;
      std::sort(near.begin(), near.end(),
                [&](int a, int b) { return (v[a] - v[i]).norm() < (v[b] - v[i]).norm(); });
      near.resize(k);
      double diam = 0.0;
      for (int a : near)
        for (int b : near) diam = std::max(diam, (v[a] - v[b]).norm());
      if (diam < tol) emit(near);
    }
  }
  for (int i = 0; i < n; ++i)
    if (!used[i]) emit({i});
  return out;
}

}  // namespace detail

/// Majorana constellation of a state supported on one irrep.
inline Constellation majorana_stars(const SpinKet& ket) {
  std::vector<HalfInt> occ = ket.occupied();
  if (occ.size() != 1) throw std::invalid_argument("single irrep required");
  const HalfInt j = occ.front();
  VectorXc c = overlap_polynomial(j, ket.block(j));
  const double scale = c.cwiseAbs().maxCoeff();
  int deg = j.twice_value();
  while (deg > 0 && std::abs(c(deg)) <= kLeadingCutoff * scale) --deg;

  std::vector<SphereVec> pts;
  for (cplx w : detail::poly_roots(c, deg)) pts.push_back(SphereVec::from_spinor(1.0, w));
  for (int i = deg; i < j.twice_value(); ++i) pts.push_back(SphereVec(0, 0, -1));

  Constellation out;
  out.j = j;
  out.stars = detail::merge_stars(pts, kStarMerge);
  return out;
}

inline Constellation rotate_constellation(const Constellation& c, const Eigen::Matrix3d& O) {
  if ((O * O.transpose() - Eigen::Matrix3d::Identity()).norm() > 1e-9 || O.determinant() < 0) {
    throw std::invalid_argument("rotate_constellation: not a proper rotation");
  }
  Constellation out;
  out.j = c.j;
  for (const Star& s : c.stars) {
    Eigen::Vector3d n = O * Eigen::Vector3d(s.n.x, s.n.y, s.n.z);
    n.normalize();
    out.stars.push_back({SphereVec(n.x(), n.y(), n.z()), s.multiplicity});
  }
  return out;
}

/// Largest angular mismatch under the best pairing of stars. Brute force for
/// up to 8 stars, greedy beyond.
inline double constellation_distance(const Constellation& a, const Constellation& b) {
  std::vector<SphereVec> x = a.expanded(), y = b.expanded();
  if (x.size() != y.size()) return kPi;
  const std::size_t n = x.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = kPi;
    do {
      double worst = 0.0;
      for (std::size_t i = 0; i < n && worst < best; ++i) worst = std::max(worst, x[i].angle(y[perm[i]]));
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<bool> used(n, false);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = 0;
    double d = 10.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!used[k] && x[i].angle(y[k]) < d) {
        d = x[i].angle(y[k]);
        pick = k;
      }
    }
    used[pick] = true;
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace rotacov
