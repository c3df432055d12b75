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

// Independent reference computations and randomized property checks shared by
// the unit tests and the acceptance runner. Nothing here calls into the code
// path it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rotacov/covariant_sdp.hpp"
#include "rotacov/group_poly.hpp"
#include "rotacov/majorana.hpp"
#include "rotacov/spin_core.hpp"
#include "rotacov/u1_line.hpp"

namespace rotacov::testing {

using Rng = std::mt19937_64;

inline HalfInt hi(int twice) { return HalfInt::twice(twice); }

inline cplx rand_c(Rng& g) {
  std::normal_distribution<double> n;
  return {n(g), n(g)};
}

/// Haar-random element: normalized complex Gaussian pair.
inline Su2 rand_su2(Rng& g) {
  cplx u = rand_c(g), v = rand_c(g);
  double r = std::sqrt(std::norm(u) + std::norm(v));
  return Su2{u / r, v / r};
}

inline VectorXc rand_vec(Rng& g, int n) {
  VectorXc v(n);
  for (int i = 0; i < n; ++i) v(i) = rand_c(g);
  return v.normalized();
}

inline SpinKet rand_ket(Rng& g, const std::vector<HalfInt>& irreps) {
  SpinKet k;
  for (HalfInt j : irreps) k.set_block(j, rand_vec(g, irrep_dim(j)));
  return k.normalized();
}

/// Random full-rank density matrix with unit trace.
inline MatrixXc rand_density(Rng& g, int n, int rank = -1) {
  if (rank < 0) rank = n;
  MatrixXc A(n, rank);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < rank; ++c) A(r, c) = rand_c(g);
  MatrixXc rho = A * A.adjoint();
  return rho / rho.trace().real();
}

// ---------------------------------------------------------------------------
// Dense oracles

/// Hermitian PSD square root by eigendecomposition.
inline MatrixXc psd_sqrt(const MatrixXc& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (m + m.adjoint()));
  VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

/// Uhlmann fidelity tr sqrt(sqrt(sigma) rho sqrt(sigma)).
inline double dense_fidelity(const MatrixXc& rho, const MatrixXc& sigma) {
  const MatrixXc s = psd_sqrt(sigma);
  const MatrixXc inner = s * rho * s;
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (inner + inner.adjoint()));
  return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

/// Spin matrices built from the ladder action directly (not via spin_matrices).
struct Ladder {
  MatrixXc jp, jm, jz;
};
inline Ladder ladder(HalfInt j) {
  const int d = irrep_dim(j);
  const double jj = j.value();
  Ladder l{MatrixXc::Zero(d, d), MatrixXc::Zero(d, d), MatrixXc::Zero(d, d)};
  for (int i = 0; i < d; ++i) {
    const double m = jj - i;
    l.jz(i, i) = m;
    // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>
    if (i > 0) l.jp(i - 1, i) = std::sqrt(jj * (jj + 1) - m * (m + 1));
  }
  l.jm = l.jp.adjoint();
  return l;
}

/// Clebsch-Gordan <j1 m1; j2 m2 | J M> from diagonalizing total J^2 on the
/// product space, Condon-Shortley phase fixed at the top state, then lowering.
inline double brute_force_cg(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  if (!triangle(j1, j2, J) || m1 + m2 != M || !valid_projection(J, M)) return 0.0;
  if (!valid_projection(j1, m1) || !valid_projection(j2, m2)) return 0.0;
  const Ladder a = ladder(j1), b = ladder(j2);
  const int d1 = irrep_dim(j1), d2 = irrep_dim(j2);
  auto kron = [](const MatrixXc& x, const MatrixXc& y) {
    MatrixXc k(x.rows() * y.rows(), x.cols() * y.cols());
    for (int r = 0; r < x.rows(); ++r)
      for (int c = 0; c < x.cols(); ++c) k.block(r * y.rows(), c * y.cols(), y.rows(), y.cols()) = x(r, c) * y;
    return k;
  };
  const MatrixXc I1 = MatrixXc::Identity(d1, d1), I2 = MatrixXc::Identity(d2, d2);
  const MatrixXc Jp = kron(a.jp, I2) + kron(I1, b.jp);
  const MatrixXc Jm = kron(a.jm, I2) + kron(I1, b.jm);
  const MatrixXc Jz = kron(a.jz, I2) + kron(I1, b.jz);
  const MatrixXc J2 = Jm * Jp + Jz * Jz + Jz;
  // Highest weight |J, J>: eigenvector of J^2 with J(J+1) inside Jz = J.
  std::vector<int> sector;
  for (int i = 0; i < d1 * d2; ++i)
    if (std::abs(Jz(i, i).real() - J.value()) < 1e-9) sector.push_back(i);
  MatrixXc sub(sector.size(), sector.size());
  for (std::size_t r = 0; r < sector.size(); ++r)
    for (std::size_t c = 0; c < sector.size(); ++c) sub(r, c) = J2(sector[r], sector[c]);
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(sub);
  const double target = J.value() * (J.value() + 1);
  int pick = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - target) < std::abs(es.eigenvalues()(pick) - target)) pick = i;
  VectorXc top = VectorXc::Zero(d1 * d2);
  for (std::size_t r = 0; r < sector.size(); ++r) top(sector[r]) = es.eigenvectors()(r, pick);
  // Phase: <j1 j1; j2 (J - j1) | J J> real positive.
  const int ref = 0 * d2 + m_index(j2, J - j1);
  top *= std::abs(top(ref)) / top(ref);
  VectorXc state = top;
  for (HalfInt cur = J; cur != M; cur = cur - HalfInt::integer(1)) state = (Jm * state).normalized();
  return state(m_index(j1, m1) * d2 + m_index(j2, m2)).real();
}

/// 3j symbol from the Clebsch-Gordan oracle.
inline double brute_force_3j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
  const double cg = brute_force_cg(j1, m1, j2, m2, j3, -m3);
  const int ph = (j1 - j2 - m3).as_int();
  return (ph % 2 ? -cg : cg) / std::sqrt(j3.twice_value() + 1.0);
}

/// Conversion of an SU(2) element to n with V = exp(i n.sigma / 2), through the
/// matrix logarithm of the 2x2 matrix (Pauli decomposition of -i log V).
inline std::array<double, 3> log_axis(const Su2& g) {
  const Eigen::Matrix2cd V = g.matrix();
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(V);
  Eigen::Vector2cd lg = es.eigenvalues().unaryExpr([](cplx z) { return std::log(z); });
  const Eigen::Matrix2cd L = es.eigenvectors() * lg.asDiagonal() * es.eigenvectors().inverse();
  const Eigen::Matrix2cd H = cplx(0, -2) * L;  // n.sigma
  return {H(0, 1).real(), -H(0, 1).imag(), H(0, 0).real()};
}

// ---------------------------------------------------------------------------
// Property checks (each returns the worst observed error)

/// Unitarity for j <= 5/2 at 100 random points and homomorphism for j <= 2.
inline double rep_unitarity_error(Rng& g) {
  double err = 0.0;
  for (int tj = 0; tj <= 5; ++tj) {
    const PolyMatrix U = rep_matrix(hi(tj));
    for (int t = 0; t < 100; ++t) {
      Su2 s = rand_su2(g);
      MatrixXc M = evaluate(U, s.u, s.v);
      err = std::max(err, (M * M.adjoint() - MatrixXc::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff());
    }
  }
  return err;
}

inline double rep_homomorphism_error(Rng& g) {
  double err = 0.0;
  for (int tj = 0; tj <= 4; ++tj) {
    for (int t = 0; t < 20; ++t) {
      Su2 a = rand_su2(g), b = rand_su2(g);
      MatrixXc lhs = rep_matrix_at(hi(tj), a) * rep_matrix_at(hi(tj), b);
      err = std::max(err, (lhs - rep_matrix_at(hi(tj), a * b)).cwiseAbs().maxCoeff());
    }
  }
  return err;
}

/// Polynomial representation against the exponential parametrization.
inline double exp_vs_poly_error(Rng& g) {
  double err = 0.0;
  for (int tj = 0; tj <= 4; ++tj) {
    for (int t = 0; t < 20; ++t) {
      Su2 s = rand_su2(g);
      if (s.u.real() < -0.9) s = Su2{-s.u, -s.v};  // stay away from the branch cut near -1
      const auto n = log_axis(s);
      err = std::max(err, (rep_matrix_at(hi(tj), s) - exp_rotation(hi(tj), n)).cwiseAbs().maxCoeff());
    }
  }
  return err;
}

inline GroupPoly rand_poly(Rng& g) {
  std::uniform_int_distribution<int> e(0, 3), nterm(1, 8);
  GroupPoly p;
  const int n = nterm(g);
  for (int i = 0; i < n; ++i) p.add_term({e(g), e(g), e(g), e(g)}, rand_c(g));
  p.prune();
  return p;
}

/// evaluate(p) against evaluate(canonical(p)) on the group.
inline double canonical_soundness_error(Rng& g) {
  double err = 0.0;
  for (int t = 0; t < 100; ++t) {
    GroupPoly p = rand_poly(g);
    CanonicalCoeffs c = canonical(p);
    for (const auto& [m, z] : c.coeffs()) {
      if (m[0] > 0 && m[1] > 0) return std::numeric_limits<double>::infinity();
    }
    for (int k = 0; k < 5; ++k) {
      Su2 s = rand_su2(g);
      err = std::max(err, std::abs(p.evaluate(s.u, s.v) - c.evaluate(s.u, s.v)));
    }
  }
  return err;
}

/// Angular mismatch between rotated stars and stars of the rotated state.
inline double majorana_rigid_error(Rng& g) {
  double err = 0.0;
  for (int t = 0; t < 50; ++t) {
    const HalfInt j = hi(1 + t % 6);
    SpinKet k = rand_ket(g, {j});
    Su2 s = rand_su2(g);
    Constellation a = majorana_stars(rotate_state(k, s.u, s.v));
    Constellation b = rotate_constellation(majorana_stars(k), s.rotation());
    err = std::max(err, constellation_distance(a, b));
  }
  return err;
}

/// Random PSD blocks rescaled by a diagonal congruence to meet the normalization.
inline KrausBlocks rand_kraus(Rng& g, HalfInt j_in, HalfInt j_out, std::optional<std::vector<HalfInt>> inputs = std::nullopt) {
  KrausBlocks k;
  k.index = build_kraus_index(j_in, j_out, inputs);
  std::map<HalfInt, double> sum;
  for (const auto& [J, pairs] : k.index.pairs) {
    const int n = static_cast<int>(pairs.size());
    std::uniform_int_distribution<int> rk(1, n);
    MatrixXc F = rand_density(g, n, rk(g)) * static_cast<double>(n);
    for (int a = 0; a < n; ++a) sum[pairs[a].second] += F(a, a).real();
    k.F[J] = F;
  }
  for (auto& [J, F] : k.F) {
    const auto& pairs = k.index.pairs.at(J);
    VectorXc d(pairs.size());
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      HalfInt j = pairs[a].second;
      d(a) = std::sqrt((j.twice_value() + 1.0) / sum[j]);
    }
    F = d.asDiagonal() * F * d.asDiagonal();
  }
  return k;
}

struct ChannelErrors {
  double trace = 0.0;
  double covariance = 0.0;
  double completeness = 0.0;
  double kraus_vs_contraction = 0.0;
};

/// Trace preservation, covariance, Kraus completeness and Kraus/contraction agreement.
inline ChannelErrors channel_errors(Rng& g, int cases = 50) {
  ChannelErrors e;
  for (int t = 0; t < cases; ++t) {
    const HalfInt j_in = hi(1 + t % 3), j_out = hi(t % 4);
    KrausBlocks F = rand_kraus(g, j_in, j_out);
    const SpinSpace in = F.index.input_space();
    DensityMatrix rho(in, rand_density(g, in.dim()));
    DensityMatrix out = channel_output(rho, F);
    e.trace = std::max(e.trace, std::abs(out.trace() - 1.0));

    Su2 s = rand_su2(g);
    const MatrixXc Ui = rep_on_space(in, s), Uo = rep_on_space(out.space(), s);
    DensityMatrix rot(in, Ui * rho.matrix() * Ui.adjoint());
    MatrixXc lhs = channel_output(rot, F).matrix();
    MatrixXc rhs = Uo * out.matrix() * Uo.adjoint();
    e.covariance = std::max(e.covariance, (lhs - rhs).cwiseAbs().maxCoeff());

    if (t < 12) {
      auto ops = kraus_from_blocks(F);
      MatrixXc sum = MatrixXc::Zero(in.dim(), in.dim());
      MatrixXc img = MatrixXc::Zero(out.space().dim(), out.space().dim());
      for (const auto& op : ops) {
        sum += op.K.adjoint() * op.K;
        img += op.K * rho.matrix() * op.K.adjoint();
      }
      e.completeness = std::max(e.completeness, (sum - MatrixXc::Identity(in.dim(), in.dim())).cwiseAbs().maxCoeff());
      e.kraus_vs_contraction = std::max(e.kraus_vs_contraction, (img - out.matrix()).cwiseAbs().maxCoeff());
    }
  }
  return e;
}

/// fidelity_sdp against the dense formula on random 3x3 pairs.
inline double fidelity_oracle_error(Rng& g, int cases = 5) {
  double err = 0.0;
  for (int t = 0; t < cases; ++t) {
    MatrixXc rho = rand_density(g, 3), sigma = rand_density(g, 3, 1 + t % 3);
    err = std::max(err, std::abs(fidelity_sdp(rho, sigma) - dense_fidelity(rho, sigma)));
  }
  return err;
}

inline std::vector<double> rand_dist(Rng& g, int n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> v(n);
  double s = 0;
  for (double& x : v) s += (x = u(g));
  for (double& x : v) x /= s;
  return v;
}

inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k) c[i + k] += a[i] * b[k];
  return c;
}

/// p := q * w always passes and hands back w. Returns +inf on a rejected case.
inline double u1_roundtrip_error(Rng& g, int cases = 50) {
  std::uniform_int_distribution<int> len(1, 8);
  double err = 0.0;
  for (int t = 0; t < cases; ++t) {
    auto q = rand_dist(g, len(g)), w = rand_dist(g, len(g));
    U1Result r = u1_deterministic_feasible(convolve(q, w), q);
    if (!r.feasible || r.delta != 0 || r.w.size() != w.size()) return std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i) err = std::max(err, std::abs(r.w[i] - w[i]));
  }
  return err;
}

/// sum_j sqrt(p_j) |j, j>.
inline SpinKet line_state(const SpinProbSeq& p) {
  SpinKet k;
  for (const auto& [j, x] : p)
    if (x > 0) k.set(j, j, std::sqrt(x));
  return k;
}

struct LineCase {
  SpinProbSeq source, target;
};

inline std::vector<LineCase> line_cases() {
  return {
      {{{hi(1), 0.5}, {hi(2), 0.5}}, {{hi(1), 0.5}, {hi(2), 0.5}}},
      {{{hi(2), 1.0}}, {{hi(1), 1.0}}},
      {{{hi(1), 1.0}}, {{hi(2), 1.0}}},
      {{{hi(1), 0.25}, {hi(2), 0.5}, {hi(3), 0.25}}, {{hi(1), 0.5}, {hi(2), 0.5}}},
      {{{hi(1), 0.5}, {hi(2), 0.5}}, {{hi(1), 0.25}, {hi(2), 0.5}, {hi(3), 0.25}}},
      {{{hi(0), 0.5}, {hi(2), 0.5}}, {{hi(0), 0.5}, {hi(1), 0.5}}},
      {{{hi(1), 0.3}, {hi(3), 0.7}}, {{hi(1), 1.0}}},
      {{{hi(0), 0.2}, {hi(1), 0.8}}, {{hi(0), 0.5}, {hi(1), 0.5}}},
      {{{hi(0), 0.25}, {hi(1), 0.5}, {hi(2), 0.25}}, {{hi(0), 0.5}, {hi(1), 0.5}}},
      {{{hi(1), 0.18}, {hi(2), 0.42}, {hi(3), 0.32}, {hi(4), 0.08}}, {{hi(1), 0.6}, {hi(2), 0.4}}},
  };
}

struct LineAgreement {
  int agree = 0;
  int total = 0;
  int feasible = 0;
};

/// Coherent-line criterion against the full max_prob program (p == 1 within 1e-6).
inline LineAgreement line_vs_maxprob() {
  LineAgreement a;
  for (const LineCase& c : line_cases()) {
    const bool line = su2_coherent_line_feasible(c.source, c.target).feasible;
    const double p = max_prob(line_state(c.source), line_state(c.target)).p;
    const bool sdp = p >= 1.0 - 1e-6;
    a.total++;
    a.feasible += line;
    a.agree += (line == sdp);
  }
  return a;
}

}  // namespace rotacov::testing
