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

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "rotacov/common.hpp"
#include "rotacov/group_poly.hpp"
#include "rotacov/half_int.hpp"
#include "rotacov/ipm.hpp"
#include "rotacov/sdp.hpp"
#include "rotacov/spin_core.hpp"
#include "rotacov/states.hpp"

namespace rotacov {

/// Raised when the backend does not reach an optimal or certified-infeasible status.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, SolveReport r) : std::runtime_error(what), report(std::move(r)) {}
  SolveReport report;
};

inline HalfInt jmax_of(const std::vector<HalfInt>& occupied) {
  if (occupied.empty()) throw std::invalid_argument("jmax_of: empty state");
  return *std::max_element(occupied.begin(), occupied.end());
}
inline HalfInt jmax_of(const SpinKet& k) { return jmax_of(k.occupied()); }
inline HalfInt jmax_of(const BlockDensity& r) { return jmax_of(r.occupied()); }
inline HalfInt jmax_of(const DensityMatrix& r) { return jmax_of(r.occupied()); }

/// Block-diagonal U_g on a multiplicity-free space.
inline MatrixXc rep_on_space(const SpinSpace& s, const Su2& g) {
  MatrixXc U = MatrixXc::Zero(s.dim(), s.dim());
  for (HalfInt j : s.irreps()) U.block(s.offset(j), s.offset(j), irrep_dim(j), irrep_dim(j)) = rep_matrix_at(j, g);
  return U;
}

/// Receives each program right before it is solved (used for SDPA export).
using ProblemSink = std::function<void(const SdpProblem&)>;

// ---------------------------------------------------------------------------
// Kraus blocks

/// (j', j): output irrep, input irrep.
using IrrepPair = std::pair<HalfInt, HalfInt>;

struct KrausIndex {
  std::map<HalfInt, std::vector<IrrepPair>> pairs;  // by J
  std::vector<HalfInt> inputs;

  int position(HalfInt J, const IrrepPair& p) const {
    const auto& v = pairs.at(J);
    auto it = std::find(v.begin(), v.end(), p);
    return it == v.end() ? -1 : static_cast<int>(it - v.begin());
  }
  std::vector<HalfInt> outputs() const {
    std::set<HalfInt> s;
    for (const auto& [J, v] : pairs)
      for (const auto& p : v) s.insert(p.first);
    return {s.begin(), s.end()};
  }
  SpinSpace input_space() const { return SpinSpace(inputs); }
  SpinSpace output_space() const { return SpinSpace(outputs()); }
};

/// J = 0 .. j_in + j_out; input j <= j_in (or the listed irreps); output j' with
/// (j', J, j) a coupling triangle and j' <= j_in + J.
inline KrausIndex build_kraus_index(HalfInt j_in_max, HalfInt j_out_max,
                                    std::optional<std::vector<HalfInt>> inputs = std::nullopt) {
  KrausIndex idx;
  if (inputs) {
    idx.inputs = *inputs;
    std::sort(idx.inputs.begin(), idx.inputs.end());
    idx.inputs.erase(std::unique(idx.inputs.begin(), idx.inputs.end()), idx.inputs.end());
    for (HalfInt j : idx.inputs)
      if (j > j_in_max || j.twice_value() < 0) throw std::invalid_argument("build_kraus_index: input irrep out of range");
  } else {
    for (int t = 0; t <= j_in_max.twice_value(); ++t) idx.inputs.push_back(HalfInt::twice(t));
  }
  const int tJmax = (j_in_max + j_out_max).twice_value();
  for (int tJ = 0; tJ <= tJmax; ++tJ) {
    const HalfInt J = HalfInt::twice(tJ);
    std::vector<IrrepPair> v;
    for (HalfInt j : idx.inputs) {
      for (int tp = 0; tp <= (j_in_max + J).twice_value(); ++tp) {
        const HalfInt jp = HalfInt::twice(tp);
        if (triangle(jp, J, j)) v.push_back({jp, j});
      }
    }
    if (!v.empty()) idx.pairs[J] = std::move(v);
  }
  return idx;
}

struct KrausBlocks {
  KrausIndex index;
  std::map<HalfInt, MatrixXc> F;

  /// sum_{J, j'} F_J[(j', j), (j', j)] - (2j + 1), per input irrep j.
  std::map<HalfInt, double> normalization_defect() const {
    std::map<HalfInt, double> d;
    for (HalfInt j : index.inputs) d[j] = -(j.twice_value() + 1.0);
    for (const auto& [J, v] : index.pairs) {
      const MatrixXc& f = F.at(J);
      for (std::size_t a = 0; a < v.size(); ++a) d[v[a].second] += f(a, a).real();
    }
    return d;
  }
  double max_normalization_defect() const {
    double m = 0.0;
    for (const auto& [j, x] : normalization_defect()) m = std::max(m, std::abs(x));
    return m;
  }
};

/// Unitary channel sum_j Pi_j on the given irreps: one J = 0 block, rank one.
inline KrausBlocks identity_channel(const std::vector<HalfInt>& irreps) {
  KrausBlocks k;
  k.index.inputs = irreps;
  std::sort(k.index.inputs.begin(), k.index.inputs.end());
  std::vector<IrrepPair> v;
  VectorXc f(static_cast<int>(k.index.inputs.size()));
  for (std::size_t i = 0; i < k.index.inputs.size(); ++i) {
    HalfInt j = k.index.inputs[i];
    v.push_back({j, j});
    f(static_cast<int>(i)) = std::sqrt(j.twice_value() + 1.0);
  }
  k.index.pairs[HalfInt()] = v;
  k.F[HalfInt()] = f * f.adjoint();
  return k;
}

namespace detail {

/// 3j symbols memoized for one computation.
class Wigner3jCache {
 public:
  double get(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt m1, HalfInt m2, HalfInt m3) {
    auto key = std::make_tuple(j1.twice_value(), j2.twice_value(), j3.twice_value(), m1.twice_value(),
                               m2.twice_value(), m3.twice_value());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    double v = wigner_3j(j1, j2, j3, m1, m2, m3);
    cache_.emplace(key, v);
    return v;
  }

  /// Coupling weight of |j', m><j, m - M| in the (J, M) Kraus operator:
  /// 3j(j', J, j; -m, M, m - M) (-1)^{j - (m - M)}.
  double weight(HalfInt jp, HalfInt J, HalfInt j, HalfInt m, HalfInt M) {
    const HalfInt mu = m - M;
    if (!valid_projection(j, mu)) return 0.0;
    double w = get(jp, J, j, -m, M, mu);
    return (j - mu).as_int() % 2 ? -w : w;
  }

 private:
  std::map<std::tuple<int, int, int, int, int, int>, double> cache_;
};

}  // namespace detail

/// One term coeff * F_J[a, b] of an output matrix element.
struct ChannelTerm {
  HalfInt J;
  int a = 0;
  int b = 0;
  cplx coeff = 0.0;
};

/// E(rho)_{pq} = sum of terms, for p, q indexing `out`. Linear in rho and F.
inline std::vector<std::vector<std::vector<ChannelTerm>>> channel_coefficients(const DensityMatrix& rho,
                                                                               const KrausIndex& idx,
                                                                               const SpinSpace& out) {
  const int n = out.dim();
  std::vector<std::vector<std::vector<ChannelTerm>>> E(n, std::vector<std::vector<ChannelTerm>>(n));
  detail::Wigner3jCache w3;
  for (const auto& [J, pairs] : idx.pairs) {
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      const auto [jp, j] = pairs[a];
      if (!out.contains(jp) || !rho.space().contains(j)) continue;
      for (std::size_t b = 0; b < pairs.size(); ++b) {
        const auto [kp, k] = pairs[b];
        if (!out.contains(kp) || !rho.space().contains(k)) continue;
        const MatrixXc rb = rho.block(j, k);
        if (rb.norm() == 0.0) continue;
        for (int im = 0; im < irrep_dim(jp); ++im) {
          const HalfInt m = m_at(jp, im);
          for (int imp = 0; imp < irrep_dim(kp); ++imp) {
            const HalfInt mp = m_at(kp, imp);
            cplx c = 0.0;
            for (int tM = -J.twice_value(); tM <= J.twice_value(); tM += 2) {
              const HalfInt M = HalfInt::twice(tM);
              const HalfInt mu = m - M, mup = mp - M;
              if (!valid_projection(j, mu) || !valid_projection(k, mup)) continue;
              const double w1 = w3.weight(jp, J, j, m, M);
              if (w1 == 0.0) continue;
              const double w2 = w3.weight(kp, J, k, mp, M);
              if (w2 == 0.0) continue;
              c += w1 * w2 * rb(m_index(j, mu), m_index(k, mup));
            }
            if (std::abs(c) > 1e-15) {
              E[out.index(jp, m)][out.index(kp, mp)].push_back({J, static_cast<int>(a), static_cast<int>(b), c});
            }
          }
        }
      }
    }
  }
  return E;
}

/// E(rho) on the full output space of F.
inline DensityMatrix channel_output(const DensityMatrix& rho, const KrausBlocks& F) {
  if (F.max_normalization_defect() > 1e-6) throw std::invalid_argument("channel_output: Kraus blocks are not normalized");
  for (HalfInt j : rho.occupied())
    if (!F.index.input_space().contains(j)) throw std::invalid_argument("channel_output: input irrep " + j.str() + " not covered by the channel");
  const SpinSpace out = F.index.output_space();
  auto E = channel_coefficients(rho, F.index, out);
  MatrixXc M = MatrixXc::Zero(out.dim(), out.dim());
  for (int p = 0; p < out.dim(); ++p)
    for (int q = 0; q < out.dim(); ++q)
      for (const ChannelTerm& t : E[p][q]) M(p, q) += t.coeff * F.F.at(t.J)(t.a, t.b);
  return DensityMatrix(out, M);
}

inline DensityMatrix channel_output(const BlockDensity& rho, const KrausBlocks& F) {
  return channel_output(DensityMatrix::from_blocks(rho), F);
}

struct KrausOperator {
  HalfInt J, M;
  int alpha = 0;
  MatrixXc K;  // output_space x input_space
};

/// Rank-one split of each F_J and the resulting Kraus operators for every M.
inline std::vector<KrausOperator> kraus_from_blocks(const KrausBlocks& F, double cutoff = 1e-12) {
  const SpinSpace in = F.index.input_space(), out = F.index.output_space();
  detail::Wigner3jCache w3;
  std::vector<KrausOperator> ops;
  for (const auto& [J, pairs] : F.index.pairs) {
    const MatrixXc& f = F.F.at(J);
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (f + f.adjoint()));
    if (es.eigenvalues().minCoeff() < -1e-8) throw std::invalid_argument("kraus_from_blocks: F_" + J.str() + " is not PSD");
    for (int alpha = 0, col = static_cast<int>(pairs.size()) - 1; col >= 0; --col) {
      const double lam = es.eigenvalues()(col);
      if (lam <= cutoff) continue;
      VectorXc vec = std::sqrt(lam) * es.eigenvectors().col(col);
      for (int tM = -J.twice_value(); tM <= J.twice_value(); tM += 2) {
        const HalfInt M = HalfInt::twice(tM);
        MatrixXc K = MatrixXc::Zero(out.dim(), in.dim());
        for (std::size_t a = 0; a < pairs.size(); ++a) {
          const auto [jp, j] = pairs[a];
          for (int im = 0; im < irrep_dim(jp); ++im) {
            const HalfInt m = m_at(jp, im);
            const HalfInt mu = m - M;
            if (!valid_projection(j, mu)) continue;
            K(out.index(jp, m), in.index(j, mu)) += vec(static_cast<int>(a)) * w3.weight(jp, J, j, m, M);
          }
        }
        ops.push_back({J, M, alpha, std::move(K)});
      }
      ++alpha;
    }
  }
  return ops;
}

// ---------------------------------------------------------------------------
// Characteristic-function programs

namespace detail {

/// Canonical coefficients of U^{(j)}_{m',m} * factor for every (m, m') of irrep j,
/// keyed as (row m, col m') of the density block.
inline std::vector<std::vector<CanonicalCoeffs>> block_charfun_basis(HalfInt j, const GroupPoly& factor) {
  const PolyMatrix U = rep_matrix(j);
  const int d = irrep_dim(j);
  std::vector<std::vector<CanonicalCoeffs>> out(d, std::vector<CanonicalCoeffs>(d));
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) out[r][c] = canonical(U[c][r] * factor);
  return out;
}

/// Appends sum over density entries to the per-monomial expressions.
inline void add_block_terms(std::map<Monomial, LinExpr>& rows, int block,
                            const std::vector<std::vector<CanonicalCoeffs>>& basis, cplx scale = 1.0) {
  const int d = static_cast<int>(basis.size());
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      for (const auto& [mono, coef] : basis[r][c].coeffs()) rows[mono].push_back({block, r, c, scale * coef});
}

inline std::vector<HalfInt> spins_up_to(HalfInt jmax) {
  std::vector<HalfInt> v;
  for (int t = 0; t <= jmax.twice_value(); ++t) v.push_back(HalfInt::twice(t));
  return v;
}

}  // namespace detail

struct MaxProbResult {
  double p = 0.0;
  BlockDensity rho;
  BlockDensity sigma;
  SolveReport report;
};

/// max tr(rho) s.t. pi[chi_psi] = pi[chi_rho chi_phi] + pi[chi_sigma], rho, sigma >= 0.
inline MaxProbResult max_prob(const SpinKet& psi, const SpinKet& phi, SolverOptions opt = SolverOptions::from_env(), const ProblemSink& sink = nullptr) {
  const HalfInt jpsi = jmax_of(psi), jphi = jmax_of(phi);
  MaxProbResult res;
  if (jphi > jpsi) {
    res.p = 0.0;
    res.sigma = BlockDensity::from_ket(psi);
    res.report.status = SolveStatus::Optimal;
    res.report.message = "target needs a larger total spin than the source";
    return res;
  }
  const GroupPoly chi_phi = charfun_pure(phi);
  const CanonicalCoeffs target = canonical(charfun_pure(psi));
  SdpProblem prob;
  std::map<Monomial, LinExpr> rows;
  std::vector<std::pair<HalfInt, int>> rho_blocks, sigma_blocks;
  LinExpr objective;
  for (HalfInt j : detail::spins_up_to(jpsi - jphi)) {
    int b = prob.add_block("rho_" + j.str(), irrep_dim(j));
    rho_blocks.push_back({j, b});
    detail::add_block_terms(rows, b, detail::block_charfun_basis(j, chi_phi));
    for (int r = 0; r < irrep_dim(j); ++r) objective.push_back({b, r, r, 1.0});
  }
  for (HalfInt j : detail::spins_up_to(jpsi)) {
    int b = prob.add_block("sigma_" + j.str(), irrep_dim(j));
    sigma_blocks.push_back({j, b});
    detail::add_block_terms(rows, b, detail::block_charfun_basis(j, GroupPoly::constant(1.0)));
  }
  for (const auto& [mono, c] : target.coeffs()) rows[mono];
  for (auto& [mono, expr] : rows) prob.add_complex_constraint(expr, target.at(mono));
  prob.set_objective(objective);

  if (sink) sink(prob);
  HermitianSolution sol = solve_problem(prob, opt);
  res.report = sol.report;
  if (!sol.report.optimal()) throw SolverFailure(std::string("max_prob: solver status ") + to_string(sol.report.status), sol.report);
  res.p = sol.report.objective;
  for (const auto& [j, b] : rho_blocks) res.rho.set_block(j, sol.blocks[b]);
  for (const auto& [j, b] : sigma_blocks) res.sigma.set_block(j, sol.blocks[b]);
  return res;
}

struct DetFeasibleResult {
  bool feasible = false;
  BlockDensity xi;
  SolveReport report;
  std::string reason;
};

/// Is there a state xi >= 0, tr xi = 1, with pi[chi_psi] = pi[chi_xi chi_phi]?
inline DetFeasibleResult deterministic_feasible(const SpinKet& psi, const SpinKet& phi,
                                                SolverOptions opt = SolverOptions::from_env(), const ProblemSink& sink = nullptr) {
  const HalfInt jpsi = jmax_of(psi), jphi = jmax_of(phi);
  DetFeasibleResult res;
  if (jphi > jpsi) {
    res.reason = "target needs a larger total spin than the source";
    res.report.status = SolveStatus::Infeasible;
    return res;
  }
  const GroupPoly chi_phi = charfun_pure(phi);
  const CanonicalCoeffs target = canonical(charfun_pure(psi));
  SdpProblem prob;
  std::map<Monomial, LinExpr> rows;
  std::vector<std::pair<HalfInt, int>> xi_blocks;
  LinExpr trace;
  for (HalfInt j : detail::spins_up_to(jpsi - jphi)) {
    int b = prob.add_block("xi_" + j.str(), irrep_dim(j));
    xi_blocks.push_back({j, b});
    detail::add_block_terms(rows, b, detail::block_charfun_basis(j, chi_phi));
    for (int r = 0; r < irrep_dim(j); ++r) trace.push_back({b, r, r, 1.0});
  }
  for (const auto& [mono, c] : target.coeffs()) rows[mono];
  for (auto& [mono, expr] : rows) prob.add_complex_constraint(expr, target.at(mono));
  prob.add_constraint(trace, 1.0);
  prob.set_objective({});

  if (sink) sink(prob);
  HermitianSolution sol = solve_problem(prob, opt);
  res.report = sol.report;
  if (sol.report.status == SolveStatus::Infeasible) {
    res.reason = sol.report.message;
    return res;
  }
  if (!sol.report.optimal()) throw SolverFailure(std::string("deterministic_feasible: solver status ") + to_string(sol.report.status), sol.report);
  res.feasible = true;
  for (const auto& [j, b] : xi_blocks) res.xi.set_block(j, sol.blocks[b]);
  return res;
}

// ---------------------------------------------------------------------------
// Fidelity programs

namespace detail {

/// Eigenvectors V and eigenvalues s of a PSD matrix with s above a relative cutoff, m ~ V s V^dagger.
struct Support {
  MatrixXc V;
  VectorXd s;
};

inline Support support(const MatrixXc& m, double rel = 1e-12) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (m + m.adjoint()));
  const double top = std::max(0.0, es.eigenvalues().maxCoeff());
  std::vector<int> keep;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > rel * top && es.eigenvalues()(i) > 0.0) keep.push_back(i);
  Support out{MatrixXc(m.rows(), static_cast<int>(keep.size())), VectorXd(static_cast<int>(keep.size()))};
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.V.col(static_cast<int>(k)) = es.eigenvectors().col(keep[k]);
    out.s(static_cast<int>(k)) = es.eigenvalues()(keep[k]);
  }
  return out;
}

}  // namespace detail

/// max Re tr X s.t. [[rho, X], [X^dagger, sigma]] >= 0, for matrices on a common basis.
/// Both states are first compressed onto their supports, F(rho, V s V^dagger) =
/// F(V^dagger rho V, s), so the program keeps a strictly feasible point.
inline double fidelity_sdp(const MatrixXc& rho, const MatrixXc& sigma, SolverOptions opt = SolverOptions::from_env()) {
  const int n0 = static_cast<int>(rho.rows());
  if (rho.cols() != n0 || sigma.rows() != n0 || sigma.cols() != n0) throw std::invalid_argument("fidelity_sdp: shape mismatch");
  const detail::Support sv = detail::support(sigma);
  if (sv.s.size() == 0) return 0.0;
  const MatrixXc r1 = sv.V.adjoint() * rho * sv.V;
  const detail::Support rv = detail::support(r1);
  if (rv.s.size() == 0) return 0.0;
  const MatrixXc a = rv.s.cast<cplx>().asDiagonal();
  const MatrixXc c = rv.V.adjoint() * sv.s.cast<cplx>().asDiagonal() * rv.V;
  const int n = static_cast<int>(a.rows());
  SdpProblem prob;
  const int W = prob.add_block("W", 2 * n);
  for (int p = 0; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      if (p == q) {
        prob.add_constraint({{W, p, p, 1.0}}, a(p, p).real());
        prob.add_constraint({{W, n + p, n + p, 1.0}}, c(p, p).real());
      } else {
        prob.add_complex_constraint({{W, p, q, 1.0}}, a(p, q));
        prob.add_complex_constraint({{W, n + p, n + q, 1.0}}, c(p, q));
      }
    }
  }
  LinExpr obj;
  for (int p = 0; p < n; ++p) obj.push_back({W, p, n + p, 1.0});
  prob.set_objective(obj);
  HermitianSolution sol = solve_problem(prob, opt);
  if (!sol.report.optimal()) throw SolverFailure(std::string("fidelity_sdp: solver status ") + to_string(sol.report.status), sol.report);
  return sol.report.objective;
}

inline double fidelity_sdp(const DensityMatrix& rho, const DensityMatrix& sigma, SolverOptions opt = SolverOptions::from_env()) {
  if (!(rho.space() == sigma.space())) throw std::invalid_argument("fidelity_sdp: states live on different spaces");
  return fidelity_sdp(rho.matrix(), sigma.matrix(), opt);
}

struct FidelityResult {
  double fidelity = 0.0;
  KrausBlocks channel;
  DensityMatrix output;  // E(rho) on the channel's full output space
  SolveReport report;
};

namespace detail {

struct ChannelProgram {
  SdpProblem prob;
  KrausIndex index;
  std::map<HalfInt, int> fblock;
};

/// F_J blocks and per-input normalization rows.
inline ChannelProgram channel_program(const DensityMatrix& rho, HalfInt j_out_max) {
  ChannelProgram cp;
  const std::vector<HalfInt> occ = rho.occupied();
  cp.index = build_kraus_index(jmax_of(occ), j_out_max, occ);
  std::map<HalfInt, LinExpr> norm;
  for (const auto& [J, pairs] : cp.index.pairs) {
    int b = cp.prob.add_block("F_" + J.str(), static_cast<int>(pairs.size()));
    cp.fblock[J] = b;
    for (std::size_t a = 0; a < pairs.size(); ++a) {
      norm[pairs[a].second].push_back({b, static_cast<int>(a), static_cast<int>(a), 1.0});
    }
  }
  for (auto& [j, expr] : norm) cp.prob.add_constraint(expr, j.twice_value() + 1.0);
  return cp;
}

inline LinExpr channel_entry(const std::vector<ChannelTerm>& terms, const std::map<HalfInt, int>& fblock, cplx scale) {
  LinExpr e;
  for (const ChannelTerm& t : terms) e.push_back({fblock.at(t.J), t.a, t.b, scale * t.coeff});
  return e;
}

inline FidelityResult finish(const ChannelProgram& cp, const DensityMatrix& rho, const HermitianSolution& sol) {
  FidelityResult r;
  r.report = sol.report;
  r.channel.index = cp.index;
  for (const auto& [J, b] : cp.fblock) {
    MatrixXc f = sol.blocks[b];
    r.channel.F[J] = 0.5 * (f + f.adjoint());
  }
  r.output = channel_output(rho, r.channel);
  return r;
}

/// Output window: irreps that carry sigma.
inline SpinSpace target_window(const DensityMatrix& sigma) { return SpinSpace(sigma.occupied()); }

}  // namespace detail

/// Max over covariant channels of F(sigma, E(rho)) via the joint SDP.
inline FidelityResult max_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma,
                                   SolverOptions opt = SolverOptions::from_env(), const ProblemSink& sink = nullptr) {
  const SpinSpace window = detail::target_window(sigma);
  detail::ChannelProgram cp = detail::channel_program(rho, jmax_of(sigma));
  const int nw = window.dim();
  auto E = channel_coefficients(rho, cp.index, window);
  // sigma restricted to the window, then compressed onto its support.
  MatrixXc sw(nw, nw);
  for (HalfInt j : window.irreps())
    for (HalfInt k : window.irreps())
      sw.block(window.offset(j), window.offset(k), irrep_dim(j), irrep_dim(k)) = sigma.block(j, k);
  const detail::Support sv = detail::support(sw);
  const int n = static_cast<int>(sv.s.size());
  if (n == 0) throw std::invalid_argument("max_fidelity: target state is zero");
  const int W = cp.prob.add_block("W", 2 * n);

  for (int p = 0; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      LinExpr top{{W, p, q, 1.0}};
      // (V^dagger E V)_pq
      LinExpr bottom;
      for (int x = 0; x < nw; ++x)
        for (int y = 0; y < nw; ++y) {
          const cplx w = std::conj(sv.V(x, p)) * sv.V(y, q);
          if (std::abs(w) < 1e-15 || E[x][y].empty()) continue;
          LinExpr e = detail::channel_entry(E[x][y], cp.fblock, -w);
          bottom.insert(bottom.end(), e.begin(), e.end());
        }
      bottom.push_back({W, n + p, n + q, 1.0});
      if (p == q) {
        cp.prob.add_constraint(top, sv.s(p));
        cp.prob.add_constraint(bottom, 0.0);
      } else {
        cp.prob.add_complex_constraint(top, 0.0);
        cp.prob.add_complex_constraint(bottom, 0.0);
      }
    }
  }
  LinExpr obj;
  for (int p = 0; p < n; ++p) obj.push_back({W, p, n + p, 1.0});
  cp.prob.set_objective(obj);

  if (sink) sink(cp.prob);
  HermitianSolution sol = solve_problem(cp.prob, opt);
  if (!sol.report.optimal()) throw SolverFailure(std::string("max_fidelity: solver status ") + to_string(sol.report.status), sol.report);
  FidelityResult r = detail::finish(cp, rho, sol);
  r.fidelity = sol.report.objective;
  return r;
}

/// Pure target: max tr(sigma E(rho)), reported as its square root.
inline FidelityResult max_fidelity_pure_target(const DensityMatrix& rho, const SpinKet& target,
                                               SolverOptions opt = SolverOptions::from_env(), const ProblemSink& sink = nullptr) {
  const SpinSpace window(target.occupied());
  detail::ChannelProgram cp = detail::channel_program(rho, jmax_of(target));
  const VectorXc t = target.to_vector(window);
  auto E = channel_coefficients(rho, cp.index, window);
  LinExpr obj;
  const int n = window.dim();
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      // tr(sigma E) = sum_pq sigma_qp E_pq with sigma = t t^dagger.
      cplx sqp = t(q) * std::conj(t(p));
      if (sqp == cplx(0.0)) continue;
      LinExpr e = detail::channel_entry(E[p][q], cp.fblock, sqp);
      obj.insert(obj.end(), e.begin(), e.end());
    }
  cp.prob.set_objective(obj);
  if (sink) sink(cp.prob);
  HermitianSolution sol = solve_problem(cp.prob, opt);
  if (!sol.report.optimal()) throw SolverFailure(std::string("max_fidelity_pure_target: solver status ") + to_string(sol.report.status), sol.report);
  FidelityResult r = detail::finish(cp, rho, sol);
  r.fidelity = std::sqrt(std::max(0.0, sol.report.objective));
  return r;
}

}  // namespace rotacov
