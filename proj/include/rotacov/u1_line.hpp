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
#include <limits>
#include <map>
#include <vector>

#include <Eigen/QR>

#include "rotacov/common.hpp"
#include "rotacov/half_int.hpp"

namespace rotacov {

/// Probability weights over spin labels (j = 0, 1/2, 1, ...).
using SpinProbSeq = std::map<HalfInt, double>;

struct DeconvResult {
  bool ok = false;
  std::vector<double> x;  // x[0..]
  double residual = 0.0;
};

namespace detail {

/// Solves p = q * x (full convolution) for x of length len(p) - len(q) + 1 in
/// the least-squares sense and checks exactness and non-negativity.
inline DeconvResult deconvolve(const std::vector<double>& p, const std::vector<double>& q, double tol) {
  DeconvResult r;
  const int np = static_cast<int>(p.size()), nq = static_cast<int>(q.size());
  const int nx = np - nq + 1;
  if (nq == 0 || nx <= 0) {
    r.residual = std::numeric_limits<double>::infinity();
    return r;
  }
  MatrixXd T = MatrixXd::Zero(np, nx);
  for (int c = 0; c < nx; ++c)
    for (int i = 0; i < nq; ++i) T(c + i, c) = q[i];
  VectorXd b = Eigen::Map<const VectorXd>(p.data(), np);
  VectorXd x = T.colPivHouseholderQr().solve(b);
  r.residual = (T * x - b).cwiseAbs().maxCoeff();
  r.x.assign(x.data(), x.data() + nx);
  double lo = x.minCoeff();
  r.ok = r.residual <= tol && lo >= -tol;
  return r;
}

inline void strip(const std::vector<double>& v, double cutoff, std::vector<double>& out, int& offset) {
  int lo = 0, hi = static_cast<int>(v.size()) - 1;
  while (lo <= hi && std::abs(v[lo]) <= cutoff) ++lo;
  while (hi >= lo && std::abs(v[hi]) <= cutoff) --hi;
  offset = lo;
  out.assign(v.begin() + lo, v.begin() + hi + 1);
}

inline std::vector<double> clamp_normalize(std::vector<double> w) {
  double s = 0.0;
  for (double& x : w) {
    x = std::max(0.0, x);
    s += x;
  }
  if (s > 0)
    for (double& x : w) x /= s;
  return w;
}

inline void check_distribution(const std::vector<double>& p, const char* name) {
  double s = 0.0;
  for (double x : p) {
    if (!(x >= -1e-12)) throw std::invalid_argument(std::string(name) + " has a negative entry");
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument(std::string(name) + " does not sum to 1");
}

}  // namespace detail

struct U1Result {
  bool feasible = false;
  int delta = 0;           // energy shift applied to p
  std::vector<double> w;   // w[n], n = 0..
  double residual = 0.0;
};

/// p_n, q_n (n = 0, 1, ...): does a shift delta >= 0 and a distribution w exist
/// with p_{n-delta} = sum_m q_m w_{n-m}?
inline U1Result u1_deterministic_feasible(const std::vector<double>& p, const std::vector<double>& q,
                                          double tol = 1e-9) {
  detail::check_distribution(p, "p");
  detail::check_distribution(q, "q");
  std::vector<double> ps, qs;
  int op = 0, oq = 0;
  detail::strip(p, 1e-15, ps, op);
  detail::strip(q, 1e-15, qs, oq);
  U1Result res;
  DeconvResult d = detail::deconvolve(ps, qs, tol);
  res.residual = d.residual;
  if (!d.ok) return res;
  res.feasible = true;
  // Lowest occupied levels: op + delta = oq + s with s the offset of w.
  res.delta = std::max(0, oq - op);
  const int s = op + res.delta - oq;
  std::vector<double> w = detail::clamp_normalize(d.x);
  res.w.assign(static_cast<std::size_t>(s), 0.0);
  res.w.insert(res.w.end(), w.begin(), w.end());
  return res;
}

struct SpinLineResult {
  bool feasible = false;
  SpinProbSeq xi;  // over J
  double residual = 0.0;
};

/// States sum_j sqrt(p_j)|j,j> (source) and sum_j sqrt(q_j)|j,j> (target):
/// deterministic conversion iff p_j = sum_J xi_J q_{j-J} for a distribution xi.
inline SpinLineResult su2_coherent_line_feasible(const SpinProbSeq& source, const SpinProbSeq& target,
                                                 double tol = 1e-9) {
  auto to_vec = [](const SpinProbSeq& s, const char* name) {
    std::vector<double> v;
    for (const auto& [j, x] : s) {
      if (j.twice_value() < 0) throw std::invalid_argument(std::string(name) + ": negative spin label");
      if (static_cast<int>(v.size()) <= j.twice_value()) v.resize(j.twice_value() + 1, 0.0);
      v[j.twice_value()] += x;
    }
    detail::check_distribution(v, name);
    return v;
  };
  std::vector<double> p = to_vec(source, "source"), q = to_vec(target, "target");
  while (!p.empty() && std::abs(p.back()) <= 1e-15) p.pop_back();
  while (!q.empty() && std::abs(q.back()) <= 1e-15) q.pop_back();
  SpinLineResult res;
  DeconvResult d = detail::deconvolve(p, q, tol);
  res.residual = d.residual;
  if (!d.ok) return res;
  res.feasible = true;
  std::vector<double> xi = detail::clamp_normalize(d.x);
  for (std::size_t t = 0; t < xi.size(); ++t) {
    if (xi[t] > 0) res.xi[HalfInt::twice(static_cast<int>(t))] = xi[t];
  }
  return res;
}

/// Symmetric Laurent coefficients c_k, |k| <= K.
struct LaurentCoeffs {
  int K = 0;
  std::vector<double> values;  // values[k + K]

  double operator[](int k) const { return std::abs(k) > K ? 0.0 : values[static_cast<std::size_t>(k + K)]; }
  double sum() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
};

struct InterferometerSpec {
  cplx gamma = 0.0;
  double epsilon = 0.0;
  double tau = 0.0;
  double theta = kPi / 4;

  void validate() const {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
    if (!(tau >= 0.0 && tau < kPi / 2)) throw std::invalid_argument("tau must lie in [0, pi/2)");
  }
};

/// arctan sqrt(5 - 2 sqrt 6): large-amplitude optimum of the squeezing angle.
inline double asymptotic_optimal_tau() { return std::atan(std::sqrt(5.0 - 2.0 * std::sqrt(6.0))); }

/// log(exp(-x) I_k(x)) from the power series; -inf when the value is exactly 0.
inline double log_scaled_bessel(int k, double x) {
  k = std::abs(k);
  if (x == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double h = 0.5 * x;
  // First term (x/2)^k / k!, then t_{m+1}/t_m = h^2 / ((m+1)(m+k+1)).
  const double log_t0 = k * std::log(h) - std::lgamma(k + 1.0);
  double sum = 1.0, t = 1.0;
  for (int m = 0; m < 100000; ++m) {
    t *= h * h / ((m + 1.0) * (m + k + 1.0));
    sum += t;
    if (t < 1e-16 * sum) break;
  }
  return -x + log_t0 + std::log(sum);
}

/// C_k = exp(-|gamma|^2) I_k(|gamma|^2).
inline LaurentCoeffs coherent_charfun_coeffs(cplx gamma, int K) {
  if (K < 1) throw std::invalid_argument("K must be at least 1");
  const double x = std::norm(gamma);
  LaurentCoeffs c;
  c.K = K;
  c.values.resize(2 * K + 1);
  for (int k = -K; k <= K; ++k) c.values[k + K] = std::exp(log_scaled_bessel(k, x));
  return c;
}

/// A_{-4..4}, the Laurent window relating |g>|0> to |g>|tau>.
inline std::array<double, 9> squeezing_window(cplx g, double tau) {
  const double g2 = std::norm(g), g4 = g2 * g2;
  const double s2 = std::sin(tau) * std::sin(tau);
  const double re_g_sq = (g * g).real();
  std::array<double, 9> A{};
  const double a4 = g4 * s2 / 32.0;
  const double a3 = g2 * s2 / 4.0;
  const double a2 = (-2.0 * (g4 - 2.0) * s2 + 2.0 * re_g_sq * std::sqrt(1.0 - std::cos(4.0 * tau))) / 16.0;
  const double a1 = -g2 * s2 / 4.0;
  const double a0 = 1.0 - 2.0 * (a1 + a2 + a3 + a4);
  A = {a4, a3, a2, a1, a0, a1, a2, a3, a4};
  return A;
}

/// P_k for |gamma(1 - epsilon)>|tau>.
inline LaurentCoeffs squeezed_target_coeffs(const InterferometerSpec& spec, int K) {
  if (K < 5) throw std::invalid_argument("K must be at least 5");
  spec.validate();
  const cplx g = spec.gamma * (1.0 - spec.epsilon);
  LaurentCoeffs c = coherent_charfun_coeffs(g, K + 4);
  auto A = squeezing_window(g, spec.tau);
  LaurentCoeffs out;
  out.K = K;
  out.values.resize(2 * K + 1);
  for (int k = -K; k <= K; ++k) {
    double s = 0.0;
    for (int l = -4; l <= 4; ++l) s += A[l + 4] * c[k - l];
    out.values[k + K] = s;
  }
  return out;
}

struct ExtractionResult {
  double p = 0.0;
  int K = 0;
  int argmin_k = 0;
  bool tail_monotone = false;
  std::vector<double> ratio;  // C_k / P_k for |k| <= K, index k + K
};

namespace detail {

/// log C_k - log P_k, computed in log space so deep tails do not underflow.
inline double log_ratio(int k, double x, double xd, const std::array<double, 9>& A) {
  const double log_ck = log_scaled_bessel(k, x);
  const double ref = log_scaled_bessel(k, xd);
  if (!std::isfinite(ref)) {
    // Only reachable for a vacuum target.
    return k == 0 ? log_ck : std::numeric_limits<double>::quiet_NaN();
  }
  double s = 0.0;
  for (int l = -4; l <= 4; ++l) {
    double lc = log_scaled_bessel(k - l, xd);
    if (std::isfinite(lc)) s += A[l + 4] * std::exp(lc - ref);
  }
  if (s <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return log_ck - ref - std::log(s);
}

}  // namespace detail

/// p = min_{|k|<=K} C_k / P_k at a fixed window K.
inline ExtractionResult extraction_probability_at(const InterferometerSpec& spec, int K) {
  spec.validate();
  if (K < 10) throw std::invalid_argument("K must be at least 10");
  const double x = std::norm(spec.gamma);
  const cplx g = spec.gamma * (1.0 - spec.epsilon);
  const double xd = std::norm(g);
  const auto A = squeezing_window(g, spec.tau);
  ExtractionResult r;
  r.K = K;
  r.ratio.resize(2 * K + 1);
  double best = std::numeric_limits<double>::infinity();
  for (int k = -K; k <= K; ++k) {
    double lr = detail::log_ratio(k, x, xd, A);
    double v = std::isnan(lr) ? std::numeric_limits<double>::infinity() : std::exp(lr);
    r.ratio[k + K] = v;
    if (v < best) {
      best = v;
      r.argmin_k = k;
    }
  }
  r.p = std::isfinite(best) ? std::min(best, 1.0) : 1.0;
  // Ratios must be non-decreasing in |k| over the last 10 indices on each side.
  r.tail_monotone = true;
  for (int k = K - 9; k < K; ++k) {
    double a = r.ratio[k + K], b = r.ratio[k + 1 + K];
    double c = r.ratio[-k + K], d = r.ratio[-k - 1 + K];
    if (b < a * (1 - 1e-12) || d < c * (1 - 1e-12)) r.tail_monotone = false;
  }
  return r;
}

inline int default_window(cplx gamma) { return static_cast<int>(std::ceil(4.0 * std::norm(gamma))) + 40; }

/// Grows K from the default until the tail check passes (or k_limit is hit).
inline ExtractionResult extraction_probability(const InterferometerSpec& spec, int K = 0, int k_limit = 4000) {
  if (spec.epsilon == 0.0 && spec.tau > 0.0) {
    // C_k / P_k decays like k^-4; no finite window certifies the infimum (which is 0).
    throw std::domain_error("extraction_probability requires epsilon > 0 when tau > 0");
  }
  if (K <= 0) K = default_window(spec.gamma);
  ExtractionResult r = extraction_probability_at(spec, K);
  while (!r.tail_monotone && K < k_limit) {
    K = std::min(2 * K, k_limit);
    r = extraction_probability_at(spec, K);
  }
  return r;
}

/// Closed-form <dN> = cos(2 theta)(|gamma|^2 + cos(2 tau) - 1).
inline double mean_delta_n(const InterferometerSpec& s) {
  return std::cos(2 * s.theta) * (std::norm(s.gamma) + std::cos(2 * s.tau) - 1.0);
}

/// Closed-form variance of dN for |gamma>|tau>.
inline double variance_delta_n(const InterferometerSpec& s) {
  const double g2 = std::norm(s.gamma);
  const double re_g_sq = (s.gamma * s.gamma).real();
  const double s2t = std::sin(2 * s.theta), c2t = std::cos(2 * s.theta);
  return -2.0 * re_g_sq * s2t * s2t * std::sin(2 * s.tau) / std::sqrt(2.0) -
         2.0 * g2 * (s2t * s2t * std::cos(2 * s.tau) + std::cos(4 * s.theta) / 2.0 - 1.0) +
         2.0 * std::sin(s.tau) * std::sin(s.tau) * (c2t * c2t * std::cos(2 * s.tau) + 1.0);
}

/// Delta theta = sqrt(Var dN) / |d<dN>/dtheta|.
inline double phase_uncertainty(const InterferometerSpec& s) {
  const double slope = -2.0 * std::sin(2 * s.theta) * (std::norm(s.gamma) + std::cos(2 * s.tau) - 1.0);
  if (std::abs(slope) < 1e-14) throw std::domain_error("phase_uncertainty: <dN> is stationary at this theta");
  return std::sqrt(std::max(0.0, variance_delta_n(s))) / std::abs(slope);
}

/// Delta theta relative to the unsqueezed value 1/(2|gamma|).
inline double improvement_factor(const InterferometerSpec& s) {
  return phase_uncertainty(s) * 2.0 * std::abs(s.gamma);
}

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

/// <dN> and Var(dN) on a truncated two-mode Fock space.
inline MeanVariance variance_oracle(const InterferometerSpec& s, int n_cutoff) {
  const double g2 = std::norm(s.gamma);
  if (n_cutoff < 4.0 * g2 + 40) throw std::invalid_argument("variance_oracle: n_cutoff must be at least 4|gamma|^2 + 40");
  // Mode 1 keeps n_cutoff + 2 levels so one application of dN is exact; mode 2 needs 0..3.
  const int d1 = n_cutoff + 2, d2 = 4;
  auto at = [d2](int n1, int n2) { return n1 * d2 + n2; };
  VectorXc psi = VectorXc::Zero(d1 * d2);
  std::vector<cplx> coh(n_cutoff + 1);
  double norm1 = 0.0;
  for (int n = 0; n <= n_cutoff; ++n) {
    // exp(-|g|^2/2) g^n / sqrt(n!) via logs to avoid overflow.
    double mag = g2 == 0.0 ? (n == 0 ? 1.0 : 0.0)
                           : std::exp(-0.5 * g2 + n * std::log(std::abs(s.gamma)) - 0.5 * std::lgamma(n + 1.0));
    coh[n] = mag * std::polar(1.0, n * std::arg(s.gamma));
    norm1 += mag * mag;
  }
  if (1.0 - norm1 > 1e-8) throw std::runtime_error("variance_oracle: cutoff too small (norm deficit)");
  for (int n = 0; n <= n_cutoff; ++n) {
    psi(at(n, 0)) += coh[n] * std::cos(s.tau);
    psi(at(n, 2)) += -coh[n] * std::sin(s.tau);
  }
  // dN = cos2t (n1 - n2) - sin2t (a1^dag a2 + a2^dag a1).
  const double c2 = std::cos(2 * s.theta), s2 = std::sin(2 * s.theta);
  VectorXc w = VectorXc::Zero(d1 * d2);
  for (int n1 = 0; n1 < d1; ++n1) {
    for (int n2 = 0; n2 < d2; ++n2) {
      cplx a = psi(at(n1, n2));
      if (a == cplx(0.0)) continue;
      w(at(n1, n2)) += c2 * (n1 - n2) * a;
      // a1^dag a2 |n1, n2> = sqrt((n1+1) n2) |n1+1, n2-1>
      if (n2 > 0 && n1 + 1 < d1) w(at(n1 + 1, n2 - 1)) += -s2 * std::sqrt((n1 + 1.0) * n2) * a;
      // a2^dag a1 |n1, n2> = sqrt(n1 (n2+1)) |n1-1, n2+1>
      if (n1 > 0 && n2 + 1 < d2) w(at(n1 - 1, n2 + 1)) += -s2 * std::sqrt(n1 * (n2 + 1.0)) * a;
    }
  }
  MeanVariance mv;
  mv.mean = psi.dot(w).real();
  mv.variance = w.squaredNorm() - mv.mean * mv.mean;
  return mv;
}

}  // namespace rotacov
