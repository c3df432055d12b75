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

// Acceptance run: one PASS/FAIL line per criterion. Run from the repo root.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "commands.hpp"
#include "oracles.hpp"

using namespace rotacov;
using testing::hi;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;
std::vector<SolveReport> reports;  // every solver call made below

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = dt < limit_s;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("[%s] %d %s: %s (%.3f s, limit %.0f s%s)\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), dt,
              limit_s, in_time ? "" : ", too slow");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

using Terms = std::map<Monomial, cplx>;
bool exact(const GroupPoly& p, const Terms& want) {
  if (p.terms().size() != want.size()) return false;
  for (const auto& [m, c] : want)
    if (p.coeff(m) != c) return false;
  return true;
}

io::json cli_json(const std::vector<std::string>& args, int& code) {
  std::ostringstream out, err;
  code = cli::run(args, out, err);
  if (code != 0) throw std::runtime_error("command failed: " + err.str());
  return io::json::parse(out.str());
}

SpinKet example_psi() {
  SpinKet k;
  k.set(0_hi, 0_hi, 1.0);
  k.set(1_hi, 0_hi, 1.0);
  k.set(half(3), half(3), 2.0);
  return k.normalized();
}

}  // namespace

int main() {
  const double r2 = std::sqrt(2.0);

  criterion(1, "representation matrices j=1/2, j=1", 1, [&] {
    PolyMatrix h = rep_matrix(half(1)), o = rep_matrix(1_hi);
    bool ok = exact(h[0][0], {{{1, 0, 0, 0}, 1.0}}) && exact(h[0][1], {{{0, 0, 0, 1}, -1.0}}) &&
              exact(h[1][0], {{{0, 0, 1, 0}, 1.0}}) && exact(h[1][1], {{{0, 1, 0, 0}, 1.0}});
    ok = ok && exact(o[0][0], {{{2, 0, 0, 0}, 1.0}}) && exact(o[0][1], {{{1, 0, 0, 1}, -r2}}) &&
         exact(o[0][2], {{{0, 0, 0, 2}, 1.0}}) && exact(o[1][0], {{{1, 0, 1, 0}, r2}}) &&
         exact(o[1][1], {{{1, 1, 0, 0}, 1.0}, {{0, 0, 1, 1}, -1.0}}) && exact(o[1][2], {{{0, 1, 0, 1}, -r2}}) &&
         exact(o[2][0], {{{0, 0, 2, 0}, 1.0}}) && exact(o[2][1], {{{0, 1, 1, 0}, r2}}) &&
         exact(o[2][2], {{{0, 2, 0, 0}, 1.0}});
    return Outcome{ok, ok ? "coefficient lists match exactly" : "coefficient mismatch"};
  });

  criterion(2, "characteristic functions", 1, [&] {
    CanonicalCoeffs a = canonical(charfun_pure(SpinKet::basis(1_hi, 1_hi)));
    SpinKet s;
    s.set(1_hi, 1_hi, 1 / r2);
    s.set(0_hi, 0_hi, 1 / r2);
    CanonicalCoeffs b = canonical(charfun_pure(s));
    const bool ok = a.approx_equal(CanonicalCoeffs({{{2, 0, 0, 0}, 1.0}}), 1e-12) &&
                    b.approx_equal(CanonicalCoeffs({{{2, 0, 0, 0}, 0.5}, {{0, 0, 0, 0}, 0.5}}), 1e-12);
    return Outcome{ok, "chi = " + canonical(charfun_pure(SpinKet::basis(1_hi, 1_hi))).as_poly().str() + "; chi = " +
                           b.as_poly().str()};
  });

  criterion(3, "max probability p = 1/3", 30, [&] {
    int code = 0;
    io::json d = cli_json({"maxprob", "data/psi_three_irreps.json", "data/half_down.json"}, code);
    const double p = d["p"].get<double>();
    reports.push_back(max_prob(example_psi(), SpinKet::basis(half(1), half(-1))).report);
    return Outcome{std::abs(p - 1.0 / 3.0) <= 1e-4, fmt("p = %.9f, |p - 1/3| = %.2e (tol 1e-4)", p, std::abs(p - 1.0 / 3.0))};
  });

  criterion(4, "spin increase forbidden", 10, [&] {
    MaxProbResult r = max_prob(SpinKet::basis(half(3), half(3)), SpinKet::basis(2_hi, 2_hi));
    return Outcome{std::abs(r.p) <= 1e-6, fmt("p = %.3e (tol 1e-6)", r.p)};
  });

  criterion(5, "fidelity, three-irrep source to |1/2,-1/2>", 60, [&] {
    FidelityResult r = max_fidelity(DensityMatrix::from_ket(example_psi()),
                                    DensityMatrix::from_ket(SpinKet::basis(half(1), half(-1))));
    reports.push_back(r.report);
    return Outcome{std::abs(r.fidelity - 0.93) <= 0.005, fmt("F = %.6f (target 0.93 +- 0.005)", r.fidelity)};
  });

  criterion(6, "fidelity, |3/2,3/2> to |2,2>", 60, [&] {
    const DensityMatrix in = DensityMatrix::from_ket(SpinKet::basis(half(3), half(3)));
    FidelityResult r = max_fidelity_pure_target(in, SpinKet::basis(2_hi, 2_hi));
    reports.push_back(r.report);
    const DensityMatrix& out = r.output;
    double worst = 0.0;
    for (HalfInt j : out.space().irreps())
      for (int a = 0; a < irrep_dim(j); ++a)
        for (HalfInt k : out.space().irreps())
          for (int b = 0; b < irrep_dim(k); ++b) {
            double want = 0.0;
            if (j == 2_hi && k == 2_hi && a == b) want = a == 0 ? 0.8 : a == 1 ? 0.2 : 0.0;
            worst = std::max(worst, std::abs(out.at(j, m_at(j, a), k, m_at(k, b)) - want));
          }
    const double df = std::abs(r.fidelity - std::sqrt(0.8));
    return Outcome{df <= 1e-3 && worst <= 1e-3,
                   fmt("F = %.6f, |F - sqrt(4/5)| = %.2e, output max entry error %.2e (tol 1e-3)", r.fidelity, df, worst)};
  });

  criterion(7, "interferometer improvement factor and tau = 0 limit", 5, [&] {
    InterferometerSpec s;
    s.gamma = 100.0;
    s.tau = asymptotic_optimal_tau();
    const double f = improvement_factor(s);
    const double want = std::sqrt(3 - std::sqrt(6.0));
    double worst = 0.0;
    for (double g : {0.5, 1.0, 2.0, 10.0, 100.0}) {
      InterferometerSpec z;
      z.gamma = g;
      worst = std::max(worst, std::abs(phase_uncertainty(z) - 1.0 / (2 * g)));
    }
    return Outcome{std::abs(f - want) <= 1e-2 && worst <= 1e-10,
                   fmt("factor = %.6f vs %.6f (tol 1e-2); tau=0 max |dtheta - 1/(2 gamma)| = %.1e (tol 1e-10)", f, want,
                       worst)};
  });

  criterion(8, "extraction probability positive on the grid", 30, [&] {
    double pmin = 1.0;
    bool all = true;
    int n = 0;
    for (double eps : {0.05, 0.1, 0.2})
      for (double g : {0.5, 1.0, 2.0})
        for (double tau : {0.1, 0.3}) {
          InterferometerSpec s;
          s.gamma = g;
          s.epsilon = eps;
          s.tau = tau;
          ExtractionResult e = extraction_probability(s);
          all = all && e.p > 0.0 && e.tail_monotone;
          pmin = std::min(pmin, e.p);
          ++n;
        }
    return Outcome{all, fmt("%g grid points, min p = %.4e", n, pmin) + ", tails monotone: " + (all ? "yes" : "no")};
  });

  criterion(9, "property suites", 300, [&] {
    testing::Rng g(2026);
    const double unit = testing::rep_unitarity_error(g);
    const double hom = testing::rep_homomorphism_error(g);
    const double expp = testing::exp_vs_poly_error(g);
    const double canon = testing::canonical_soundness_error(g);
    const double maj = testing::majorana_rigid_error(g);
    const testing::ChannelErrors ch = testing::channel_errors(g, 50);
    const double fid = testing::fidelity_oracle_error(g, 5);
    const double u1 = testing::u1_roundtrip_error(g, 50);
    const testing::LineAgreement line = testing::line_vs_maxprob();
    std::vector<std::pair<std::string, bool>> parts = {
        {fmt("unitarity %.1e", unit), unit <= 1e-9},
        {fmt("homomorphism %.1e", hom), hom <= 1e-9},
        {fmt("exp-vs-poly %.1e", expp), expp <= 1e-8},
        {fmt("canonical %.1e", canon), canon <= 1e-9},
        {fmt("majorana %.1e", maj), maj <= 1e-6},
        {fmt("trace %.1e", ch.trace), ch.trace <= 1e-7},
        {fmt("covariance %.1e", ch.covariance), ch.covariance <= 1e-7},
        {fmt("fidelity %.1e", fid), fid <= 1e-6},
        {fmt("u1 round trip %.1e", u1), u1 <= 1e-8},
        {fmt("coherent line %g/%g agree", line.agree, line.total), line.agree == line.total && line.total == 10},
    };
    bool ok = true;
    std::string d;
    for (const auto& [txt, good] : parts) {
      ok = ok && good;
      d += (d.empty() ? "" : ", ") + txt + (good ? "" : " [over]");
    }
    return Outcome{ok, d};
  });

  criterion(10, "solver duality gap on the solved instances", 30, [&] {
    double worst = 0.0;
    bool opt = true;
    for (const SolveReport& r : reports) {
      worst = std::max(worst, std::abs(r.gap));
      opt = opt && r.optimal();
    }
    return Outcome{opt && worst <= 1e-8 && !reports.empty(),
                   fmt("%g reports, max relative gap %.2e (tol 1e-8)", static_cast<double>(reports.size()), worst)};
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
