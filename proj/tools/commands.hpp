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

// Command implementations behind the rotacov executable. Each command returns
// a JSON document; run() wires them to argv and maps errors to exit codes.

#pragma once

#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rotacov/covariant_sdp.hpp"
#include "rotacov/majorana.hpp"
#include "rotacov/sdp.hpp"
#include "rotacov/state_io.hpp"
#include "rotacov/u1_line.hpp"

namespace rotacov::cli {

using io::json;

enum ExitCode : int { kOk = 0, kInputError = 2, kSolverError = 3 };

struct Flags {
  bool normalize = false;
  bool csv = false;
  std::string export_sdpa;
};

struct Output {
  json doc;
  std::string csv;  // set only when a CSV view was requested
};

inline json report_json(const SolveReport& r) {
  return {{"status", to_string(r.status)},
          {"objective", io::num(r.objective)},
          {"primal_residual", io::num(r.primal_residual)},
          {"dual_residual", io::num(r.dual_residual)},
          {"gap", io::num(r.gap)},
          {"iterations", r.iterations},
          {"message", r.message}};
}

inline ProblemSink sdpa_sink(const std::string& path) {
  if (path.empty()) return nullptr;
  return [path](const SdpProblem& p) {
    std::ofstream out(path);
    if (!out) throw io::InputError(path, "cannot write SDPA file");
    write_sdpa(out, to_standard(p));
  };
}

inline json coeffs_json(const CanonicalCoeffs& c) {
  json out = json::object();
  for (const auto& [m, z] : c.coeffs()) out[monomial_key(m)] = io::num(z);
  return out;
}

inline Output cmd_charfun(const std::string& path, const Flags& f) {
  io::State s = io::read_state(path, f.normalize);
  GroupPoly chi;
  if (auto* k = std::get_if<SpinKet>(&s)) chi = charfun_pure(*k);
  else if (auto* b = std::get_if<BlockDensity>(&s)) chi = charfun_mixed(*b);
  else chi = charfun_mixed(std::get<DensityMatrix>(s).diagonal_blocks());
  const CanonicalCoeffs c = canonical(chi);
  Output o{coeffs_json(c), {}};
  if (f.csv) {
    std::ostringstream os;
    os.precision(12);
    os << "a,b,c,d,re,im\n";
    for (const auto& [m, z] : c.coeffs()) {
      os << m[0] << "," << m[1] << "," << m[2] << "," << m[3] << "," << io::round12(z.real()) << ","
         << io::round12(z.imag()) << "\n";
    }
    o.csv = os.str();
  }
  return o;
}

inline Output cmd_maxprob(const std::string& psi_path, const std::string& phi_path, const Flags& f) {
  const io::State psi = io::read_state(psi_path, f.normalize);
  const io::State phi = io::read_state(phi_path, f.normalize);
  MaxProbResult r = max_prob(io::require_ket(psi, psi_path), io::require_ket(phi, phi_path),
                             SolverOptions::from_env(), sdpa_sink(f.export_sdpa));
  return {{{"p", io::num(r.p)},
           {"rho", io::to_json(r.rho)},
           {"sigma", io::to_json(r.sigma)},
           {"solver_report", report_json(r.report)}},
          {}};
}

inline Output cmd_detfeasible(const std::string& psi_path, const std::string& phi_path, const Flags& f) {
  const io::State psi = io::read_state(psi_path, f.normalize);
  const io::State phi = io::read_state(phi_path, f.normalize);
  DetFeasibleResult r = deterministic_feasible(io::require_ket(psi, psi_path), io::require_ket(phi, phi_path),
                                               SolverOptions::from_env(), sdpa_sink(f.export_sdpa));
  json doc = {{"feasible", r.feasible}, {"solver_report", report_json(r.report)}};
  doc["xi"] = r.feasible ? io::to_json(r.xi) : json(nullptr);
  if (!r.reason.empty()) doc["reason"] = r.reason;
  return {doc, {}};
}

inline Output cmd_fidelity(const std::string& rho_path, const std::string& sigma_path, bool pure_target,
                           const Flags& f) {
  const io::State rho = io::read_state(rho_path, f.normalize);
  const io::State sigma = io::read_state(sigma_path, f.normalize);
  FidelityResult r = pure_target
                         ? max_fidelity_pure_target(io::to_density(rho), io::require_ket(sigma, sigma_path),
                                                    SolverOptions::from_env(), sdpa_sink(f.export_sdpa))
                         : max_fidelity(io::to_density(rho), io::to_density(sigma), SolverOptions::from_env(),
                                        sdpa_sink(f.export_sdpa));
  json blocks = json::object();
  for (const auto& [J, pairs] : r.channel.index.pairs) {
    json labels = json::array();
    for (const auto& [jp, j] : pairs) labels.push_back({jp.str(), j.str()});
    blocks[J.str()] = {{"pairs", labels}, {"F", io::matrix_json(r.channel.F.at(J))}};
  }
  return {{{"fidelity", io::num(r.fidelity)},
           {"channel_blocks", blocks},
           {"output_state", io::to_json(r.output)},
           {"solver_report", report_json(r.report)}},
          {}};
}

struct InterferometerArgs {
  double gamma = 1.0;
  double epsilon = 0.0;
  double tau = 0.0;
  bool optimal_tau = false;
  double theta = kPi / 4;
  int kmax = 0;
};

inline Output cmd_interferometer(const InterferometerArgs& a, const Flags& f) {
  InterferometerSpec spec;
  spec.gamma = a.gamma;
  spec.epsilon = a.epsilon;
  spec.tau = a.optimal_tau ? asymptotic_optimal_tau() : a.tau;
  spec.theta = a.theta;
  spec.validate();
  if (a.kmax < 0) throw std::invalid_argument("--kmax must be nonnegative");
  const int K = a.kmax > 0 ? a.kmax : std::min(default_window(spec.gamma), 200);
  const LaurentCoeffs C = coherent_charfun_coeffs(spec.gamma, K);
  const LaurentCoeffs P = squeezed_target_coeffs(spec, std::max(K, 5));

  json doc;
  json ks = json::array(), cs = json::array(), ps = json::array();
  for (int k = -K; k <= K; ++k) {
    ks.push_back(k);
    cs.push_back(io::num(C[k]));
    ps.push_back(io::num(P[k]));
  }
  doc["k"] = ks;
  doc["C_k"] = cs;
  doc["P_k"] = ps;
  doc["tau"] = io::num(spec.tau);
  if (spec.epsilon == 0.0 && spec.tau > 0.0) {
    doc["p_extract"] = 0.0;
    doc["p_extract_note"] = "infimum of C_k/P_k is 0 without loss";
  } else {
    ExtractionResult e = extraction_probability(spec, a.kmax > 0 ? std::max(a.kmax, 10) : 0);
    doc["p_extract"] = io::num(e.p);
    doc["p_extract_window"] = e.K;
    doc["p_extract_argmin_k"] = e.argmin_k;
    doc["tail_monotone"] = e.tail_monotone;
  }
  doc["mean_delta_n"] = io::num(mean_delta_n(spec));
  doc["variance_delta_n"] = io::num(variance_delta_n(spec));
  doc["delta_theta"] = io::num(phase_uncertainty(spec));
  doc["improvement_factor"] = io::num(improvement_factor(spec));
  Output o{doc, {}};
  if (f.csv) {
    std::ostringstream os;
    os.precision(12);
    os << "k,C_k,P_k\n";
    for (int k = -K; k <= K; ++k) os << k << "," << io::round12(C[k]) << "," << io::round12(P[k]) << "\n";
    o.csv = os.str();
  }
  return o;
}

inline Output cmd_majorana(const std::string& path, const Flags& f) {
  const io::State s = io::read_state(path, f.normalize);
  const Constellation c = majorana_stars(io::require_ket(s, path));
  json stars = json::array();
  for (const Star& st : c.stars) {
    stars.push_back({{"n", {io::num(st.n.x), io::num(st.n.y), io::num(st.n.z)}}, {"multiplicity", st.multiplicity}});
  }
  return {{{"j", c.j.str()}, {"stars", stars}}, {}};
}

/// {"p": [...], "q": [...]} for the U(1) test, {"source": {...}, "target": {...}}
/// (probabilities keyed by spin) for the coherent spin line.
inline Output cmd_u1check(const std::string& path, const Flags&) {
  const json doc = io::read_json_file(path);
  auto seq = [&](const char* key) {
    const json& v = doc.at(key);
    if (!v.is_array()) throw io::InputError(path + ": " + key, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(io::parse_real(v[i], path + ": " + key + "[" + std::to_string(i) + "]"));
    return out;
  };
  auto spin_seq = [&](const char* key) {
    const json& v = doc.at(key);
    if (!v.is_object()) throw io::InputError(path + ": " + key, "expected an object keyed by spin");
    SpinProbSeq out;
    for (const auto& [k, x] : v.items()) {
      const std::string w = path + ": " + key + "[\"" + k + "\"]";
      out[io::parse_half(json(k), w)] += io::parse_real(x, w);
    }
    return out;
  };
  try {
    if (doc.contains("p") && doc.contains("q")) {
      U1Result r = u1_deterministic_feasible(seq("p"), seq("q"));
      json w = json::array();
      for (double x : r.w) w.push_back(io::num(x));
      return {{{"mode", "u1"}, {"feasible", r.feasible}, {"delta", r.delta}, {"w", w}, {"residual", io::num(r.residual)}}, {}};
    }
    if (doc.contains("source") && doc.contains("target")) {
      SpinLineResult r = su2_coherent_line_feasible(spin_seq("source"), spin_seq("target"));
      json xi = json::object();
      for (const auto& [J, x] : r.xi) xi[J.str()] = io::num(x);
      return {{{"mode", "su2-line"}, {"feasible", r.feasible}, {"xi", xi}, {"residual", io::num(r.residual)}}, {}};
    }
  } catch (const json::exception& e) {
    throw io::InputError(path, e.what());
  }
  throw io::InputError(path, "expected keys 'p' and 'q', or 'source' and 'target'");
}

inline void emit(const Output& o, std::ostream& out) {
  if (!o.csv.empty()) out << o.csv;
  else out << o.doc.dump(2) << "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Jobs are argv lists (without the program name), run concurrently.
inline int run_batch(const std::string& path, std::ostream& out, std::ostream& err) {
  const json doc = io::read_json_file(path);
  if (!doc.is_array()) throw io::InputError(path, "batch file must hold an array of argument lists");
  std::vector<std::vector<std::string>> jobs;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string w = path + ": [" + std::to_string(i) + "]";
    if (!doc[i].is_array()) throw io::InputError(w, "expected an array of strings");
    std::vector<std::string> a;
    for (const json& s : doc[i]) {
      if (!s.is_string()) throw io::InputError(w, "expected an array of strings");
      a.push_back(s.get<std::string>());
    }
    if (!a.empty() && a.front() == "--batch") throw io::InputError(w, "nested batch jobs are not allowed");
    jobs.push_back(std::move(a));
  }
  struct JobResult {
    int code;
    std::string out, err;
  };
  std::vector<std::future<JobResult>> futs;
  for (const auto& a : jobs) {
    futs.push_back(std::async(std::launch::async, [a] {
      std::ostringstream o, e;
      int code = run(a, o, e);
      return JobResult{code, o.str(), e.str()};
    }));
  }
  json results = json::array();
  int worst = kOk;
  for (std::size_t i = 0; i < futs.size(); ++i) {
    JobResult r = futs[i].get();
    worst = std::max(worst, r.code);
    json entry = {{"args", jobs[i]}, {"exit_code", r.code}};
    if (r.code == kOk) {
      json parsed = json::parse(r.out, nullptr, false);
      if (parsed.is_discarded()) entry["csv"] = r.out;
      else entry["output"] = parsed;
    } else {
      entry["error"] = r.err;
    }
    results.push_back(entry);
  }
  out << results.dump(2) << "\n";
  (void)err;
  return worst;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Covariant transformations of spin systems", "rotacov"};
  app.require_subcommand(0, 1);
  std::string batch;
  app.add_option("--batch", batch, "JSON array of argument lists to run concurrently");

  Flags f;
  std::string a1, a2;
  bool pure_target = false;
  InterferometerArgs ia;

  auto* charfun = app.add_subcommand("charfun", "canonical characteristic-function coefficients");
  charfun->add_option("state", a1)->required();
  charfun->add_flag("--normalize", f.normalize);
  charfun->add_flag("--csv", f.csv);

  auto* maxprob = app.add_subcommand("maxprob", "largest success probability of psi -> phi");
  maxprob->add_option("psi", a1)->required();
  maxprob->add_option("phi", a2)->required();
  maxprob->add_flag("--normalize", f.normalize);
  maxprob->add_option("--export-sdpa", f.export_sdpa, "write the program in SDPA sparse format");

  auto* det = app.add_subcommand("detfeasible", "is psi -> phi possible deterministically");
  det->add_option("psi", a1)->required();
  det->add_option("phi", a2)->required();
  det->add_flag("--normalize", f.normalize);
  det->add_option("--export-sdpa", f.export_sdpa, "write the program in SDPA sparse format");

  auto* fid = app.add_subcommand("fidelity", "best fidelity of a covariant channel output with a target");
  fid->add_option("rho", a1)->required();
  fid->add_option("sigma", a2)->required();
  fid->add_flag("--pure-target", pure_target, "target is a ket; optimizes <sigma|E(rho)|sigma>");
  fid->add_flag("--normalize", f.normalize);
  fid->add_option("--export-sdpa", f.export_sdpa, "write the program in SDPA sparse format");

  auto* itf = app.add_subcommand("interferometer", "squeezed-light interferometer figures");
  itf->add_option("--gamma", ia.gamma, "coherent amplitude (real)")->required();
  itf->add_option("--epsilon", ia.epsilon, "amplitude loss");
  auto* tau_opt = itf->add_option("--tau", ia.tau, "squeezing angle");
  itf->add_flag("--optimal-tau", ia.optimal_tau, "use the large-amplitude optimal squeezing angle")->excludes(tau_opt);
  itf->add_option("--theta", ia.theta, "beam splitter angle");
  itf->add_option("--kmax", ia.kmax, "coefficient window |k| <= kmax");
  itf->add_flag("--csv", f.csv);

  auto* maj = app.add_subcommand("majorana", "Majorana constellation of a single-irrep ket");
  maj->add_option("state", a1)->required();
  maj->add_flag("--normalize", f.normalize);

  auto* u1 = app.add_subcommand("u1check", "convolution test for U(1) or coherent spin-line states");
  u1->add_option("file", a1)->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  try {
    if (!batch.empty()) {
      if (app.get_subcommands().size()) throw io::InputError("--batch", "cannot be combined with a command");
      return run_batch(batch, out, err);
    }
    Output o;
    if (charfun->parsed()) o = cmd_charfun(a1, f);
    else if (maxprob->parsed()) o = cmd_maxprob(a1, a2, f);
    else if (det->parsed()) o = cmd_detfeasible(a1, a2, f);
    else if (fid->parsed()) o = cmd_fidelity(a1, a2, pure_target, f);
    else if (itf->parsed()) o = cmd_interferometer(ia, f);
    else if (maj->parsed()) o = cmd_majorana(a1, f);
    else if (u1->parsed()) o = cmd_u1check(a1, f);
    else {
      err << app.help();
      return kInputError;
    }
    emit(o, out);
    return kOk;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::domain_error& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace rotacov::cli
