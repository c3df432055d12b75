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

// JSON state files.
//
//   ket:     {"terms": [{"j": "3/2", "m": "1/2", "re": 0.5, "im": 0.0}, ...]}
//   blocks:  {"blocks": {"1": [[a, b, c], ...], "1/2": ...}}
//   dense:   {"irreps": ["0", "1"], "matrix": [[...], ...]}
//
// Matrix entries are numbers or [re, im] pairs. Half-integers are "p/2"
// strings or plain integers.

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "rotacov/common.hpp"
#include "rotacov/half_int.hpp"
#include "rotacov/states.hpp"

namespace rotacov::io {

using json = nlohmann::json;

/// Malformed or invalid input. `where` names the offending field.
class InputError : public std::invalid_argument {
 public:
  InputError(const std::string& where, const std::string& what)
      : std::invalid_argument(where.empty() ? what : where + ": " + what), field(where) {}
  std::string field;
};

inline constexpr double kNormTol = 1e-8;

using State = std::variant<SpinKet, BlockDensity, DensityMatrix>;

/// Rounds to 12 significant digits so output is stable across platforms.
inline double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

inline json num(double x) { return round12(x); }
inline json num(cplx z) { return json::array({round12(z.real()), round12(z.imag())}); }

inline HalfInt parse_half(const json& v, const std::string& where) {
  try {
    if (v.is_string()) return HalfInt::parse(v.get<std::string>());
    if (v.is_number_integer()) return HalfInt::integer(v.get<int>());
  } catch (const std::exception& e) {
    throw InputError(where, e.what());
  }
  throw InputError(where, "expected an integer or a \"p/2\" string");
}

inline double parse_real(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where, "expected a number");
  return v.get<double>();
}

inline cplx parse_complex(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 2) return {parse_real(v[0], where + "[0]"), parse_real(v[1], where + "[1]")};
  if (v.is_object()) {
    double re = v.contains("re") ? parse_real(v["re"], where + ".re") : 0.0;
    double im = v.contains("im") ? parse_real(v["im"], where + ".im") : 0.0;
    return {re, im};
  }
  throw InputError(where, "expected a number or an [re, im] pair");
}

inline MatrixXc parse_matrix(const json& v, int dim, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim) {
    throw InputError(where, "expected " + std::to_string(dim) + " rows");
  }
  MatrixXc m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    const std::string wr = where + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || static_cast<int>(v[r].size()) != dim) {
      throw InputError(wr, "expected " + std::to_string(dim) + " entries");
    }
    for (int c = 0; c < dim; ++c) m(r, c) = parse_complex(v[r][c], wr + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline json matrix_json(const MatrixXc& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(num(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

namespace detail {

inline void check_density(const MatrixXc& m, const std::string& where) {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kNormTol) throw InputError(where, "matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (m + m.adjoint()));
  if (es.eigenvalues().minCoeff() < -kNormTol) throw InputError(where, "matrix is not positive semidefinite");
}

inline void check_trace(double tr, bool normalize, const char* what) {
  if (tr <= 0.0) throw InputError("", std::string(what) + " is zero");
  if (!normalize && std::abs(tr - 1.0) > kNormTol) {
    std::ostringstream os;
    os.precision(12);
    os << what << " is " << tr << ", not 1 (pass --normalize to rescale)";
    throw InputError("", os.str());
  }
}

}  // namespace detail

inline SpinKet parse_ket(const json& doc, bool normalize) {
  const json& terms = doc.at("terms");
  if (!terms.is_array()) throw InputError("terms", "expected an array");
  SpinKet k;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string w = "terms[" + std::to_string(i) + "]";
    const json& t = terms[i];
    if (!t.is_object()) throw InputError(w, "expected an object");
    if (!t.contains("j")) throw InputError(w, "missing field 'j'");
    if (!t.contains("m")) throw InputError(w, "missing field 'm'");
    HalfInt j = parse_half(t["j"], w + ".j"), m = parse_half(t["m"], w + ".m");
    if (j.twice_value() < 0) throw InputError(w + ".j", "negative spin");
    if (!valid_projection(j, m)) throw InputError(w + ".m", "projection " + m.str() + " not allowed for j = " + j.str());
    double re = t.contains("re") ? parse_real(t["re"], w + ".re") : 0.0;
    double im = t.contains("im") ? parse_real(t["im"], w + ".im") : 0.0;
    k.add(j, m, cplx(re, im));
  }
  const double n = k.norm();
  detail::check_trace(n * n, normalize, "squared norm");
  return normalize ? k.normalized() : k;
}

inline BlockDensity parse_blocks(const json& doc, bool normalize) {
  const json& blocks = doc.at("blocks");
  if (!blocks.is_object()) throw InputError("blocks", "expected an object keyed by spin");
  BlockDensity rho;
  for (const auto& [key, val] : blocks.items()) {
    const std::string w = "blocks[\"" + key + "\"]";
    HalfInt j = parse_half(json(key), w);
    if (j.twice_value() < 0) throw InputError(w, "negative spin");
    MatrixXc m = parse_matrix(val, irrep_dim(j), w);
    detail::check_density(m, w);
    rho.set_block(j, m);
  }
  const double tr = rho.trace();
  detail::check_trace(tr, normalize, "trace");
  if (normalize && tr != 1.0) {
    BlockDensity out;
    for (const auto& [j, b] : rho.blocks()) out.set_block(j, b / tr);
    return out;
  }
  return rho;
}

inline DensityMatrix parse_dense(const json& doc, bool normalize) {
  const json& irr = doc.at("irreps");
  if (!irr.is_array() || irr.empty()) throw InputError("irreps", "expected a non-empty array");
  std::vector<HalfInt> js;
  for (std::size_t i = 0; i < irr.size(); ++i) js.push_back(parse_half(irr[i], "irreps[" + std::to_string(i) + "]"));
  SpinSpace space(js);
  if (static_cast<std::size_t>(space.irreps().size()) != js.size()) throw InputError("irreps", "duplicate spin label");
  // Rows follow the sorted irrep order.
  MatrixXc m = parse_matrix(doc.at("matrix"), space.dim(), "matrix");
  detail::check_density(m, "matrix");
  const double tr = m.trace().real();
  detail::check_trace(tr, normalize, "trace");
  if (normalize) m /= tr;
  return DensityMatrix(space, m);
}

inline State parse_state(const json& doc, bool normalize = false) {
  if (!doc.is_object()) throw InputError("", "state file must hold a JSON object");
  if (doc.contains("terms")) return parse_ket(doc, normalize);
  if (doc.contains("blocks")) return parse_blocks(doc, normalize);
  if (doc.contains("irreps")) return parse_dense(doc, normalize);
  throw InputError("", "expected one of 'terms', 'blocks' or 'irreps'");
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path, e.what());
  }
}

inline State read_state(const std::string& path, bool normalize = false) {
  json doc = read_json_file(path);
  try {
    return parse_state(doc, normalize);
  } catch (const InputError& e) {
    throw InputError(path, e.what());
  } catch (const json::exception& e) {
    throw InputError(path, e.what());
  }
}

inline DensityMatrix to_density(const State& s) {
  if (auto* k = std::get_if<SpinKet>(&s)) return DensityMatrix::from_ket(*k);
  if (auto* b = std::get_if<BlockDensity>(&s)) return DensityMatrix::from_blocks(*b);
  return std::get<DensityMatrix>(s);
}

inline const SpinKet& require_ket(const State& s, const std::string& what) {
  if (auto* k = std::get_if<SpinKet>(&s)) return *k;
  throw InputError(what, "a pure state ('terms') is required");
}

inline json to_json(const SpinKet& k, double cutoff = 0.0) {
  json terms = json::array();
  for (const auto& [j, v] : k.blocks()) {
    for (int i = 0; i < v.size(); ++i) {
      if (std::abs(v(i)) <= cutoff) continue;
      terms.push_back({{"j", j.str()}, {"m", m_at(j, i).str()}, {"re", round12(v(i).real())}, {"im", round12(v(i).imag())}});
    }
  }
  return {{"terms", terms}};
}

inline json to_json(const BlockDensity& rho) {
  json blocks = json::object();
  for (const auto& [j, b] : rho.blocks()) blocks[j.str()] = matrix_json(b);
  return {{"blocks", blocks}};
}

inline json to_json(const DensityMatrix& rho) {
  json irr = json::array();
  for (HalfInt j : rho.space().irreps()) irr.push_back(j.str());
  return {{"irreps", irr}, {"matrix", matrix_json(rho.matrix())}};
}

}  // namespace rotacov::io
