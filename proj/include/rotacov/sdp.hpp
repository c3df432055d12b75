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

#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rotacov/common.hpp"

namespace rotacov {

/// Coefficient on entry (row, col) of one variable block.
struct SdpTerm {
  int block = 0;
  int row = 0;
  int col = 0;
  cplx coeff = 0.0;
};
using LinExpr = std::vector<SdpTerm>;

/// Conic program over Hermitian (or real symmetric) PSD blocks H_b:
///   maximize Re(objective(H)) + objective_constant
///   s.t.     Re(row_i(H)) = rhs_i,  H_b >= 0.
/// A linear expression sum c * H_b[r, c] reads entries directly, so both
/// (r, c) and (c, r) may appear.
class SdpProblem {
 public:
  struct Block {
    std::string name;
    int dim = 0;
    bool complex = true;
  };
  struct Row {
    LinExpr expr;
    double rhs = 0.0;
  };

  int add_block(std::string name, int dim, bool complex = true) {
    if (dim <= 0) throw std::invalid_argument("SdpProblem: block dimension must be positive");
    blocks_.push_back({std::move(name), dim, complex});
    return static_cast<int>(blocks_.size()) - 1;
  }

  /// Re(expr) = rhs.
  void add_constraint(LinExpr expr, double rhs) {
    check(expr);
    rows_.push_back({std::move(expr), rhs});
  }

  /// expr = rhs as two real rows: Re(expr) = Re(rhs) and Re(-i expr) = Im(rhs).
  void add_complex_constraint(const LinExpr& expr, cplx rhs) {
    add_constraint(expr, rhs.real());
    LinExpr im = expr;
    for (SdpTerm& t : im) t.coeff *= cplx(0, -1);
    add_constraint(std::move(im), rhs.imag());
  }

  void set_objective(LinExpr expr, double constant = 0.0) {
    check(expr);
    objective_ = std::move(expr);
    objective_constant_ = constant;
  }

  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Row>& rows() const { return rows_; }
  const LinExpr& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }

  /// Value of a linear expression at given block values.
  static cplx eval(const LinExpr& e, const std::vector<MatrixXc>& H) {
    cplx s = 0.0;
    for (const SdpTerm& t : e) s += t.coeff * H[t.block](t.row, t.col);
    return s;
  }

 private:
  void check(const LinExpr& e) const {
    for (const SdpTerm& t : e) {
      if (t.block < 0 || t.block >= static_cast<int>(blocks_.size())) {
        throw std::invalid_argument("SdpProblem: term refers to an unknown block");
      }
      const int d = blocks_[t.block].dim;
      if (t.row < 0 || t.col < 0 || t.row >= d || t.col >= d) {
        throw std::invalid_argument("SdpProblem: term index outside block '" + blocks_[t.block].name + "'");
      }
    }
  }

  std::vector<Block> blocks_;
  std::vector<Row> rows_;
  LinExpr objective_;
  double objective_constant_ = 0.0;
};

/// Upper-triangle entry of a symmetric coefficient matrix; off-diagonal
/// entries stand for both (r, c) and (c, r).
struct SymEntry {
  int block = 0;
  int row = 0;  // row <= col
  int col = 0;
  double val = 0.0;
};
using SymMatrix = std::vector<SymEntry>;

/// Real standard form: maximize <C, X> s.t. <A_i, X> = b_i, X >= 0 (block diagonal).
struct StandardForm {
  std::vector<int> block_dims;
  std::vector<SymMatrix> A;
  VectorXd b;
  SymMatrix C;
  double objective_constant = 0.0;

  int num_rows() const { return static_cast<int>(A.size()); }

  static double inner(const SymMatrix& M, const std::vector<MatrixXd>& X) {
    double s = 0.0;
    for (const SymEntry& e : M) s += (e.row == e.col ? 1.0 : 2.0) * e.val * X[e.block](e.row, e.col);
    return s;
  }
};

namespace detail {

/// Accumulates real coefficients w_pq on Y_pq and folds them into upper-triangle form.
class SymAccumulator {
 public:
  void add(int block, int p, int q, double w) {
    if (w == 0.0) return;
    if (p > q) std::swap(p, q);
    // <A, Y> = sum_{p<q} 2 A_pq Y_pq + sum_p A_pp Y_pp, so halve off-diagonals.
    acc_[{block, p, q}] += (p == q) ? w : 0.5 * w;
  }
  SymMatrix take(double cutoff = 0.0) const {
    SymMatrix out;
    for (const auto& [k, v] : acc_) {
      if (std::abs(v) > cutoff) out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), v});
    }
    return out;
  }

 private:
  std::map<std::tuple<int, int, int>, double> acc_;
};

}  // namespace detail

/// Complex Hermitian n x n blocks become real 2n x 2n blocks Y with
/// H = ((Y11 + Y22) + i (Y21 - Y12)) / 2. Any Y >= 0 maps to H >= 0 and
/// H >= 0 is reached by Y = [[Re H, -Im H], [Im H, Re H]], so optima agree
/// without extra structure constraints.
class Embedding {
 public:
  explicit Embedding(const SdpProblem& p) : problem_(&p) {
    for (const auto& b : p.blocks()) dims_.push_back(b.complex ? 2 * b.dim : b.dim);
  }

  void add_term(detail::SymAccumulator& acc, const SdpTerm& t) const {
    const auto& blk = problem_->blocks()[t.block];
    if (!blk.complex) {
      acc.add(t.block, t.row, t.col, t.coeff.real());
      return;
    }
    const int n = blk.dim, r = t.row, c = t.col;
    const double re = t.coeff.real(), im = t.coeff.imag();
    acc.add(t.block, r, c, 0.5 * re);
    acc.add(t.block, n + r, n + c, 0.5 * re);
    acc.add(t.block, n + r, c, -0.5 * im);
    acc.add(t.block, r, n + c, 0.5 * im);
  }

  StandardForm to_standard() const {
    StandardForm sf;
    sf.block_dims = dims_;
    const auto& rows = problem_->rows();
    sf.b.resize(static_cast<int>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail::SymAccumulator acc;
      for (const SdpTerm& t : rows[i].expr) add_term(acc, t);
      sf.A.push_back(acc.take(1e-15));
      sf.b(static_cast<int>(i)) = rows[i].rhs;
    }
    detail::SymAccumulator acc;
    for (const SdpTerm& t : problem_->objective()) add_term(acc, t);
    sf.C = acc.take(1e-15);
    sf.objective_constant = problem_->objective_constant();
    return sf;
  }

  std::vector<MatrixXc> recover(const std::vector<MatrixXd>& Y) const {
    std::vector<MatrixXc> H;
    const auto& blocks = problem_->blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const int n = blocks[b].dim;
      if (!blocks[b].complex) {
        H.push_back(Y[b].cast<cplx>());
        continue;
      }
      const MatrixXd& y = Y[b];
      MatrixXc h(n, n);
      h.real() = 0.5 * (y.topLeftCorner(n, n) + y.bottomRightCorner(n, n));
      h.imag() = 0.5 * (y.bottomLeftCorner(n, n) - y.topRightCorner(n, n));
      H.push_back(h);
    }
    return H;
  }

  /// Inverse direction, used to lift a known Hermitian point.
  std::vector<MatrixXd> lift(const std::vector<MatrixXc>& H) const {
    std::vector<MatrixXd> Y;
    const auto& blocks = problem_->blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (!blocks[b].complex) {
        Y.push_back(H[b].real());
        continue;
      }
      const int n = blocks[b].dim;
      MatrixXd y(2 * n, 2 * n);
      y << H[b].real(), -H[b].imag(), H[b].imag(), H[b].real();
      Y.push_back(y);
    }
    return Y;
  }

 private:
  const SdpProblem* problem_;
  std::vector<int> dims_;
};

inline StandardForm to_standard(const SdpProblem& p) { return Embedding(p).to_standard(); }

/// Sparse SDPA text. The max-form problem here is the SDPA dual with
/// F0 = C, F_i = A_i and c = b.
inline void write_sdpa(std::ostream& os, const StandardForm& sf) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "\"rotacov export: maximize <C,X> s.t. <A_i,X> = b_i\n";
  os << sf.num_rows() << "\n";
  os << sf.block_dims.size() << "\n";
  for (std::size_t i = 0; i < sf.block_dims.size(); ++i) os << (i ? " " : "") << sf.block_dims[i];
  os << "\n";
  for (int i = 0; i < sf.num_rows(); ++i) os << (i ? " " : "") << num(sf.b(i));
  os << "\n";
  auto emit = [&](int matno, const SymMatrix& M) {
    for (const SymEntry& e : M) {
      os << matno << " " << e.block + 1 << " " << e.row + 1 << " " << e.col + 1 << " " << num(e.val) << "\n";
    }
  };
  emit(0, sf.C);
  for (int i = 0; i < sf.num_rows(); ++i) emit(i + 1, sf.A[i]);
}

}  // namespace rotacov
