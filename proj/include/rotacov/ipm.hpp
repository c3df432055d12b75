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
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "rotacov/common.hpp"
#include "rotacov/sdp.hpp"

namespace rotacov {

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalTrouble };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::NumericalTrouble: return "numerical-trouble";
  }
  return "unknown";
}

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
  double step_fraction = 0.95;

  /// Default options with ROTACOV_SOLVER_TOL applied when set.
  static SolverOptions from_env() {
    SolverOptions o;
    if (const char* s = std::getenv("ROTACOV_SOLVER_TOL")) {
      char* end = nullptr;
      double v = std::strtod(s, &end);
      if (end != s && *end == '\0' && v > 0 && v < 1) o.tol = v;
      else throw std::invalid_argument(std::string("ROTACOV_SOLVER_TOL: not a tolerance in (0, 1): '") + s + "'");
    }
    return o;
  }
};

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalTrouble;
  double objective = 0.0;        // max-form value, including the constant
  std::vector<MatrixXd> X;       // real blocks
  VectorXd y;                    // dual multipliers (rows removed in presolve get 0)
  double primal_residual = 0.0;  // relative
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

/// Backend contract: takes a real standard-form problem, returns a report.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual SolveReport solve(const StandardForm& sf) const = 0;
};

/// Primal-dual interior point method on the homogeneous self-dual embedding,
/// HKM search direction with Mehrotra predictor-corrector.
class HsdIpm : public SdpBackend {
 public:
  explicit HsdIpm(SolverOptions opt = SolverOptions::from_env()) : opt_(opt) {}

  SolveReport solve(const StandardForm& sf) const override;

 private:
  SolverOptions opt_;
};

namespace ipm_detail {

using Blocks = std::vector<MatrixXd>;

inline double frob(const Blocks& X, const Blocks& Y) {
  double s = 0.0;
  for (std::size_t b = 0; b < X.size(); ++b) s += X[b].cwiseProduct(Y[b]).sum();
  return s;
}
inline double norm(const Blocks& X) { return std::sqrt(frob(X, X)); }

inline Blocks zeros(const std::vector<int>& dims) {
  Blocks out;
  for (int d : dims) out.push_back(MatrixXd::Zero(d, d));
  return out;
}
inline Blocks identity(const std::vector<int>& dims) {
  Blocks out;
  for (int d : dims) out.push_back(MatrixXd::Identity(d, d));
  return out;
}

/// <A, M> for symmetric A stored as upper-triangle entries; M need not be symmetric.
inline double apply_row(const SymMatrix& A, const Blocks& M) {
  double s = 0.0;
  for (const SymEntry& e : A) {
    const MatrixXd& m = M[e.block];
    s += e.row == e.col ? e.val * m(e.row, e.row) : e.val * (m(e.row, e.col) + m(e.col, e.row));
  }
  return s;
}

inline void add_scaled(Blocks& out, const SymMatrix& A, double w) {
  for (const SymEntry& e : A) {
    out[e.block](e.row, e.col) += w * e.val;
    if (e.row != e.col) out[e.block](e.col, e.row) += w * e.val;
  }
}

inline Blocks dense(const SymMatrix& A, const std::vector<int>& dims) {
  Blocks out = zeros(dims);
  add_scaled(out, A, 1.0);
  return out;
}

inline double row_norm(const SymMatrix& A) {
  double s = 0.0;
  for (const SymEntry& e : A) s += (e.row == e.col ? 1.0 : 2.0) * e.val * e.val;
  return std::sqrt(s);
}

/// Largest step a with X + a dX >= 0 (infinity if unbounded); -1 if X is not
/// numerically positive definite.
inline double max_step(const MatrixXd& X, const MatrixXd& dX) {
  Eigen::LLT<MatrixXd> llt(X);
  MatrixXd S;
  if (llt.info() == Eigen::Success) {
    MatrixXd L = llt.matrixL();
    S = L.triangularView<Eigen::Lower>().solve(dX);
    S = L.triangularView<Eigen::Lower>().solve(S.transpose()).transpose();
  } else {
    // Near-singular but positive X: whiten with the eigendecomposition instead.
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(X);
    if (es.eigenvalues().minCoeff() <= 0.0) return -1.0;
    const VectorXd w = es.eigenvalues().cwiseSqrt().cwiseInverse();
    S = w.asDiagonal() * (es.eigenvectors().transpose() * dX * es.eigenvectors()) * w.asDiagonal();
  }
  S = 0.5 * (S + S.transpose()).eval();
  double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(S, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  return lmin >= 0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

/// Chooses a maximal set of linearly independent rows and flags inconsistency.
struct Presolve {
  std::vector<int> keep;
  bool consistent = true;
};

inline Presolve presolve(const StandardForm& sf, const std::vector<double>& scale) {
  Presolve out;
  const int m = sf.num_rows();
  if (m == 0) return out;
  std::vector<int> offset;
  int nvec = 0;
  for (int d : sf.block_dims) {
    offset.push_back(nvec);
    nvec += d * (d + 1) / 2;
  }
  auto pos = [&](const SymEntry& e) {
    // Packed upper triangle, column by column.
    return offset[e.block] + e.col * (e.col + 1) / 2 + e.row;
  };
  MatrixXd At = MatrixXd::Zero(nvec, m);
  for (int i = 0; i < m; ++i)
    for (const SymEntry& e : sf.A[i]) At(pos(e), i) += (e.row == e.col ? 1.0 : std::sqrt(2.0)) * e.val * scale[i];
  Eigen::ColPivHouseholderQR<MatrixXd> qr(At);
  qr.setThreshold(1e-10);
  qr.compute(At);
  const int r = static_cast<int>(qr.rank());
  std::vector<int> piv(m);
  for (int i = 0; i < m; ++i) piv[i] = qr.colsPermutation().indices()(i);
  out.keep.assign(piv.begin(), piv.begin() + r);
  std::sort(out.keep.begin(), out.keep.end());
  if (r < m) {
    MatrixXd Ak(nvec, r);
    VectorXd bk(r);
    for (int k = 0; k < r; ++k) {
      Ak.col(k) = At.col(out.keep[k]);
      bk(k) = sf.b(out.keep[k]) * scale[out.keep[k]];
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qk(Ak);
    for (int k = r; k < m; ++k) {
      const int i = piv[k];
      VectorXd coef = qk.solve(At.col(i));
      double predicted = coef.dot(bk);
      double actual = sf.b(i) * scale[i];
      if (std::abs(predicted - actual) > 1e-7 * (1.0 + std::abs(actual) + bk.cwiseAbs().maxCoeff())) {
        out.consistent = false;
      }
    }
  }
  return out;
}

}  // namespace ipm_detail

inline SolveReport HsdIpm::solve(const StandardForm& sf) const {
  using namespace ipm_detail;
  SolveReport rep;
  const std::vector<int>& dims = sf.block_dims;
  const int m_all = sf.num_rows();
  for (const SymMatrix& A : sf.A)
    for (const SymEntry& e : A)
      if (e.block < 0 || e.block >= static_cast<int>(dims.size()) || e.row > e.col || e.col >= dims[e.block])
        throw std::invalid_argument("StandardForm: entry outside its block");

  // Row scaling, then presolve on the scaled rows.
  std::vector<double> rscale(m_all, 1.0);
  for (int i = 0; i < m_all; ++i) {
    double n = row_norm(sf.A[i]);
    if (n > 0) rscale[i] = 1.0 / n;
  }
  for (int i = 0; i < m_all; ++i) {
    if (sf.A[i].empty() && std::abs(sf.b(i)) > 1e-12) {
      rep.status = SolveStatus::Infeasible;
      rep.message = "constraint row " + std::to_string(i) + " reads 0 = nonzero";
      return rep;
    }
  }
  Presolve pre = presolve(sf, rscale);
  if (!pre.consistent) {
    rep.status = SolveStatus::Infeasible;
    rep.message = "inconsistent equality constraints";
    return rep;
  }
  const int m = static_cast<int>(pre.keep.size());
  std::vector<SymMatrix> A(m);
  VectorXd b(m);
  for (int k = 0; k < m; ++k) {
    const int i = pre.keep[k];
    A[k] = sf.A[i];
    for (SymEntry& e : A[k]) e.val *= rscale[i];
    b(k) = sf.b(i) * rscale[i];
  }
  Blocks C = dense(sf.C, dims);
  const double bscale = std::max(1.0, b.norm());
  const double cscale = std::max(1.0, norm(C));
  b /= bscale;
  // Minimization form with cost -C.
  for (MatrixXd& c : C) c *= -1.0 / cscale;

  int N = 0;
  for (int d : dims) N += d;

  // Rows touching each block, with their local index sets for the Schur complement.
  struct Local {
    int row;
    std::vector<int> idx;
    MatrixXd S;
    std::vector<SymEntry> es;
  };
  std::vector<std::vector<Local>> local(dims.size());
  for (int k = 0; k < m; ++k) {
    std::map<int, std::vector<const SymEntry*>> per;
    for (const SymEntry& e : A[k]) per[e.block].push_back(&e);
    for (auto& [blk, es] : per) {
      Local l;
      l.row = k;
      for (const SymEntry* e : es) l.es.push_back(*e);
      for (const SymEntry* e : es) {
        l.idx.push_back(e->row);
        l.idx.push_back(e->col);
      }
      std::sort(l.idx.begin(), l.idx.end());
      l.idx.erase(std::unique(l.idx.begin(), l.idx.end()), l.idx.end());
      const int s = static_cast<int>(l.idx.size());
      l.S = MatrixXd::Zero(s, s);
      auto where = [&](int v) { return static_cast<int>(std::lower_bound(l.idx.begin(), l.idx.end(), v) - l.idx.begin()); };
      for (const SymEntry* e : es) {
        int p = where(e->row), q = where(e->col);
        l.S(p, q) += e->val;
        if (p != q) l.S(q, p) += e->val;
      }
      local[blk].push_back(std::move(l));
    }
  }

  auto Aop = [&](const Blocks& M) {
    VectorXd out(m);
    for (int k = 0; k < m; ++k) out(k) = apply_row(A[k], M);
    return out;
  };
  auto Aadj = [&](const VectorXd& y) {
    Blocks out = zeros(dims);
    for (int k = 0; k < m; ++k)
      if (y(k) != 0.0) add_scaled(out, A[k], y(k));
    return out;
  };

  Blocks X = identity(dims), Z = identity(dims);
  VectorXd y = VectorXd::Zero(m);
  double tau = 1.0, kappa = 1.0;
  const double normb = b.norm(), normc = norm(C);

  SolveStatus status = SolveStatus::NumericalTrouble;
  std::string message = "iteration limit reached";
  double pres = 0, dres = 0, gap = 0;
  int iter = 0;
  for (; iter < opt_.max_iter; ++iter) {
    const double mu = (frob(X, Z) + tau * kappa) / (N + 1);
    VectorXd Rp = Aop(X) - b * tau;
    Blocks Rd = Aadj(y);
    for (std::size_t q = 0; q < dims.size(); ++q) Rd[q] += Z[q] - C[q] * tau;
    const double cx = frob(C, X), by = b.dot(y);
    const double Rg = cx - by + kappa;

    pres = Rp.norm() / tau / (1.0 + normb);
    dres = norm(Rd) / tau / (1.0 + normc);
    gap = std::abs(cx - by) / tau / (1.0 + std::abs(cx / tau) + std::abs(by / tau));
    if (pres <= opt_.tol && dres <= opt_.tol && gap <= opt_.tol) {
      status = SolveStatus::Optimal;
      message = "converged";
      break;
    }
    if (by > 0) {
      Blocks ray = Aadj(y);
      for (std::size_t q = 0; q < dims.size(); ++q) ray[q] += Z[q];
      if (norm(ray) / by <= opt_.tol) {
        status = SolveStatus::Infeasible;
        message = "primal infeasibility certificate";
        break;
      }
    }
    if (cx < 0) {
      if (Aop(X).norm() / (-cx) <= opt_.tol) {
        status = SolveStatus::Unbounded;
        message = "dual infeasibility certificate";
        break;
      }
    }

    // Schur complement M_kl = <A_k, X A_l Z^-1>.
    Blocks Zinv(dims.size());
    bool ok = true;
    for (std::size_t q = 0; q < dims.size(); ++q) {
      Eigen::LLT<MatrixXd> llt(Z[q]);
      if (llt.info() != Eigen::Success) {
        ok = false;
        break;
      }
      Zinv[q] = llt.solve(MatrixXd::Identity(dims[q], dims[q]));
      Zinv[q] = 0.5 * (Zinv[q] + Zinv[q].transpose()).eval();
    }
    if (!ok) {
      message = "lost positive definiteness of the dual slack";
      break;
    }
    MatrixXd M = MatrixXd::Zero(m, m);
    for (std::size_t q = 0; q < dims.size(); ++q) {
      const MatrixXd& Xq = X[q];
      const MatrixXd& Wq = Zinv[q];
      for (const Local& lj : local[q]) {
        const int s = static_cast<int>(lj.idx.size());
        MatrixXd Xc(dims[q], s), Wr(s, dims[q]);
        for (int t = 0; t < s; ++t) {
          Xc.col(t) = Xq.col(lj.idx[t]);
          Wr.row(t) = Wq.row(lj.idx[t]);
        }
        MatrixXd T = Xc * lj.S * Wr;
        for (const Local& li : local[q]) {
          double v = 0.0;
          for (const SymEntry& e : li.es) {
            v += e.row == e.col ? e.val * T(e.row, e.row) : e.val * (T(e.row, e.col) + T(e.col, e.row));
          }
          M(li.row, lj.row) += v;
        }
      }
    }
    M = 0.5 * (M + M.transpose()).eval();
    Eigen::LLT<MatrixXd> Mllt(M);
    Eigen::LDLT<MatrixXd> Mldlt;
    bool use_ldlt = Mllt.info() != Eigen::Success;
    if (use_ldlt) {
      double reg = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
      Mldlt.compute(M + reg * MatrixXd::Identity(m, m));
    }
    auto Msolve = [&](const VectorXd& r) -> VectorXd {
      if (use_ldlt) return Mldlt.solve(r);
      return Mllt.solve(r);
    };

    Blocks XCW(dims.size());
    for (std::size_t q = 0; q < dims.size(); ++q) XCW[q] = X[q] * C[q] * Zinv[q];
    const VectorXd a = Aop(XCW);
    const double cxcw = frob(C, XCW);
    const VectorXd v = Msolve(a + b);

    struct Dir {
      Blocks dX, dZ;
      VectorXd dy;
      double dtau = 0, dkappa = 0;
    };
    auto direction = [&](double eta, const Blocks& Rc, double rtau) {
      Blocks RdZ(dims.size());
      Blocks tmp = Rc;
      for (std::size_t q = 0; q < dims.size(); ++q) {
        RdZ[q] = X[q] * (eta * Rd[q]) * Zinv[q];
        tmp[q] += RdZ[q];
      }
      VectorXd h = -eta * Rp - Aop(tmp);
      VectorXd u = Msolve(h);
      const double coef = (a - b).dot(v) - cxcw - kappa / tau;
      const double rhs = -eta * Rg - frob(C, tmp) - (a - b).dot(u) - rtau / tau;
      Dir d;
      d.dtau = rhs / coef;
      d.dy = u + v * d.dtau;
      Blocks Ady = Aadj(d.dy);
      d.dZ.resize(dims.size());
      d.dX.resize(dims.size());
      for (std::size_t q = 0; q < dims.size(); ++q) {
        d.dZ[q] = -eta * Rd[q] - Ady[q] + C[q] * d.dtau;
        MatrixXd G = X[q] * (eta * Rd[q] + Ady[q] - C[q] * d.dtau) * Zinv[q];
        d.dX[q] = Rc[q] + 0.5 * (G + G.transpose());
      }
      d.dkappa = (rtau - kappa * d.dtau) / tau;
      return d;
    };
    auto step_to_boundary = [&](const Dir& d) {
      double amax = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < dims.size(); ++q) {
        double ax = max_step(X[q], d.dX[q]);
        double az = max_step(Z[q], d.dZ[q]);
        if (ax < 0 || az < 0) return -1.0;
        amax = std::min({amax, ax, az});
      }
      if (d.dtau < 0) amax = std::min(amax, -tau / d.dtau);
      if (d.dkappa < 0) amax = std::min(amax, -kappa / d.dkappa);
      return amax;
    };

    // Predictor.
    Blocks Rc(dims.size());
    for (std::size_t q = 0; q < dims.size(); ++q) Rc[q] = -X[q];
    Dir pred = direction(1.0, Rc, -tau * kappa);
    double ap = step_to_boundary(pred);
    if (ap < 0) {
      message = "factorization failure in step length";
      break;
    }
    ap = std::min(1.0, ap);
    double mu_a = 0.0;
    for (std::size_t q = 0; q < dims.size(); ++q)
      mu_a += (X[q] + ap * pred.dX[q]).cwiseProduct(Z[q] + ap * pred.dZ[q]).sum();
    mu_a = (mu_a + (tau + ap * pred.dtau) * (kappa + ap * pred.dkappa)) / (N + 1);
    double sigma = std::pow(std::clamp(mu_a / mu, 0.0, 1.0), 3);

    // Corrector.
    for (std::size_t q = 0; q < dims.size(); ++q) {
      MatrixXd G = pred.dX[q] * pred.dZ[q] * Zinv[q];
      Rc[q] = sigma * mu * Zinv[q] - X[q] - 0.5 * (G + G.transpose());
    }
    Dir d = direction(1.0 - sigma, Rc, sigma * mu - tau * kappa - pred.dtau * pred.dkappa);
    double amax = step_to_boundary(d);
    if (amax < 0) {
      message = "factorization failure in step length";
      break;
    }
    double alpha = std::min(1.0, opt_.step_fraction * amax);
    if (!std::isfinite(alpha) || alpha < 1e-12) {
      message = "step length collapsed";
      break;
    }
    for (std::size_t q = 0; q < dims.size(); ++q) {
      X[q] += alpha * d.dX[q];
      Z[q] += alpha * d.dZ[q];
      X[q] = 0.5 * (X[q] + X[q].transpose()).eval();
      Z[q] = 0.5 * (Z[q] + Z[q].transpose()).eval();
    }
    y += alpha * d.dy;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
    if (!std::isfinite(tau) || !std::isfinite(kappa) || !y.allFinite()) {
      message = "non-finite iterate";
      break;
    }
  }

  rep.status = status;
  rep.message = message;
  rep.iterations = iter;
  rep.primal_residual = pres;
  rep.dual_residual = dres;
  rep.gap = gap;
  rep.y = VectorXd::Zero(m_all);
  if (status == SolveStatus::Infeasible || status == SolveStatus::Unbounded) return rep;
  rep.X.resize(dims.size());
  for (std::size_t q = 0; q < dims.size(); ++q) rep.X[q] = X[q] * (bscale / tau);
  for (int k = 0; k < m; ++k) rep.y(pre.keep[k]) = -y(k) / tau * cscale * rscale[pre.keep[k]];
  rep.objective = StandardForm::inner(sf.C, rep.X) + sf.objective_constant;
  return rep;
}

/// Solves an SdpProblem through the real embedding and maps the blocks back.
struct HermitianSolution {
  SolveReport report;
  std::vector<MatrixXc> blocks;
};

inline HermitianSolution solve_problem(const SdpProblem& p, const SdpBackend& backend) {
  Embedding emb(p);
  HermitianSolution s;
  s.report = backend.solve(emb.to_standard());
  if (!s.report.X.empty()) s.blocks = emb.recover(s.report.X);
  return s;
}

inline HermitianSolution solve_problem(const SdpProblem& p, SolverOptions opt = SolverOptions::from_env()) {
  return solve_problem(p, HsdIpm(opt));
}

}  // namespace rotacov
