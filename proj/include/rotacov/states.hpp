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
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rotacov/common.hpp"
#include "rotacov/half_int.hpp"

namespace rotacov {

/// Dimension 2j+1 of irrep j.
inline int irrep_dim(HalfInt j) { return j.twice_value() + 1; }

/// Position of m inside irrep j; basis runs m = j, j-1, ..., -j.
inline int m_index(HalfInt j, HalfInt m) {
  return (j.twice_value() - m.twice_value()) / 2;
}
inline HalfInt m_at(HalfInt j, int index) { return j - HalfInt::integer(index); }

/// Multiplicity-free direct sum of irreps, ordered by increasing j.
class SpinSpace {
 public:
  SpinSpace() = default;
  explicit SpinSpace(std::vector<HalfInt> irreps) : irreps_(std::move(irreps)) {
    std::sort(irreps_.begin(), irreps_.end());
    irreps_.erase(std::unique(irreps_.begin(), irreps_.end()), irreps_.end());
    int off = 0;
    for (HalfInt j : irreps_) {
      if (j.twice_value() < 0) throw std::invalid_argument("negative spin label");
      offsets_.push_back(off);
      off += irrep_dim(j);
    }
    dim_ = off;
  }

  /// Every irrep 0, 1/2, 1, ..., jmax.
  static SpinSpace up_to(HalfInt jmax) {
    std::vector<HalfInt> js;
    for (int t = 0; t <= jmax.twice_value(); ++t) js.push_back(HalfInt::twice(t));
    return SpinSpace(std::move(js));
  }

  const std::vector<HalfInt>& irreps() const { return irreps_; }
  int dim() const { return dim_; }
  bool contains(HalfInt j) const {
    return std::binary_search(irreps_.begin(), irreps_.end(), j);
  }
  int offset(HalfInt j) const {
    auto it = std::lower_bound(irreps_.begin(), irreps_.end(), j);
    if (it == irreps_.end() || *it != j) {
      throw std::out_of_range("irrep " + j.str() + " not in space");
    }
    return offsets_[static_cast<std::size_t>(it - irreps_.begin())];
  }
  int index(HalfInt j, HalfInt m) const {
    if (!valid_projection(j, m)) {
      throw std::out_of_range("invalid (j, m) = (" + j.str() + ", " + m.str() + ")");
    }
    return offset(j) + m_index(j, m);
  }
  HalfInt jmax() const {
    if (irreps_.empty()) throw std::logic_error("empty spin space");
    return irreps_.back();
  }

  bool operator==(const SpinSpace& o) const { return irreps_ == o.irreps_; }

 private:
  std::vector<HalfInt> irreps_;
  std::vector<int> offsets_;
  int dim_ = 0;
};

/// Pure state over a multiplicity-free sum of irreps: one amplitude vector per
/// occupied irrep, components ordered m = j..-j.
class SpinKet {
 public:
  SpinKet() = default;

  /// Basis ket |j, m>.
  static SpinKet basis(HalfInt j, HalfInt m) {
    SpinKet k;
    k.set(j, m, 1.0);
    return k;
  }

  void set(HalfInt j, HalfInt m, cplx amplitude) {
    if (!valid_projection(j, m)) {
      throw std::invalid_argument("invalid (j, m) = (" + j.str() + ", " + m.str() + ")");
    }
    auto it = blocks_.find(j);
    if (it == blocks_.end()) {
      it = blocks_.emplace(j, VectorXc::Zero(irrep_dim(j))).first;
    }
    it->second(m_index(j, m)) = amplitude;
  }
  void add(HalfInt j, HalfInt m, cplx amplitude) { set(j, m, amplitude + this->amplitude(j, m)); }

  cplx amplitude(HalfInt j, HalfInt m) const {
    auto it = blocks_.find(j);
    if (it == blocks_.end() || !valid_projection(j, m)) return 0.0;
    return it->second(m_index(j, m));
  }

  void set_block(HalfInt j, VectorXc amplitudes) {
    if (amplitudes.size() != irrep_dim(j)) {
      throw std::invalid_argument("block size does not match irrep " + j.str());
    }
    blocks_[j] = std::move(amplitudes);
  }

  const std::map<HalfInt, VectorXc>& blocks() const { return blocks_; }

  /// Irreps carrying weight above `cutoff`.
  std::vector<HalfInt> occupied(double cutoff = 1e-12) const {
    std::vector<HalfInt> js;
    for (const auto& [j, v] : blocks_) {
      if (v.squaredNorm() > cutoff) js.push_back(j);
    }
    return js;
  }

  double norm() const {
    double s = 0.0;
    for (const auto& [j, v] : blocks_) s += v.squaredNorm();
    return std::sqrt(s);
  }

  SpinKet normalized() const {
    double n = norm();
    if (n == 0.0) throw std::invalid_argument("cannot normalize the zero ket");
    SpinKet k = *this;
    for (auto& [j, v] : k.blocks_) v /= n;
    return k;
  }

  SpinKet operator+(const SpinKet& o) const {
    SpinKet r = *this;
    for (const auto& [j, v] : o.blocks_) {
      auto it = r.blocks_.find(j);
      if (it == r.blocks_.end()) r.blocks_.emplace(j, v);
      else it->second += v;
    }
    return r;
  }
  SpinKet operator*(cplx s) const {
    SpinKet r = *this;
    for (auto& [j, v] : r.blocks_) v *= s;
    return r;
  }

  /// Component within irrep j (zero vector if absent).
  VectorXc block(HalfInt j) const {
    auto it = blocks_.find(j);
    if (it == blocks_.end()) return VectorXc::Zero(irrep_dim(j));
    return it->second;
  }

  SpinSpace space() const {
    std::vector<HalfInt> js;
    for (const auto& [j, v] : blocks_) js.push_back(j);
    return SpinSpace(std::move(js));
  }

  /// Dense amplitude vector in `space` (which must contain every occupied irrep).
  VectorXc to_vector(const SpinSpace& space) const {
    VectorXc out = VectorXc::Zero(space.dim());
    for (const auto& [j, v] : blocks_) {
      if (!space.contains(j)) {
        if (v.squaredNorm() > 0) throw std::invalid_argument("ket has weight outside the space");
        continue;
      }
      out.segment(space.offset(j), irrep_dim(j)) = v;
    }
    return out;
  }

  static SpinKet from_vector(const SpinSpace& space, const VectorXc& v) {
    SpinKet k;
    for (HalfInt j : space.irreps()) {
      k.blocks_[j] = v.segment(space.offset(j), irrep_dim(j));
    }
    return k;
  }

 private:
  std::map<HalfInt, VectorXc> blocks_;
};

/// Block-diagonal density operator: one Hermitian (2j+1)-square block per irrep.
/// Not necessarily normalized; trace() reports the total weight.
class BlockDensity {
 public:
  BlockDensity() = default;

  void set_block(HalfInt j, MatrixXc block) {
    if (block.rows() != irrep_dim(j) || block.cols() != irrep_dim(j)) {
      throw std::invalid_argument("block size does not match irrep " + j.str());
    }
    blocks_[j] = std::move(block);
  }
  MatrixXc block(HalfInt j) const {
    auto it = blocks_.find(j);
    if (it == blocks_.end()) return MatrixXc::Zero(irrep_dim(j), irrep_dim(j));
    return it->second;
  }
  const std::map<HalfInt, MatrixXc>& blocks() const { return blocks_; }

  /// |psi><psi| with cross-irrep coherences dropped.
  static BlockDensity from_ket(const SpinKet& ket) {
    BlockDensity rho;
    for (const auto& [j, v] : ket.blocks()) rho.blocks_[j] = v * v.adjoint();
    return rho;
  }

  double trace() const {
    double t = 0.0;
    for (const auto& [j, b] : blocks_) t += b.trace().real();
    return t;
  }

  std::vector<HalfInt> occupied(double cutoff = 1e-12) const {
    std::vector<HalfInt> js;
    for (const auto& [j, b] : blocks_) {
      if (b.trace().real() > cutoff) js.push_back(j);
    }
    return js;
  }

  /// Smallest eigenvalue over all blocks (for PSD checks).
  double min_eigenvalue() const {
    double lo = 0.0;
    bool first = true;
    for (const auto& [j, b] : blocks_) {
      MatrixXc h = 0.5 * (b + b.adjoint());
      double e = Eigen::SelfAdjointEigenSolver<MatrixXc>(h).eigenvalues().minCoeff();
      lo = first ? e : std::min(lo, e);
      first = false;
    }
    return lo;
  }

  SpinSpace space() const {
    std::vector<HalfInt> js;
    for (const auto& [j, b] : blocks_) js.push_back(j);
    return SpinSpace(std::move(js));
  }

 private:
  std::map<HalfInt, MatrixXc> blocks_;
};

/// General density operator over a multiplicity-free spin space, including
/// coherences between different irreps.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(SpinSpace space, MatrixXc matrix) : space_(std::move(space)), matrix_(std::move(matrix)) {
    if (matrix_.rows() != space_.dim() || matrix_.cols() != space_.dim()) {
      throw std::invalid_argument("density matrix size does not match its spin space");
    }
  }

  static DensityMatrix from_ket(const SpinKet& ket, const SpinSpace& space) {
    VectorXc v = ket.to_vector(space);
    return DensityMatrix(space, v * v.adjoint());
  }
  static DensityMatrix from_ket(const SpinKet& ket) { return from_ket(ket, ket.space()); }

  static DensityMatrix from_blocks(const BlockDensity& rho, const SpinSpace& space) {
    MatrixXc m = MatrixXc::Zero(space.dim(), space.dim());
    for (const auto& [j, b] : rho.blocks()) {
      if (!space.contains(j)) {
        if (b.norm() > 0) throw std::invalid_argument("density has weight outside the space");
        continue;
      }
      int o = space.offset(j);
      m.block(o, o, irrep_dim(j), irrep_dim(j)) = b;
    }
    return DensityMatrix(space, std::move(m));
  }
  static DensityMatrix from_blocks(const BlockDensity& rho) { return from_blocks(rho, rho.space()); }

  const SpinSpace& space() const { return space_; }
  const MatrixXc& matrix() const { return matrix_; }

  cplx at(HalfInt j, HalfInt m, HalfInt k, HalfInt mm) const {
    if (!space_.contains(j) || !space_.contains(k)) return 0.0;
    return matrix_(space_.index(j, m), space_.index(k, mm));
  }

  MatrixXc block(HalfInt j, HalfInt k) const {
    return matrix_.block(space_.offset(j), space_.offset(k), irrep_dim(j), irrep_dim(k));
  }

  BlockDensity diagonal_blocks() const {
    BlockDensity b;
    for (HalfInt j : space_.irreps()) b.set_block(j, block(j, j));
    return b;
  }

  double trace() const { return matrix_.trace().real(); }

  /// Same operator embedded in a larger space.
  DensityMatrix embed(const SpinSpace& larger) const {
    MatrixXc m = MatrixXc::Zero(larger.dim(), larger.dim());
    for (HalfInt j : space_.irreps()) {
      for (HalfInt k : space_.irreps()) {
        m.block(larger.offset(j), larger.offset(k), irrep_dim(j), irrep_dim(k)) = block(j, k);
      }
    }
    return DensityMatrix(larger, std::move(m));
  }

  std::vector<HalfInt> occupied(double cutoff = 1e-12) const {
    std::vector<HalfInt> js;
    for (HalfInt j : space_.irreps()) {
      if (block(j, j).trace().real() > cutoff) js.push_back(j);
    }
    return js;
  }

 private:
  SpinSpace space_;
  MatrixXc matrix_;
};

}  // namespace rotacov
