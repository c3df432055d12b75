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

#include <complex>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace rotacov {

using cplx = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Default absolute tolerance for floating comparisons.
inline constexpr double kTol = 1e-9;

inline constexpr double kPi = 3.14159265358979323846;

/// Exact binomial coefficient for n <= 62.
inline std::uint64_t binomial_exact(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (n > 62) throw std::overflow_error("binomial_exact: n too large");
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays integral at every step.
    r = r / i * (n - k + i) + r % i * (n - k + i) / i;
  }
  return r;
}

inline double binomial(int n, int k) {
  return static_cast<double>(binomial_exact(n, k));
}

/// Integer power of a complex number, exponent >= 0.
inline cplx ipow(cplx z, int e) {
  cplx r = 1.0;
  for (int i = 0; i < e; ++i) r *= z;
  return r;
}

}  // namespace rotacov
