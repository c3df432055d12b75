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

// Converts (|0,0> + |1,0> + 2|3/2,3/2>)/sqrt(6) towards |1/2,-1/2>: the exact
// conversion only succeeds sometimes, the approximate one always.

#include <cmath>
#include <iostream>

#include "rotacov/covariant_sdp.hpp"

int main() {
  using namespace rotacov;
  SpinKet psi;
  psi.set(0_hi, 0_hi, 1.0);
  psi.set(1_hi, 0_hi, 1.0);
  psi.set(half(3), half(3), 2.0);
  psi = psi.normalized();
  const SpinKet phi = SpinKet::basis(half(1), half(-1));

  std::cout << "deterministic: " << (deterministic_feasible(psi, phi).feasible ? "yes" : "no") << "\n";
  std::cout << "max probability: " << max_prob(psi, phi).p << "\n";
  const FidelityResult f = max_fidelity(DensityMatrix::from_ket(psi), DensityMatrix::from_ket(phi));
  std::cout << "best fidelity: " << f.fidelity << "\n";
  return 0;
}
