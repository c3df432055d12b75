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

// Phase uncertainty of |gamma>|tau> relative to shot noise, and the
// probability of preparing the squeezed probe from a lossy coherent beam.

#include <cstdio>

#include "rotacov/u1_line.hpp"

int main() {
  using namespace rotacov;
  std::printf("%8s %10s %12s\n", "gamma", "tau", "improvement");
  for (double g : {1.0, 10.0, 100.0}) {
    InterferometerSpec s;
    s.gamma = g;
    s.tau = asymptotic_optimal_tau();
    std::printf("%8.1f %10.6f %12.6f\n", g, s.tau, improvement_factor(s));
  }
  std::printf("\n%8s %8s %8s %12s\n", "gamma", "epsilon", "tau", "p_extract");
  for (double eps : {0.05, 0.1, 0.2}) {
    InterferometerSpec s;
    s.gamma = 1.0;
    s.epsilon = eps;
    s.tau = 0.2;
    const ExtractionResult r = extraction_probability(s);
    std::printf("%8.2f %8.2f %8.2f %12.6g\n", 1.0, eps, 0.2, r.p);
  }
  return 0;
}
