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

// Stars of a spin-3/2 state before and after a rotation about x.

#include <cstdio>

#include "rotacov/group_poly.hpp"
#include "rotacov/majorana.hpp"

int main() {
  using namespace rotacov;
  SpinKet k;
  k.set(half(3), half(3), 1.0);
  k.set(half(3), half(-1), cplx(0.0, 1.0));
  k = k.normalized();
  const Su2 g = Su2::from_axis_angle({0.7, 0.0, 0.0});
  auto show = [](const char* label, const Constellation& c) {
    std::printf("%s\n", label);
    for (const Star& s : c.stars) std::printf("  (%+.6f, %+.6f, %+.6f) x%d\n", s.n.x, s.n.y, s.n.z, s.multiplicity);
  };
  show("before", majorana_stars(k));
  show("after", majorana_stars(rotate_state(k, g.u, g.v)));
  return 0;
}
