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

#include <compare>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rotacov {

/// An integer or half-integer, stored exactly as twice its value.
///
/// Used for every spin label (j, m, J, M). Arithmetic never goes through
/// floating point, so parity is always exact.
class HalfInt {
 public:
  constexpr HalfInt() = default;

  /// HalfInt::twice(3) is 3/2.
  static constexpr HalfInt twice(int twice_value) {
    HalfInt h;
    h.twice_ = twice_value;
    return h;
  }
  static constexpr HalfInt integer(int value) { return twice(2 * value); }

  constexpr int twice_value() const { return twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  constexpr double value() const { return 0.5 * twice_; }

  /// Integer value; throws if this is a proper half-integer.
  int as_int() const {
    if (!is_integer()) {
      throw std::domain_error("HalfInt " + str() + " is not an integer");
    }
    return twice_ / 2;
  }

  constexpr HalfInt operator-() const { return twice(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return twice(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return twice(twice_ - o.twice_); }
  constexpr HalfInt& operator+=(HalfInt o) {
    twice_ += o.twice_;
    return *this;
  }
  constexpr HalfInt& operator-=(HalfInt o) {
    twice_ -= o.twice_;
    return *this;
  }

  constexpr auto operator<=>(const HalfInt&) const = default;

  /// "3/2", "1", "-1/2".
  std::string str() const {
    if (is_integer()) return std::to_string(twice_ / 2);
    return std::to_string(twice_) + "/2";
  }

  /// Accepts "p/2", integers, and "-p/2".
  static HalfInt parse(std::string_view text) {
    std::string s(text);
    auto fail = [&]() -> HalfInt {
      throw std::invalid_argument("not an integer or half-integer: '" + s + "'");
    };
    if (s.empty()) return fail();
    auto slash = s.find('/');
    char* end = nullptr;
    if (slash == std::string::npos) {
      long v = std::strtol(s.c_str(), &end, 10);
      if (end != s.c_str() + s.size()) return fail();
      return integer(static_cast<int>(v));
    }
    std::string num = s.substr(0, slash);
    std::string den = s.substr(slash + 1);
    if (den != "2" || num.empty()) return fail();
    long v = std::strtol(num.c_str(), &end, 10);
    if (end != num.c_str() + num.size()) return fail();
    return twice(static_cast<int>(v));
  }

 private:
  int twice_ = 0;
};

inline HalfInt operator""_hi(unsigned long long v) {
  return HalfInt::integer(static_cast<int>(v));
}

/// j = 1/2 written as half(1).
constexpr HalfInt half(int numerator) { return HalfInt::twice(numerator); }

/// Magnetic label m is valid within irrep j: |m| <= j and matching parity.
constexpr bool valid_projection(HalfInt j, HalfInt m) {
  int tj = j.twice_value();
  int tm = m.twice_value();
  return tj >= 0 && tm <= tj && -tm <= tj && ((tj - tm) % 2 == 0);
}

/// (j1, j2, j3) can couple: triangle inequality and integer sum.
constexpr bool triangle(HalfInt j1, HalfInt j2, HalfInt j3) {
  int a = j1.twice_value(), b = j2.twice_value(), c = j3.twice_value();
  if (a < 0 || b < 0 || c < 0) return false;
  if ((a + b + c) % 2 != 0) return false;
  return c <= a + b && a <= b + c && b <= a + c;
}

}  // namespace rotacov

template <>
struct std::hash<rotacov::HalfInt> {
  std::size_t operator()(const rotacov::HalfInt& h) const noexcept {
    return std::hash<int>{}(h.twice_value());
  }
};
