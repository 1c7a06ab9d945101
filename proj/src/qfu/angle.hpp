#pragma once

#include <cmath>
#include <cstdint>

namespace qfu {

// An angle restricted to multiples of pi/4, stored as the integer multiple
// mod 8. All protocol angles (theta, phi, delta) live here; the even subset
// {0,2,4,6} is the pi/2-granularity class.
struct AngleOctant {
  int k = 0;  // angle is k*pi/4

  constexpr AngleOctant() = default;
  constexpr explicit AngleOctant(int v) : k(((v % 8) + 8) % 8) {}

  double radians() const { return k * M_PI / 4.0; }

  friend constexpr AngleOctant operator+(AngleOctant a, AngleOctant b) {
    return AngleOctant(a.k + b.k);
  }
  friend constexpr AngleOctant operator-(AngleOctant a, AngleOctant b) {
    return AngleOctant(a.k - b.k);
  }
  friend constexpr AngleOctant operator-(AngleOctant a) { return AngleOctant(-a.k); }
  friend constexpr bool operator==(AngleOctant a, AngleOctant b) { return a.k == b.k; }
  friend constexpr bool operator!=(AngleOctant a, AngleOctant b) { return a.k != b.k; }
};

}  // namespace qfu
