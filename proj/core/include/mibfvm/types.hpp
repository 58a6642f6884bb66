#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace mibfvm {

/// Cartesian point or vector. Two-dimensional problems leave the z
/// component at zero.
using Point = std::array<double, 3>;

using NodeId = std::int32_t;

/// Subdomain label. Omega+ is {phi < 0} and Omega- is {phi > 0}.
enum class Side : std::uint8_t { Plus = 0, Minus = 1 };

constexpr Side opposite(Side s) noexcept { return s == Side::Plus ? Side::Minus : Side::Plus; }

constexpr int side_index(Side s) noexcept { return static_cast<int>(s); }

constexpr std::string_view to_string(Side s) noexcept { return s == Side::Plus ? "plus" : "minus"; }

constexpr std::string_view axis_name(int axis) noexcept {
  constexpr std::string_view names[] = {"x", "y", "z"};
  return names[axis];
}

inline double dot(const Point& a, const Point& b) noexcept {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Point& a) noexcept { return std::sqrt(dot(a, a)); }

inline Point operator+(const Point& a, const Point& b) noexcept {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Point operator-(const Point& a, const Point& b) noexcept {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Point operator*(double s, const Point& a) noexcept { return {s * a[0], s * a[1], s * a[2]}; }

inline Point cross(const Point& a, const Point& b) noexcept {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace mibfvm
