#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>

namespace plgrim {

struct CellIndex {
  int x = 0;
  int y = 0;
  auto operator<=>(const CellIndex&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellIndex& c) const noexcept {
    std::uint64_t v = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) << 32) |
                      static_cast<std::uint32_t>(c.y);
    v *= 0x9E3779B97F4A7C15ull;
    v ^= v >> 29;
    return static_cast<std::size_t>(v);
  }
};

// Compass headings; y grows downward (row order of the environment file),
// so North is (0,-1).
enum class Heading : std::uint8_t {
  North = 0,
  NorthEast,
  East,
  SouthEast,
  South,
  SouthWest,
  West,
  NorthWest,
};

enum class PrimitiveMove : std::uint8_t {
  North = 0,
  NorthEast,
  East,
  SouthEast,
  South,
  SouthWest,
  West,
  NorthWest,
  Wait,
};

inline constexpr int kNumHeadings = 8;
inline constexpr int kNumMoves = 9;

inline constexpr std::array<int, 8> kHeadingDx = {0, 1, 1, 1, 0, -1, -1, -1};
inline constexpr std::array<int, 8> kHeadingDy = {-1, -1, 0, 1, 1, 1, 0, -1};

inline constexpr const char* heading_name(Heading h) {
  constexpr const char* names[] = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};
  return names[static_cast<int>(h)];
}

inline CellIndex offset_of(Heading h) {
  const int i = static_cast<int>(h);
  return {kHeadingDx[i], kHeadingDy[i]};
}

inline bool is_motion(PrimitiveMove m) { return m != PrimitiveMove::Wait; }

inline Heading heading_of(PrimitiveMove m) {
  return static_cast<Heading>(static_cast<int>(m));
}

inline PrimitiveMove move_of(Heading h) {
  return static_cast<PrimitiveMove>(static_cast<int>(h));
}

inline CellIndex offset_of(PrimitiveMove m) {
  return is_motion(m) ? offset_of(heading_of(m)) : CellIndex{0, 0};
}

// 45-degree increments between two headings, in [0, 4].
inline int heading_delta_steps(Heading a, Heading b) {
  int d = std::abs(static_cast<int>(a) - static_cast<int>(b));
  return d > 4 ? 8 - d : d;
}

// Normalized heading change in [0, 1]: 0 = straight, 1 = reversal.
inline double heading_change(Heading a, Heading b) {
  return heading_delta_steps(a, b) / 4.0;
}

inline bool diagonal(Heading h) { return static_cast<int>(h) % 2 == 1; }

struct RobotPose {
  double x_m = 0.0;
  double y_m = 0.0;
  Heading heading = Heading::East;
};

inline CellIndex cell_of(const RobotPose& p, double resolution) {
  return {static_cast<int>(std::floor(p.x_m / resolution)),
          static_cast<int>(std::floor(p.y_m / resolution))};
}

inline double cell_center_x(int x, double resolution) { return (x + 0.5) * resolution; }
inline double cell_center_y(int y, double resolution) { return (y + 0.5) * resolution; }

inline RobotPose pose_at_cell(CellIndex c, double resolution, Heading h = Heading::East) {
  return {cell_center_x(c.x, resolution), cell_center_y(c.y, resolution), h};
}

inline double euclidean_m(CellIndex a, CellIndex b, double resolution) {
  const double dx = (a.x - b.x) * resolution;
  const double dy = (a.y - b.y) * resolution;
  return std::sqrt(dx * dx + dy * dy);
}

inline int chebyshev(CellIndex a, CellIndex b) {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

// Length of one primitive step along heading h.
inline double step_length_m(Heading h, double resolution) {
  return diagonal(h) ? resolution * std::numbers::sqrt2 : resolution;
}

}  // namespace plgrim
