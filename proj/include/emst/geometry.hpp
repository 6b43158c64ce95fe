#ifndef EMST_GEOMETRY_HPP
#define EMST_GEOMETRY_HPP

#include <emst/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace emst
{

template <int Dim>
concept SupportedDimension = (Dim == 2 || Dim == 3);

/// A point in 2D or 3D. Coordinates are stored in single precision; every
/// distance computed from them is evaluated in double precision.
template <int Dim>
  requires SupportedDimension<Dim>
struct Point
{
  std::array<float, Dim> coords{};

  static constexpr int dimension = Dim;

  constexpr float &operator[](int i) noexcept { return coords[i]; }
  constexpr float operator[](int i) const noexcept { return coords[i]; }

  friend constexpr bool operator==(Point const &, Point const &) = default;
};

template <int Dim>
using PointSet = std::vector<Point<Dim>>;

template <int Dim>
struct Aabb
{
  Point<Dim> min_corner;
  Point<Dim> max_corner;

  /// The empty box: expanding it by any point yields that point.
  static constexpr Aabb empty() noexcept
  {
    Aabb box;
    for (int i = 0; i < Dim; ++i)
    {
      box.min_corner[i] = std::numeric_limits<float>::infinity();
      box.max_corner[i] = -std::numeric_limits<float>::infinity();
    }
    return box;
  }

  static constexpr Aabb of(Point<Dim> const &p) noexcept { return {p, p}; }

  constexpr void expand(Point<Dim> const &p) noexcept
  {
    for (int i = 0; i < Dim; ++i)
    {
      min_corner[i] = std::min(min_corner[i], p[i]);
      max_corner[i] = std::max(max_corner[i], p[i]);
    }
  }

  constexpr void expand(Aabb const &other) noexcept
  {
    for (int i = 0; i < Dim; ++i)
    {
      min_corner[i] = std::min(min_corner[i], other.min_corner[i]);
      max_corner[i] = std::max(max_corner[i], other.max_corner[i]);
    }
  }

  constexpr bool contains(Point<Dim> const &p) const noexcept
  {
    for (int i = 0; i < Dim; ++i)
      if (p[i] < min_corner[i] || p[i] > max_corner[i])
        return false;
    return true;
  }

  constexpr bool contains(Aabb const &other) const noexcept
  {
    return contains(other.min_corner) && contains(other.max_corner);
  }

  friend constexpr bool operator==(Aabb const &, Aabb const &) = default;
};

/// Bit-interleaved quantized coordinates. 2D uses 31 bits per axis, 3D uses
/// 21, so at most 63 bits are populated.
struct MortonCode
{
  std::uint64_t bits = 0;

  friend constexpr auto operator<=>(MortonCode, MortonCode) = default;
};

template <int Dim>
inline constexpr int morton_bits_per_axis = (Dim == 2) ? 31 : 21;

template <int Dim>
void validate(std::span<Point<Dim> const> points)
{
  for (std::size_t i = 0; i < points.size(); ++i)
    for (int k = 0; k < Dim; ++k)
      if (!std::isfinite(points[i][k]))
        throw Error(ErrorCode::InvalidCoordinate,
                    "point " + std::to_string(i) + " has a non-finite coordinate");
}

template <int Dim>
void validate(PointSet<Dim> const &points)
{
  validate(std::span<Point<Dim> const>(points));
}

template <int Dim>
Aabb<Dim> scene_bounds(std::span<Point<Dim> const> points)
{
  if (points.empty())
    throw Error(ErrorCode::EmptyDataset, "cannot bound an empty point set");
  validate(points);
  auto box = Aabb<Dim>::empty();
  for (auto const &p : points)
    box.expand(p);
  return box;
}

template <int Dim>
Aabb<Dim> scene_bounds(PointSet<Dim> const &points)
{
  return scene_bounds(std::span<Point<Dim> const>(points));
}

template <int Dim>
double distance(Point<Dim> const &u, Point<Dim> const &v) noexcept
{
  double sum = 0;
  for (int i = 0; i < Dim; ++i)
  {
    double const delta = double(u[i]) - double(v[i]);
    sum += delta * delta;
  }
  return std::sqrt(sum);
}

/// Runtime-dimension variant for callers holding raw coordinate rows.
inline double distance(std::span<float const> u, std::span<float const> v)
{
  if (u.size() != v.size())
    throw Error(ErrorCode::DimensionMismatch,
                std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  double sum = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
  {
    double const delta = double(u[i]) - double(v[i]);
    sum += delta * delta;
  }
  return std::sqrt(sum);
}

/// Distance from `p` to the closest point of `box`; 0 when `p` is inside.
/// Each per-axis gap is no larger than the gap to any contained point, and
/// rounding is monotone, so the result never exceeds distance(p, q) for q in
/// the box.
template <int Dim>
double distance_point_box(Point<Dim> const &p, Aabb<Dim> const &box) noexcept
{
  double sum = 0;
  for (int i = 0; i < Dim; ++i)
  {
    double delta = 0;
    if (p[i] < box.min_corner[i])
      delta = double(box.min_corner[i]) - double(p[i]);
    else if (p[i] > box.max_corner[i])
      delta = double(p[i]) - double(box.max_corner[i]);
    sum += delta * delta;
  }
  return std::sqrt(sum);
}

inline double distance_point_box(std::span<float const> p, std::span<float const> box_min,
                                 std::span<float const> box_max)
{
  if (p.size() != box_min.size() || p.size() != box_max.size())
    throw Error(ErrorCode::DimensionMismatch, "point and box dimensions differ");
  double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
  {
    double delta = 0;
    if (p[i] < box_min[i])
      delta = double(box_min[i]) - double(p[i]);
    else if (p[i] > box_max[i])
      delta = double(p[i]) - double(box_max[i]);
    sum += delta * delta;
  }
  return std::sqrt(sum);
}

namespace detail
{

// Insert a zero bit after each of the low 31 bits.
constexpr std::uint64_t spread_bits_2d(std::uint64_t x) noexcept
{
  x &= 0x7fffffffull;
  x = (x | (x << 16)) & 0x0000ffff0000ffffull;
  x = (x | (x << 8)) & 0x00ff00ff00ff00ffull;
  x = (x | (x << 4)) & 0x0f0f0f0f0f0f0f0full;
  x = (x | (x << 2)) & 0x3333333333333333ull;
  x = (x | (x << 1)) & 0x5555555555555555ull;
  return x;
}

// Insert two zero bits after each of the low 21 bits.
constexpr std::uint64_t spread_bits_3d(std::uint64_t x) noexcept
{
  x &= 0x1fffffull;
  x = (x | (x << 32)) & 0x001f00000000ffffull;
  x = (x | (x << 16)) & 0x001f0000ff0000ffull;
  x = (x | (x << 8)) & 0x100f00f00f00f00full;
  x = (x | (x << 4)) & 0x10c30c30c30c30c3ull;
  x = (x | (x << 2)) & 0x1249249249249249ull;
  return x;
}

template <int Dim>
std::uint64_t quantize(float x, float lo, float hi) noexcept
{
  constexpr double cells = double(std::uint64_t{1} << morton_bits_per_axis<Dim>);
  double const extent = double(hi) - double(lo);
  if (!(extent > 0))
    return 0;
  constexpr double below_one = 1.0 - std::numeric_limits<double>::epsilon() / 2;
  double const t = std::clamp((double(x) - double(lo)) / extent, 0.0, below_one);
  return static_cast<std::uint64_t>(t * cells);
}

} // namespace detail

/// Quantizes `p` onto the per-axis grid of `bounds` and interleaves the cell
/// bits, x in the most significant lane of every group.
template <int Dim>
MortonCode morton_encode(Point<Dim> const &p, Aabb<Dim> const &bounds)
{
  for (int i = 0; i < Dim; ++i)
    if (!std::isfinite(p[i]))
      throw Error(ErrorCode::InvalidCoordinate, "cannot encode a non-finite coordinate");

  std::uint64_t code = 0;
  for (int i = 0; i < Dim; ++i)
  {
    auto const cell = detail::quantize<Dim>(p[i], bounds.min_corner[i], bounds.max_corner[i]);
    auto const spread = (Dim == 2) ? detail::spread_bits_2d(cell) : detail::spread_bits_3d(cell);
    code |= spread << (Dim - 1 - i);
  }
  return {code};
}

/// Point indices ordered by (Morton code, index).
template <int Dim>
std::vector<std::uint32_t> sort_by_morton(std::span<Point<Dim> const> points)
{
  auto const bounds = scene_bounds(points);
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    keyed[i] = {morton_encode(points[i], bounds).bits, static_cast<std::uint32_t>(i)};
  std::sort(keyed.begin(), keyed.end());

  std::vector<std::uint32_t> permutation(points.size());
  std::transform(keyed.begin(), keyed.end(), permutation.begin(),
                 [](auto const &entry) { return entry.second; });
  return permutation;
}

template <int Dim>
std::vector<std::uint32_t> sort_by_morton(PointSet<Dim> const &points)
{
  return sort_by_morton(std::span<Point<Dim> const>(points));
}

} // namespace emst

#endif
