#ifndef EMST_DATA_HPP
#define EMST_DATA_HPP

#include <emst/error.hpp>
#include <emst/geometry.hpp>
#include <emst/mst.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>
#include <vector>

namespace emst
{

using AnyPointSet = std::variant<PointSet<2>, PointSet<3>>;

inline int dimension(AnyPointSet const &points) noexcept
{
  return points.index() == 0 ? 2 : 3;
}

inline std::size_t size(AnyPointSet const &points) noexcept
{
  return std::visit([](auto const &p) { return p.size(); }, points);
}

enum class DatasetKind
{
  Uniform,
  Normal,
  ClusteredBlobs,
};

struct DatasetSpec
{
  DatasetKind kind = DatasetKind::Uniform;
  std::size_t n = 0;
  int d = 2;
  std::uint64_t seed = 0;
  int blobs = 8;
  double blob_spread = 0.05;
};

namespace random
{

// Every generator draws from std::mt19937_64 seeded with the raw 64-bit
// seed; the engine's output sequence is fixed by the C++ standard. The
// transforms below are spelled out (rather than using <random>
// distributions, whose output is implementation-defined) so that other
// implementations can reproduce datasets exactly.
using Engine = std::mt19937_64;

/// Top 53 bits scaled into [0, 1).
inline double uniform01(Engine &engine)
{
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound) by rejection: draws below
/// (2^64 - bound) mod bound are discarded, the rest are reduced mod bound.
inline std::uint64_t uniform_below(Engine &engine, std::uint64_t bound)
{
  auto const threshold = (0 - bound) % bound;
  while (true)
  {
    auto const x = engine();
    if (x >= threshold)
      return x % bound;
  }
}

/// Box-Muller: u1 = 1 - uniform01 in (0, 1], u2 = uniform01; yields
/// r cos(2 pi u2) then r sin(2 pi u2) with r = sqrt(-2 ln u1).
class NormalSource
{
public:
  double operator()(Engine &engine)
  {
    if (_has_spare)
    {
      _has_spare = false;
      return _spare;
    }
    double const u1 = 1.0 - uniform01(engine);
    double const u2 = uniform01(engine);
    double const r = std::sqrt(-2.0 * std::log(u1));
    double const angle = 2.0 * std::numbers::pi * u2;
    _spare = r * std::sin(angle);
    _has_spare = true;
    return r * std::cos(angle);
  }

private:
  double _spare = 0;
  bool _has_spare = false;
};

} // namespace random

inline void check(DatasetSpec const &spec)
{
  if (spec.n < 1)
    throw Error(ErrorCode::InvalidParameter, "dataset needs at least one point");
  if (spec.d != 2 && spec.d != 3)
    throw Error(ErrorCode::UnsupportedDimension, "dimension must be 2 or 3");
  if (spec.kind == DatasetKind::ClusteredBlobs && (spec.blobs < 1 || !(spec.blob_spread >= 0)))
    throw Error(ErrorCode::InvalidParameter, "blobs need a positive count and non-negative spread");
}

/// Uniform: i.i.d. in [-0.5, 0.5]^d. Normal: i.i.d. standard normal per
/// axis. ClusteredBlobs: `blobs` centres uniform in [-0.5, 0.5]^d drawn
/// first, then point i sits at centre (i mod blobs) plus blob_spread times
/// a standard normal offset. Coordinates are drawn point by point, axis by
/// axis, and rounded to float.
template <int Dim>
PointSet<Dim> generate(DatasetSpec const &spec)
{
  check(spec);
  if (spec.d != Dim)
    throw Error(ErrorCode::DimensionMismatch, "dataset dimension does not match the point type");

  random::Engine engine(spec.seed);
  PointSet<Dim> points(spec.n);
  switch (spec.kind)
  {
  case DatasetKind::Uniform:
    for (auto &p : points)
      for (int k = 0; k < Dim; ++k)
        p[k] = static_cast<float>(random::uniform01(engine) - 0.5);
    break;
  case DatasetKind::Normal:
  {
    random::NormalSource normal;
    for (auto &p : points)
      for (int k = 0; k < Dim; ++k)
        p[k] = static_cast<float>(normal(engine));
    break;
  }
  case DatasetKind::ClusteredBlobs:
  {
    std::vector<std::array<double, Dim>> centers(static_cast<std::size_t>(spec.blobs));
    for (auto &c : centers)
      for (int k = 0; k < Dim; ++k)
        c[k] = random::uniform01(engine) - 0.5;
    random::NormalSource normal;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
      auto const &c = centers[i % centers.size()];
      for (int k = 0; k < Dim; ++k)
        points[i][k] = static_cast<float>(c[k] + spec.blob_spread * normal(engine));
    }
    break;
  }
  }
  return points;
}

inline AnyPointSet generate(DatasetSpec const &spec)
{
  check(spec);
  if (spec.d == 2)
    return generate<2>(spec);
  return generate<3>(spec);
}

/// Uniform sample of m points without replacement: a partial Fisher-Yates
/// shuffle of the indices, position i swapped with i + uniform_below(n - i).
template <int Dim>
PointSet<Dim> sample(std::span<Point<Dim> const> points, std::size_t m, std::uint64_t seed)
{
  auto const n = points.size();
  if (m > n)
    throw Error(ErrorCode::InvalidParameter,
                "cannot sample " + std::to_string(m) + " of " + std::to_string(n) + " points");
  random::Engine engine(seed);
  std::vector<std::size_t> index(n);
  std::iota(index.begin(), index.end(), std::size_t{0});
  PointSet<Dim> out(m);
  for (std::size_t i = 0; i < m; ++i)
  {
    auto const j = i + random::uniform_below(engine, n - i);
    std::swap(index[i], index[j]);
    out[i] = points[index[i]];
  }
  return out;
}

template <int Dim>
PointSet<Dim> sample(PointSet<Dim> const &points, std::size_t m, std::uint64_t seed)
{
  return sample(std::span<Point<Dim> const>(points), m, seed);
}

inline AnyPointSet sample(AnyPointSet const &points, std::size_t m, std::uint64_t seed)
{
  return std::visit([&](auto const &p) -> AnyPointSet { return sample(p, m, seed); }, points);
}

// ---------------------------------------------------------------------------
// File formats.
//
// CSV: one point per line, 2 or 3 comma-separated decimal numbers, no
// header. Binary (little-endian): "EMST", u32 version = 1, u32 n, u32 d,
// u32 bytes per scalar (4 or 8), then n*d scalars row-major.

enum class FileFormat
{
  Csv,
  Binary,
};

inline constexpr std::array<char, 4> binary_magic{'E', 'M', 'S', 'T'};
inline constexpr std::uint32_t binary_version = 1;

namespace detail
{

inline std::string_view trim(std::string_view s)
{
  auto const first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos)
    return {};
  auto const last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline float parse_float(std::string_view field, std::size_t line)
{
  field = trim(field);
  if (!field.empty() && field.front() == '+')
    field.remove_prefix(1);
  float value = 0;
  auto const [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || end != field.data() + field.size() || field.empty())
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "'");
  if (!std::isfinite(value))
    throw Error(ErrorCode::InvalidCoordinate,
                "line " + std::to_string(line) + ": non-finite coordinate");
  return value;
}

template <typename T>
void put_le(std::ostream &out, T value)
{
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<char const *>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream &in, char const *what)
{
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char *>(bytes.data()), sizeof(T)))
    throw Error(ErrorCode::ParseError, std::string("truncated binary file while reading ") + what);
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

template <int Dim>
PointSet<Dim> parse_rows(std::vector<std::pair<std::size_t, std::string>> const &rows)
{
  PointSet<Dim> points(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
  {
    auto const &[line, text] = rows[i];
    std::string_view rest = text;
    for (int k = 0; k < Dim; ++k)
    {
      auto const comma = rest.find(',');
      if ((k + 1 < Dim) != (comma != std::string_view::npos))
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": expected " +
                                               std::to_string(Dim) + " fields");
      points[i][k] = parse_float(rest.substr(0, comma), line);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
  }
  return points;
}

inline void append_number(std::string &out, double value)
{
  std::array<char, 32> buffer;
  auto const [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  out.append(buffer.data(), end);
}

inline void append_number(std::string &out, float value)
{
  std::array<char, 32> buffer;
  auto const [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  out.append(buffer.data(), end);
}

} // namespace detail

/// Reads CSV points. The dimension is taken from the first non-blank line;
/// blank lines are ignored.
inline AnyPointSet read_csv(std::istream &in)
{
  std::vector<std::pair<std::size_t, std::string>> rows;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line))
  {
    ++line_number;
    if (detail::trim(line).empty())
      continue;
    rows.emplace_back(line_number, std::move(line));
  }
  if (rows.empty())
    throw Error(ErrorCode::EmptyDataset, "CSV input contains no points");
  auto const fields = 1 + std::count(rows.front().second.begin(), rows.front().second.end(), ',');
  if (fields == 2)
    return detail::parse_rows<2>(rows);
  if (fields == 3)
    return detail::parse_rows<3>(rows);
  throw Error(ErrorCode::UnsupportedDimension,
              "line " + std::to_string(rows.front().first) + ": " + std::to_string(fields) +
                  " fields, only 2 or 3 supported");
}

inline AnyPointSet read_binary(std::istream &in)
{
  std::array<char, 4> magic;
  if (!in.read(magic.data(), magic.size()) || magic != binary_magic)
    throw Error(ErrorCode::ParseError, "missing EMST magic");
  auto const version = detail::get_le<std::uint32_t>(in, "version");
  if (version != binary_version)
    throw Error(ErrorCode::ParseError, "unsupported version " + std::to_string(version));
  auto const n = detail::get_le<std::uint32_t>(in, "point count");
  auto const d = detail::get_le<std::uint32_t>(in, "dimension");
  auto const precision = detail::get_le<std::uint32_t>(in, "precision");
  if (d != 2 && d != 3)
    throw Error(ErrorCode::UnsupportedDimension, "dimension " + std::to_string(d));
  if (precision != 4 && precision != 8)
    throw Error(ErrorCode::ParseError, "precision flag must be 4 or 8, got " + std::to_string(precision));

  auto read_all = [&]<int Dim>() -> AnyPointSet {
    PointSet<Dim> points(n);
    for (std::uint32_t i = 0; i < n; ++i)
      for (int k = 0; k < Dim; ++k)
      {
        float const value = precision == 4
                                ? detail::get_le<float>(in, "coordinates")
                                : static_cast<float>(detail::get_le<double>(in, "coordinates"));
        if (!std::isfinite(value))
          throw Error(ErrorCode::InvalidCoordinate, "point " + std::to_string(i));
        points[i][k] = value;
      }
    if (in.peek() != std::char_traits<char>::eof())
      throw Error(ErrorCode::ParseError, "trailing bytes after " + std::to_string(n) + " points");
    return points;
  };
  return d == 2 ? read_all.template operator()<2>() : read_all.template operator()<3>();
}

/// Binary if the stream starts with the magic, CSV otherwise.
inline AnyPointSet read_points(std::istream &in)
{
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::istringstream buffer(std::move(bytes));
  auto const &content = buffer.str();
  if (content.size() >= 4 && std::equal(binary_magic.begin(), binary_magic.end(), content.begin()))
    return read_binary(buffer);
  return read_csv(buffer);
}

inline AnyPointSet read_points(std::string const &path, FileFormat format)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open " + path);
  return format == FileFormat::Binary ? read_binary(in) : read_csv(in);
}

inline AnyPointSet read_points(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open " + path);
  return read_points(in);
}

template <int Dim>
void write_csv(std::ostream &out, std::span<Point<Dim> const> points)
{
  std::string text;
  for (auto const &p : points)
  {
    for (int k = 0; k < Dim; ++k)
    {
      if (k > 0)
        text += ',';
      detail::append_number(text, p[k]);
    }
    text += '\n';
  }
  out << text;
}

template <int Dim>
void write_binary(std::ostream &out, std::span<Point<Dim> const> points)
{
  if (points.size() > std::numeric_limits<std::uint32_t>::max())
    throw Error(ErrorCode::InvalidParameter, "too many points for the binary format");
  out.write(binary_magic.data(), binary_magic.size());
  detail::put_le<std::uint32_t>(out, binary_version);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(points.size()));
  detail::put_le<std::uint32_t>(out, Dim);
  detail::put_le<std::uint32_t>(out, 4);
  for (auto const &p : points)
    for (int k = 0; k < Dim; ++k)
      detail::put_le<float>(out, p[k]);
}

inline void write_points(std::ostream &out, AnyPointSet const &points, FileFormat format)
{
  std::visit(
      [&](auto const &p) {
        constexpr int Dim = std::decay_t<decltype(p)>::value_type::dimension;
        std::span<Point<Dim> const> view(p);
        if (format == FileFormat::Binary)
          write_binary(out, view);
        else
          write_csv(out, view);
      },
      points);
}

inline void write_points(std::string const &path, AnyPointSet const &points, FileFormat format)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
  write_points(out, points, format);
  if (!out)
    throw Error(ErrorCode::IoError, "failed writing " + path);
}

/// One "u,v,weight" line per edge, u < v, ordered by (weight, u, v). The
/// weight is printed in shortest round-trip form.
inline void write_edges(std::ostream &out, std::span<WeightedEdge const> edges)
{
  std::vector<WeightedEdge> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end());
  std::string text;
  for (auto const &edge : sorted)
  {
    text += std::to_string(edge.u);
    text += ',';
    text += std::to_string(edge.v);
    text += ',';
    detail::append_number(text, edge.weight);
    text += '\n';
  }
  out << text;
}

inline std::string edges_to_string(std::span<WeightedEdge const> edges)
{
  std::ostringstream out;
  write_edges(out, edges);
  return out.str();
}

/// Parses an edge file written by write_edges.
inline std::vector<WeightedEdge> read_edges(std::istream &in)
{
  std::vector<WeightedEdge> edges;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line))
  {
    ++line_number;
    std::string_view rest = detail::trim(line);
    if (rest.empty())
      continue;
    std::array<std::string_view, 3> fields;
    for (int k = 0; k < 3; ++k)
    {
      auto const comma = rest.find(',');
      if ((k < 2) != (comma != std::string_view::npos))
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_number) +
                                               ": expected u,v,weight");
      fields[static_cast<std::size_t>(k)] = detail::trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    std::uint32_t u = 0;
    std::uint32_t v = 0;
    double weight = 0;
    auto parse = [&](std::string_view field, auto &value) {
      auto const [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc{} || end != field.data() + field.size() || field.empty())
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_number) + ": bad field '" + std::string(field) + "'");
    };
    parse(fields[0], u);
    parse(fields[1], v);
    parse(fields[2], weight);
    if (u == v)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_number) + ": self loop");
    edges.push_back(WeightedEdge::make(u, v, weight));
  }
  return edges;
}

} // namespace emst

#endif
