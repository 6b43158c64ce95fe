#ifndef EMST_ORACLE_HPP
#define EMST_ORACLE_HPP

// Brute-force references. Nothing here touches the tree or the Borůvka
// machinery; only point distances and the edge total order are shared.

#include <emst/error.hpp>
#include <emst/geometry.hpp>
#include <emst/metric.hpp>
#include <emst/mst.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace emst::oracle
{

inline constexpr std::size_t default_cap = 5000;

namespace detail
{

inline void check_cap(std::size_t n, std::size_t cap)
{
  if (n > cap)
    throw Error(ErrorCode::OracleCapExceeded,
                std::to_string(n) + " points exceed the oracle cap of " + std::to_string(cap));
}

inline std::vector<double> const *core_values(Metric const &metric, std::size_t n)
{
  auto const *core = metric.core_distances();
  if (core && core->values.size() != n)
    throw Error(ErrorCode::InvalidParameter, "core distances do not match the point set");
  return core ? &core->values : nullptr;
}

template <int Dim>
double weight(std::span<Point<Dim> const> points, std::vector<double> const *core, std::uint32_t u,
              std::uint32_t v)
{
  double const d = distance(points[u], points[v]);
  if (!core)
    return d;
  return std::max({(*core)[u], (*core)[v], d});
}

inline void finish(MstResult &result)
{
  std::sort(result.edges.begin(), result.edges.end());
  for (auto const &edge : result.edges)
    result.total_weight += edge.weight;
}

} // namespace detail

/// Dense O(n^2) Prim over the implicit complete graph, growing from point 0.
template <int Dim>
MstResult prim_mst(std::span<Point<Dim> const> points, Metric const &metric,
                   std::size_t cap = default_cap)
{
  auto const n = points.size();
  if (n == 0)
    throw Error(ErrorCode::EmptyDataset, "cannot span an empty point set");
  detail::check_cap(n, cap);
  auto const *core = detail::core_values(metric, n);

  MstResult result;
  std::vector<bool> in_tree(n, false);
  std::vector<WeightedEdge> best(n);
  std::vector<bool> has_best(n, false);

  std::uint32_t current = 0;
  in_tree[0] = true;
  for (std::size_t added = 1; added < n; ++added)
  {
    for (std::uint32_t x = 0; x < n; ++x)
    {
      if (in_tree[x])
        continue;
      auto const edge = WeightedEdge::make(current, x, detail::weight(points, core, current, x));
      if (!has_best[x] || edge < best[x])
      {
        best[x] = edge;
        has_best[x] = true;
      }
    }
    std::uint32_t next = 0;
    bool found = false;
    for (std::uint32_t x = 0; x < n; ++x)
      if (!in_tree[x] && (!found || best[x] < best[next]))
      {
        next = x;
        found = true;
      }
    in_tree[next] = true;
    result.edges.push_back(best[next]);
    current = next;
  }
  detail::finish(result);
  return result;
}

template <int Dim>
MstResult prim_mst(PointSet<Dim> const &points, Metric const &metric, std::size_t cap = default_cap)
{
  return prim_mst(std::span<Point<Dim> const>(points), metric, cap);
}

/// Kruskal over all n(n-1)/2 edges with a path-halving union-find. Used to
/// cross-check Prim.
template <int Dim>
MstResult kruskal_mst(std::span<Point<Dim> const> points, Metric const &metric,
                      std::size_t cap = 3000)
{
  auto const n = points.size();
  if (n == 0)
    throw Error(ErrorCode::EmptyDataset, "cannot span an empty point set");
  detail::check_cap(n, cap);
  auto const *core = detail::core_values(metric, n);

  std::vector<WeightedEdge> all;
  all.reserve(n * (n - 1) / 2);
  for (std::uint32_t u = 0; u < n; ++u)
    for (std::uint32_t v = u + 1; v < n; ++v)
      all.push_back({u, v, detail::weight(points, core, u, v)});
  std::sort(all.begin(), all.end());

  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::uint32_t{0});
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x)
      x = parent[x] = parent[parent[x]];
    return x;
  };

  MstResult result;
  for (auto const &edge : all)
  {
    auto const a = find(edge.u);
    auto const b = find(edge.v);
    if (a == b)
      continue;
    parent[std::max(a, b)] = std::min(a, b);
    result.edges.push_back(edge);
    if (result.edges.size() + 1 == n)
      break;
  }
  detail::finish(result);
  return result;
}

template <int Dim>
MstResult kruskal_mst(PointSet<Dim> const &points, Metric const &metric, std::size_t cap = 3000)
{
  return kruskal_mst(std::span<Point<Dim> const>(points), metric, cap);
}

/// The k smallest Euclidean distances from `query` to every point, itself
/// included, ascending.
template <int Dim>
std::vector<double> brute_knn(std::span<Point<Dim> const> points, std::uint32_t query, int k)
{
  if (query >= points.size())
    throw Error(ErrorCode::InvalidIndex, "query index out of range");
  if (k < 1 || static_cast<std::size_t>(k) > points.size())
    throw Error(ErrorCode::InvalidParameter, "k must lie in [1, n]");
  std::vector<double> row(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    row[i] = distance(points[query], points[i]);
  std::sort(row.begin(), row.end());
  row.resize(static_cast<std::size_t>(k));
  return row;
}

template <int Dim>
std::vector<double> brute_knn(PointSet<Dim> const &points, std::uint32_t query, int k)
{
  return brute_knn(std::span<Point<Dim> const>(points), query, k);
}

template <int Dim>
CoreDistances brute_core_distances(std::span<Point<Dim> const> points, int k_pts)
{
  CoreDistances core{k_pts, std::vector<double>(points.size())};
  for (std::uint32_t i = 0; i < points.size(); ++i)
    core.values[i] = brute_knn(points, i, k_pts).back();
  return core;
}

template <int Dim>
CoreDistances brute_core_distances(PointSet<Dim> const &points, int k_pts)
{
  return brute_core_distances(std::span<Point<Dim> const>(points), k_pts);
}

/// Minimum edge, under the total order, from `component` to any point with a
/// different label. `labels` is indexed by point.
template <int Dim>
WeightedEdge brute_bichromatic_min(std::span<Point<Dim> const> points,
                                   std::span<std::uint32_t const> labels, std::uint32_t component,
                                   Metric const &metric)
{
  if (labels.size() != points.size())
    throw Error(ErrorCode::InvalidParameter, "one label per point required");
  auto const *core = detail::core_values(metric, points.size());
  WeightedEdge best;
  bool found = false;
  for (std::uint32_t u = 0; u < points.size(); ++u)
  {
    if (labels[u] != component)
      continue;
    for (std::uint32_t v = 0; v < points.size(); ++v)
    {
      if (labels[v] == component)
        continue;
      auto const edge = WeightedEdge::make(u, v, detail::weight(points, core, u, v));
      if (!found || edge < best)
      {
        best = edge;
        found = true;
      }
    }
  }
  if (!found)
    throw Error(ErrorCode::NoOutgoingEdge,
                "component " + std::to_string(component) + " has no outside points");
  return best;
}

template <int Dim>
WeightedEdge brute_bichromatic_min(PointSet<Dim> const &points,
                                   std::span<std::uint32_t const> labels, std::uint32_t component,
                                   Metric const &metric)
{
  return brute_bichromatic_min(std::span<Point<Dim> const>(points), labels, component, metric);
}

} // namespace emst::oracle

#endif
