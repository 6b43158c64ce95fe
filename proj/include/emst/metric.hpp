#ifndef EMST_METRIC_HPP
#define EMST_METRIC_HPP

#include <emst/bvh.hpp>
#include <emst/error.hpp>
#include <emst/geometry.hpp>
#include <emst/parallel.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace emst
{

/// values[i] is the distance from point i to its k_pts-th nearest neighbour,
/// the point itself counting as the first.
struct CoreDistances
{
  int k_pts = 1;
  std::vector<double> values;
};

enum class MetricKind
{
  Euclidean,
  MutualReachability,
};

/// Edge weight semantics: plain Euclidean, or the mutual reachability
/// distance max(core(u), core(v), |u - v|).
class Metric
{
public:
  static Metric euclidean() { return Metric(); }

  static Metric mutual_reachability(CoreDistances core)
  {
    Metric metric;
    metric._kind = MetricKind::MutualReachability;
    metric._core = std::make_shared<CoreDistances const>(std::move(core));
    return metric;
  }

  MetricKind kind() const noexcept { return _kind; }
  bool is_mutual_reachability() const noexcept { return _kind == MetricKind::MutualReachability; }

  /// Null for the Euclidean metric.
  CoreDistances const *core_distances() const noexcept { return _core.get(); }

  int k_pts() const noexcept { return _core ? _core->k_pts : 1; }

  /// Weight from a precomputed Euclidean distance. Indices are unchecked.
  double weight(std::uint32_t u, std::uint32_t v, double euclidean) const noexcept
  {
    if (!_core)
      return euclidean;
    return std::max({_core->values[u], _core->values[v], euclidean});
  }

  /// Throws unless the metric can weigh edges of an n-point set.
  void check_size(std::size_t n) const
  {
    if (_core && _core->values.size() != n)
      throw Error(ErrorCode::InvalidParameter,
                  "core distances cover " + std::to_string(_core->values.size()) +
                      " points, expected " + std::to_string(n));
  }

private:
  Metric() = default;

  MetricKind _kind = MetricKind::Euclidean;
  std::shared_ptr<CoreDistances const> _core;
};

template <int Dim>
double edge_weight(Metric const &metric, std::uint32_t u, std::uint32_t v,
                   std::span<Point<Dim> const> points)
{
  if (u >= points.size() || v >= points.size())
    throw Error(ErrorCode::InvalidIndex, "edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                             ") out of range for " +
                                             std::to_string(points.size()) + " points");
  if (u == v)
    throw Error(ErrorCode::InvalidIndex, "edge endpoints must differ");
  metric.check_size(points.size());
  return metric.weight(u, v, distance(points[u], points[v]));
}

template <int Dim>
double edge_weight(Metric const &metric, std::uint32_t u, std::uint32_t v,
                   PointSet<Dim> const &points)
{
  return edge_weight(metric, u, v, std::span<Point<Dim> const>(points));
}

namespace detail
{

// Bounded max-heap of the k best (distance, index) pairs seen so far.
class KnnQuery
{
public:
  KnnQuery(std::span<std::uint32_t const> permutation, int k)
      : _permutation(permutation)
      , _k(static_cast<std::size_t>(k))
  {
    _heap.reserve(_k);
  }

  bool skip(NodeRef) const noexcept { return false; }

  double radius() const noexcept
  {
    return _heap.size() < _k ? std::numeric_limits<double>::infinity() : _heap.front().first;
  }

  void visit_leaf(std::uint32_t slot, double d)
  {
    std::pair<double, std::uint32_t> const candidate{d, _permutation[slot]};
    if (_heap.size() < _k)
    {
      _heap.push_back(candidate);
      std::push_heap(_heap.begin(), _heap.end());
    }
    else if (candidate < _heap.front())
    {
      std::pop_heap(_heap.begin(), _heap.end());
      _heap.back() = candidate;
      std::push_heap(_heap.begin(), _heap.end());
    }
  }

  double kth_distance() const noexcept { return _heap.front().first; }

private:
  std::span<std::uint32_t const> _permutation;
  std::size_t _k;
  std::vector<std::pair<double, std::uint32_t>> _heap;
};

} // namespace detail

/// Exact k-NN distances (self included) for every point of the tree, indexed
/// by original point index.
template <int Dim>
CoreDistances compute_core_distances(Bvh<Dim> const &bvh, int k_pts, Executor const &exec = {})
{
  auto const n = bvh.size();
  if (k_pts < 1 || static_cast<std::size_t>(k_pts) > n)
    throw Error(ErrorCode::InvalidParameter,
                "k_pts must lie in [1, " + std::to_string(n) + "], got " + std::to_string(k_pts));

  CoreDistances core{k_pts, std::vector<double>(n, 0.0)};
  if (k_pts == 1)
    return core;

  auto const permutation = bvh.leaf_permutation();
  parallel_for_dynamic(exec, n, [&](std::size_t slot) {
    detail::KnnQuery query(permutation, k_pts);
    traverse_nearest(bvh, bvh.leaf_point(static_cast<std::uint32_t>(slot)), query);
    core.values[permutation[slot]] = query.kth_distance();
  });
  return core;
}

/// Convenience overload; `points` must be the set the tree was built from.
template <int Dim>
CoreDistances compute_core_distances(Bvh<Dim> const &bvh, std::span<Point<Dim> const> points,
                                     int k_pts, Executor const &exec = {})
{
  if (points.size() != bvh.size())
    throw Error(ErrorCode::InvalidParameter, "point set does not match the tree");
  return compute_core_distances(bvh, k_pts, exec);
}

template <int Dim>
CoreDistances compute_core_distances(Bvh<Dim> const &bvh, PointSet<Dim> const &points, int k_pts,
                                     Executor const &exec = {})
{
  return compute_core_distances(bvh, std::span<Point<Dim> const>(points), k_pts, exec);
}

} // namespace emst

#endif
