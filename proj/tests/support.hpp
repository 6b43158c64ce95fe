#ifndef EMST_TESTS_SUPPORT_HPP
#define EMST_TESTS_SUPPORT_HPP

#include <emst/emst.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace emst::test
{

template <int Dim>
PointSet<Dim> uniform_points(std::size_t n, std::uint64_t seed)
{
  return generate<Dim>({DatasetKind::Uniform, n, Dim, seed});
}

template <int Dim>
PointSet<Dim> normal_points(std::size_t n, std::uint64_t seed)
{
  return generate<Dim>({DatasetKind::Normal, n, Dim, seed});
}

template <int Dim>
PointSet<Dim> blob_points(std::size_t n, std::uint64_t seed)
{
  return generate<Dim>({DatasetKind::ClusteredBlobs, n, Dim, seed});
}

// Points snapped to a coarse integer grid: many exact distance ties and
// duplicate points.
template <int Dim>
PointSet<Dim> grid_points(std::size_t n, int cells, std::uint64_t seed)
{
  std::mt19937_64 engine(seed);
  PointSet<Dim> points(n);
  for (auto &p : points)
    for (int k = 0; k < Dim; ++k)
      p[k] = static_cast<float>(engine() % static_cast<std::uint64_t>(cells));
  return points;
}

// Reference union-find for checking component labels.
class UnionFind
{
public:
  explicit UnionFind(std::size_t n) : _parent(n) { std::iota(_parent.begin(), _parent.end(), 0u); }

  std::uint32_t find(std::uint32_t x)
  {
    while (_parent[x] != x)
      x = _parent[x] = _parent[_parent[x]];
    return x;
  }

  // Roots are always the smaller index, so find() yields the minimum.
  bool unite(std::uint32_t a, std::uint32_t b)
  {
    a = find(a);
    b = find(b);
    if (a == b)
      return false;
    _parent[std::max(a, b)] = std::min(a, b);
    return true;
  }

private:
  std::vector<std::uint32_t> _parent;
};

inline bool is_spanning_tree(std::size_t n, std::vector<WeightedEdge> const &edges)
{
  if (edges.size() + 1 != n)
    return false;
  UnionFind uf(n);
  for (auto const &e : edges)
    if (e.u >= n || e.v >= n || e.u >= e.v || !uf.unite(e.u, e.v))
      return false;
  return true;
}

inline int ceil_log2(std::size_t n)
{
  int bits = 0;
  while ((std::size_t{1} << bits) < n)
    ++bits;
  return bits;
}

// Leaf labels (slot order) translated to point-indexed labels.
template <int Dim>
std::vector<std::uint32_t> labels_by_point(Bvh<Dim> const &bvh, ComponentState const &state)
{
  std::vector<std::uint32_t> labels(bvh.size());
  for (std::size_t slot = 0; slot < bvh.size(); ++slot)
    labels[bvh.leaf_permutation()[slot]] = state.leaf_labels[slot];
  return labels;
}

} // namespace emst::test

#endif
