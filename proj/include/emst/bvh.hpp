#ifndef EMST_BVH_HPP
#define EMST_BVH_HPP

#include <emst/error.hpp>
#include <emst/geometry.hpp>
#include <emst/parallel.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace emst
{

/// Reference to a BVH node: a leaf slot or an internal node index, told
/// apart by the top bit.
class NodeRef
{
public:
  constexpr NodeRef() noexcept = default;

  static constexpr NodeRef leaf(std::uint32_t slot) noexcept { return NodeRef(slot | leaf_flag); }
  static constexpr NodeRef internal(std::uint32_t index) noexcept { return NodeRef(index); }

  constexpr bool is_none() const noexcept { return _bits == none_bits; }
  constexpr bool is_leaf() const noexcept { return !is_none() && (_bits & leaf_flag) != 0; }
  constexpr bool is_internal() const noexcept { return (_bits & leaf_flag) == 0; }
  constexpr std::uint32_t index() const noexcept { return _bits & ~leaf_flag; }

  friend constexpr bool operator==(NodeRef, NodeRef) = default;

private:
  static constexpr std::uint32_t leaf_flag = std::uint32_t{1} << 31;
  static constexpr std::uint32_t none_bits = std::numeric_limits<std::uint32_t>::max();

  constexpr explicit NodeRef(std::uint32_t bits) noexcept : _bits(bits) {}

  std::uint32_t _bits = none_bits;
};

template <int Dim>
struct InternalNode
{
  NodeRef left;
  NodeRef right;
  NodeRef parent;
  Aabb<Dim> box = Aabb<Dim>::empty();
};

/// Binary linear BVH with n leaves and n-1 internal nodes. Leaves are stored
/// in Z-curve order; `leaf_permutation()[slot]` is the original index of the
/// point in that slot.
template <int Dim>
class Bvh
{
public:
  Bvh() = default;

  std::size_t size() const noexcept { return _leaf_points.size(); }
  NodeRef root() const noexcept { return _root; }

  std::span<std::uint32_t const> leaf_permutation() const noexcept { return _leaf_permutation; }
  std::span<Point<Dim> const> leaf_points() const noexcept { return _leaf_points; }
  std::span<InternalNode<Dim> const> internal_nodes() const noexcept { return _internal_nodes; }
  std::span<NodeRef const> leaf_parents() const noexcept { return _leaf_parents; }

  Point<Dim> const &leaf_point(std::uint32_t slot) const noexcept { return _leaf_points[slot]; }

  NodeRef parent(NodeRef node) const noexcept
  {
    return node.is_leaf() ? _leaf_parents[node.index()] : _internal_nodes[node.index()].parent;
  }

  Aabb<Dim> box(NodeRef node) const noexcept
  {
    return node.is_leaf() ? Aabb<Dim>::of(_leaf_points[node.index()])
                          : _internal_nodes[node.index()].box;
  }

  Aabb<Dim> bounds() const noexcept { return box(_root); }

  /// Assembles a tree from explicit child links, e.g. to reproduce a
  /// hand-drawn topology. Parents and boxes are derived; the structure is
  /// validated.
  static Bvh from_topology(std::span<Point<Dim> const> points,
                           std::vector<std::uint32_t> leaf_permutation,
                           std::span<std::pair<NodeRef, NodeRef> const> children, NodeRef root);

private:
  template <int D>
  friend Bvh<D> build(std::span<Point<D> const> points, Executor const &exec);

  void compute_boxes_top_down(NodeRef node);

  std::vector<std::uint32_t> _leaf_permutation;
  std::vector<Point<Dim>> _leaf_points;
  std::vector<InternalNode<Dim>> _internal_nodes;
  std::vector<NodeRef> _leaf_parents;
  NodeRef _root;
};

namespace detail
{

inline constexpr std::uint32_t no_bound = std::numeric_limits<std::uint32_t>::max();

// Split priority between adjacent sorted leaves. Larger values split higher
// in the tree. Equal codes fall back to the XOR of the point indices, which
// always ranks below any differing pair of codes.
inline std::uint64_t split_delta(std::uint64_t code_a, std::uint64_t code_b, std::uint32_t index_a,
                                 std::uint32_t index_b) noexcept
{
  auto const code_xor = code_a ^ code_b;
  if (code_xor != 0)
    return code_xor + (std::uint64_t{1} << 32);
  return index_a ^ index_b;
}

} // namespace detail

/// Builds the hierarchy from the Morton-sorted points. Every leaf climbs
/// towards the root, joining at each step the neighbouring range across the
/// boundary with the smaller split delta; the second arrival at a node
/// finishes it. The resulting topology depends only on the sorted keys.
template <int Dim>
Bvh<Dim> build(std::span<Point<Dim> const> points, Executor const &exec = {})
{
  auto const bounds = scene_bounds(points);
  auto const n = points.size();
  if (n >= (std::size_t{1} << 31))
    throw Error(ErrorCode::InvalidParameter, "too many points for 31-bit node references");

  std::vector<std::uint64_t> codes(n);
  parallel_for(exec, n, [&](std::size_t i) { codes[i] = morton_encode(points[i], bounds).bits; });

  Bvh<Dim> bvh;
  bvh._leaf_permutation.resize(n);
  std::iota(bvh._leaf_permutation.begin(), bvh._leaf_permutation.end(), std::uint32_t{0});
  std::sort(bvh._leaf_permutation.begin(), bvh._leaf_permutation.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              return codes[a] != codes[b] ? codes[a] < codes[b] : a < b;
            });

  bvh._leaf_points.resize(n);
  parallel_for(exec, n, [&](std::size_t slot) {
    bvh._leaf_points[slot] = points[bvh._leaf_permutation[slot]];
  });
  bvh._leaf_parents.assign(n, NodeRef{});

  if (n == 1)
  {
    bvh._root = NodeRef::leaf(0);
    return bvh;
  }

  auto const &perm = bvh._leaf_permutation;
  std::vector<std::uint64_t> delta(n - 1);
  parallel_for(exec, n - 1, [&](std::size_t i) {
    delta[i] = detail::split_delta(codes[perm[i]], codes[perm[i + 1]], perm[i], perm[i + 1]);
  });

  bvh._internal_nodes.assign(n - 1, InternalNode<Dim>{});
  std::vector<std::uint32_t> pending_bound(n - 1, detail::no_bound);
  auto const last = static_cast<std::uint32_t>(n - 1);
  constexpr auto infinite_delta = std::numeric_limits<std::uint64_t>::max();

  parallel_for(exec, n, [&](std::size_t leaf) {
    auto range_left = static_cast<std::uint32_t>(leaf);
    auto range_right = range_left;
    auto node = NodeRef::leaf(range_left);
    auto box = Aabb<Dim>::of(bvh._leaf_points[leaf]);

    auto set_parent = [&](NodeRef child, std::uint32_t parent) {
      if (child.is_leaf())
        bvh._leaf_parents[child.index()] = NodeRef::internal(parent);
      else
        bvh._internal_nodes[child.index()].parent = NodeRef::internal(parent);
    };

    while (true)
    {
      auto const left_delta = range_left == 0 ? infinite_delta : delta[range_left - 1];
      auto const right_delta = range_right == last ? infinite_delta : delta[range_right];

      std::uint32_t parent;
      std::uint32_t sibling_bound;
      if (right_delta < left_delta)
      {
        parent = range_right;
        bvh._internal_nodes[parent].left = node;
        set_parent(node, parent);
        sibling_bound = std::atomic_ref<std::uint32_t>(pending_bound[parent])
                            .exchange(range_left, std::memory_order_acq_rel);
        if (sibling_bound == detail::no_bound)
          return;
        range_right = sibling_bound;
        box.expand(bvh.box(bvh._internal_nodes[parent].right));
      }
      else
      {
        parent = range_left - 1;
        bvh._internal_nodes[parent].right = node;
        set_parent(node, parent);
        sibling_bound = std::atomic_ref<std::uint32_t>(pending_bound[parent])
                            .exchange(range_right, std::memory_order_acq_rel);
        if (sibling_bound == detail::no_bound)
          return;
        range_left = sibling_bound;
        box.expand(bvh.box(bvh._internal_nodes[parent].left));
      }

      bvh._internal_nodes[parent].box = box;
      node = NodeRef::internal(parent);
      if (range_left == 0 && range_right == last)
      {
        bvh._root = node;
        return;
      }
    }
  });

  return bvh;
}

template <int Dim>
Bvh<Dim> build(PointSet<Dim> const &points, Executor const &exec = {})
{
  return build(std::span<Point<Dim> const>(points), exec);
}

template <int Dim>
void Bvh<Dim>::compute_boxes_top_down(NodeRef node)
{
  // Post-order with an explicit stack; topologies from from_topology may be
  // arbitrarily deep.
  std::vector<std::pair<NodeRef, bool>> stack{{node, false}};
  while (!stack.empty())
  {
    auto [current, expanded] = stack.back();
    stack.pop_back();
    if (current.is_leaf())
      continue;
    auto &internal = _internal_nodes[current.index()];
    if (!expanded)
    {
      stack.push_back({current, true});
      stack.push_back({internal.left, false});
      stack.push_back({internal.right, false});
      continue;
    }
    internal.box = box(internal.left);
    internal.box.expand(box(internal.right));
  }
}

template <int Dim>
Bvh<Dim> Bvh<Dim>::from_topology(std::span<Point<Dim> const> points,
                                 std::vector<std::uint32_t> leaf_permutation,
                                 std::span<std::pair<NodeRef, NodeRef> const> children,
                                 NodeRef root)
{
  auto const n = points.size();
  if (n == 0)
    throw Error(ErrorCode::EmptyDataset, "cannot build a tree without points");
  validate(points);
  if (leaf_permutation.size() != n || children.size() + 1 != n)
    throw Error(ErrorCode::InvalidParameter, "topology needs n leaves and n-1 internal nodes");

  std::vector<bool> seen(n, false);
  for (auto index : leaf_permutation)
  {
    if (index >= n || seen[index])
      throw Error(ErrorCode::InvalidParameter, "leaf permutation is not a bijection");
    seen[index] = true;
  }

  Bvh bvh;
  bvh._leaf_permutation = std::move(leaf_permutation);
  bvh._leaf_points.resize(n);
  for (std::size_t slot = 0; slot < n; ++slot)
    bvh._leaf_points[slot] = points[bvh._leaf_permutation[slot]];
  bvh._leaf_parents.assign(n, NodeRef{});
  bvh._internal_nodes.assign(n - 1, InternalNode<Dim>{});
  bvh._root = root;

  auto in_range = [&](NodeRef ref) {
    return !ref.is_none() && ref.index() < (ref.is_leaf() ? n : n - 1);
  };
  if (!in_range(root))
    throw Error(ErrorCode::InvalidParameter, "root reference out of range");

  auto parent_of = [&](NodeRef ref) -> NodeRef & {
    return ref.is_leaf() ? bvh._leaf_parents[ref.index()]
                         : bvh._internal_nodes[ref.index()].parent;
  };
  for (std::size_t i = 0; i + 1 < n; ++i)
  {
    auto const [left, right] = children[i];
    if (!in_range(left) || !in_range(right) || left == right)
      throw Error(ErrorCode::InvalidParameter, "invalid child of internal node " + std::to_string(i));
    for (auto child : {left, right})
    {
      if (!parent_of(child).is_none() || child == root)
        throw Error(ErrorCode::InvalidParameter, "node has more than one parent");
      parent_of(child) = NodeRef::internal(static_cast<std::uint32_t>(i));
    }
    bvh._internal_nodes[i].left = left;
    bvh._internal_nodes[i].right = right;
  }
  for (std::size_t slot = 0; slot < n; ++slot)
    if (bvh._leaf_parents[slot].is_none() && NodeRef::leaf(static_cast<std::uint32_t>(slot)) != root)
      throw Error(ErrorCode::InvalidParameter, "leaf is not attached to the tree");

  bvh.compute_boxes_top_down(root);
  return bvh;
}

/// Bottom-up sweep with a rendezvous at every internal node: each leaf
/// starts a climb carrying `leaf_value(slot)`; the first arrival at a node
/// parks its value and stops, the second calls
/// `combine(node_index, left_value, right_value)` and carries the result
/// upwards. Returns the combined value of every internal node. `combine`
/// runs exactly once per internal node.
template <int Dim, typename LeafFn, typename CombineFn>
auto for_each_leaf_to_root(Bvh<Dim> const &bvh, Executor const &exec, LeafFn &&leaf_value,
                           CombineFn &&combine)
{
  using Value = std::invoke_result_t<LeafFn &, std::uint32_t>;
  auto const n = bvh.size();
  auto const internal_count = n > 0 ? n - 1 : 0;
  std::vector<Value> combined(internal_count);
  if (internal_count == 0)
    return combined;

  std::vector<Value> parked(2 * internal_count);
  std::vector<std::uint8_t> arrivals(internal_count, 0);
  auto const nodes = bvh.internal_nodes();

  parallel_for(exec, n, [&](std::size_t slot) {
    auto node = NodeRef::leaf(static_cast<std::uint32_t>(slot));
    Value value = leaf_value(static_cast<std::uint32_t>(slot));
    for (auto parent = bvh.parent(node); !parent.is_none(); parent = bvh.parent(node))
    {
      auto const index = parent.index();
      int const side = nodes[index].left == node ? 0 : 1;
      parked[2 * index + side] = value;
      if (std::atomic_ref<std::uint8_t>(arrivals[index]).fetch_add(1, std::memory_order_acq_rel) == 0)
        return;
      value = combine(index, parked[2 * index], parked[2 * index + 1]);
      combined[index] = value;
      node = parent;
    }
  });
  return combined;
}

/// Callbacks driving `traverse_nearest`. `skip` is the subtree predicate
/// (true rejects the node before any distance is computed), `radius` the
/// current cutoff, and `visit_leaf` receives each leaf within the cutoff
/// together with its Euclidean distance.
template <typename Query>
concept NearestQuery = requires(Query &query, NodeRef node, std::uint32_t slot, double d) {
  { query.skip(node) } -> std::convertible_to<bool>;
  { query.radius() } -> std::convertible_to<double>;
  query.visit_leaf(slot, d);
};

inline constexpr int traversal_stack_capacity = 64;

/// Depth-first nearest search from `point`. Nodes farther than the current
/// radius are pruned; the nearer child is explored first. Returns the number
/// of leaf distance evaluations.
template <int Dim, NearestQuery Query>
std::uint64_t traverse_nearest(Bvh<Dim> const &bvh, Point<Dim> const &point, Query &query)
{
  std::uint64_t leaf_evaluations = 0;
  auto const root = bvh.root();
  if (root.is_none())
    return 0;
  if (root.is_leaf())
  {
    if (!query.skip(root))
    {
      auto const d = distance(point, bvh.leaf_point(root.index()));
      ++leaf_evaluations;
      if (d <= query.radius())
        query.visit_leaf(root.index(), d);
    }
    return leaf_evaluations;
  }

  struct Entry
  {
    NodeRef node;
    double distance;
  };
  std::array<Entry, traversal_stack_capacity> stack;
  int top = 0;
  stack[top++] = {root, distance_point_box(point, bvh.box(root))};
  auto const nodes = bvh.internal_nodes();

  while (top > 0)
  {
    auto const [node, node_distance] = stack[--top];
    if (node_distance > query.radius())
      continue;

    std::array<Entry, 2> pending;
    int pending_count = 0;
    for (auto child : {nodes[node.index()].left, nodes[node.index()].right})
    {
      if (query.skip(child))
        continue;
      if (child.is_leaf())
      {
        auto const d = distance(point, bvh.leaf_point(child.index()));
        ++leaf_evaluations;
        if (d <= query.radius())
          query.visit_leaf(child.index(), d);
      }
      else
      {
        auto const d = distance_point_box(point, nodes[child.index()].box);
        if (d <= query.radius())
          pending[pending_count++] = {child, d};
      }
    }
    if (pending_count == 2 && pending[0].distance < pending[1].distance)
      std::swap(pending[0], pending[1]);
    if (top + pending_count > traversal_stack_capacity)
      throw Error(ErrorCode::InternalInvariantViolation,
                  "traversal stack overflow (capacity " + std::to_string(traversal_stack_capacity) +
                      ")");
    for (int i = 0; i < pending_count; ++i)
      stack[top++] = pending[i];
  }
  return leaf_evaluations;
}

} // namespace emst

#endif
