#ifndef EMST_MST_HPP
#define EMST_MST_HPP

#include <emst/bvh.hpp>
#include <emst/error.hpp>
#include <emst/geometry.hpp>
#include <emst/metric.hpp>
#include <emst/parallel.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace emst
{

/// Undirected weighted edge, stored with u < v. Edges are totally ordered by
/// (weight, u, v), which resolves equal weights by the smaller endpoint and
/// then the larger one.
struct WeightedEdge
{
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  double weight = 0;

  static constexpr WeightedEdge make(std::uint32_t a, std::uint32_t b, double weight) noexcept
  {
    return a < b ? WeightedEdge{a, b, weight} : WeightedEdge{b, a, weight};
  }

  friend constexpr bool operator<(WeightedEdge const &lhs, WeightedEdge const &rhs) noexcept
  {
    return std::tie(lhs.weight, lhs.u, lhs.v) < std::tie(rhs.weight, rhs.u, rhs.v);
  }

  friend constexpr bool operator==(WeightedEdge const &, WeightedEdge const &) = default;
};

/// Internal-node label of a subtree holding more than one component.
inline constexpr std::uint32_t mixed_label = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::uint32_t no_component = std::numeric_limits<std::uint32_t>::max();

/// Per-iteration component bookkeeping. A component is identified by its
/// representative, the smallest original point index it contains.
struct ComponentState
{
  /// Indexed by leaf slot (Z-curve order); holds representatives.
  std::vector<std::uint32_t> leaf_labels;
  /// Indexed by internal node; a representative or `mixed_label`.
  std::vector<std::uint32_t> internal_labels;
  /// Indexed by representative.
  std::vector<double> upper_bounds;
  /// Indexed by representative.
  std::vector<WeightedEdge> best_out_edge;
  /// Representative of the component on the far side of best_out_edge.
  std::vector<std::uint32_t> best_out_target;
  /// Representatives of the live components, ascending.
  std::vector<std::uint32_t> components;

  /// Every point in its own component.
  template <int Dim>
  static ComponentState singletons(Bvh<Dim> const &bvh)
  {
    auto const n = bvh.size();
    ComponentState state;
    state.leaf_labels.assign(bvh.leaf_permutation().begin(), bvh.leaf_permutation().end());
    state.internal_labels.assign(n > 0 ? n - 1 : 0, mixed_label);
    state.upper_bounds.assign(n, std::numeric_limits<double>::infinity());
    state.best_out_edge.assign(n, WeightedEdge{});
    state.best_out_target.assign(n, no_component);
    state.components.resize(n);
    std::iota(state.components.begin(), state.components.end(), std::uint32_t{0});
    return state;
  }
};

struct PhaseTimings
{
  double tree = 0;
  double core_distances = 0;
  double reduce_labels = 0;
  double upper_bounds = 0;
  double find_edges = 0;
  double merge = 0;
  double total = 0;

  /// Borůvka time: everything after tree construction and core distances.
  double boruvka() const noexcept { return reduce_labels + upper_bounds + find_edges + merge; }
  double phase_sum() const noexcept { return tree + core_distances + boruvka(); }
};

struct MstResult
{
  /// Sorted by the edge total order.
  std::vector<WeightedEdge> edges;
  double total_weight = 0;
  int iterations = 0;
  /// Component count before the first iteration and after each one.
  std::vector<std::size_t> component_counts;
  /// Leaf distance evaluations performed while searching outgoing edges.
  std::uint64_t leaf_distance_evaluations = 0;
  PhaseTimings timings;
};

struct MstOptions
{
  /// Skip subtrees whose leaves all belong to the query's component.
  bool subtree_skipping = true;
  /// Seed each component's cutoff radius from Z-curve neighbours.
  bool upper_bounds = true;
  Executor exec;
};

namespace detail
{

class Stopwatch
{
public:
  double elapsed() const noexcept
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - _start).count();
  }

  double lap() noexcept
  {
    auto const now = std::chrono::steady_clock::now();
    double const seconds = std::chrono::duration<double>(now - _last).count();
    _last = now;
    return seconds;
  }

private:
  std::chrono::steady_clock::time_point _start = std::chrono::steady_clock::now();
  std::chrono::steady_clock::time_point _last = _start;
};

// Metric weights addressed by leaf slot instead of point index.
class SlotWeights
{
public:
  template <int Dim>
  SlotWeights(Bvh<Dim> const &bvh, Metric const &metric)
  {
    metric.check_size(bvh.size());
    if (auto const *core = metric.core_distances())
    {
      auto const permutation = bvh.leaf_permutation();
      _core.resize(bvh.size());
      for (std::size_t slot = 0; slot < _core.size(); ++slot)
        _core[slot] = core->values[permutation[slot]];
    }
  }

  double core(std::uint32_t slot) const noexcept { return _core.empty() ? 0.0 : _core[slot]; }

  double operator()(std::uint32_t a, std::uint32_t b, double euclidean) const noexcept
  {
    if (_core.empty())
      return euclidean;
    return std::max({_core[a], _core[b], euclidean});
  }

private:
  std::vector<double> _core;
};

// Nearest neighbour of one query point outside its component, under the
// edge total order.
class OutgoingEdgeQuery
{
public:
  OutgoingEdgeQuery(ComponentState const &state, std::span<std::uint32_t const> permutation,
                    SlotWeights const &weights, bool subtree_skipping, std::uint32_t query_slot,
                    double cutoff)
      : _leaf_labels(state.leaf_labels)
      , _internal_labels(state.internal_labels)
      , _permutation(permutation)
      , _weights(weights)
      , _subtree_skipping(subtree_skipping)
      , _query_slot(query_slot)
      , _query_index(permutation[query_slot])
      , _component(state.leaf_labels[query_slot])
      , _radius(cutoff)
  {
  }

  bool skip(NodeRef node) const noexcept
  {
    if (node.is_leaf())
      return _leaf_labels[node.index()] == _component;
    return _subtree_skipping && _internal_labels[node.index()] == _component;
  }

  double radius() const noexcept { return _radius; }

  void visit_leaf(std::uint32_t slot, double euclidean) noexcept
  {
    double const weight = _weights(_query_slot, slot, euclidean);
    if (weight > _radius)
      return;
    auto const other = _permutation[slot];
    auto const candidate = WeightedEdge::make(_query_index, other, weight);
    if (_best_slot == no_component || candidate < _best)
    {
      _best = candidate;
      _best_slot = slot;
      _radius = weight;
    }
  }

  bool found() const noexcept { return _best_slot != no_component; }
  WeightedEdge const &best() const noexcept { return _best; }
  std::uint32_t best_slot() const noexcept { return _best_slot; }

private:
  std::span<std::uint32_t const> _leaf_labels;
  std::span<std::uint32_t const> _internal_labels;
  std::span<std::uint32_t const> _permutation;
  SlotWeights const &_weights;
  bool _subtree_skipping;
  std::uint32_t _query_slot;
  std::uint32_t _query_index;
  std::uint32_t _component;
  double _radius;
  WeightedEdge _best;
  std::uint32_t _best_slot = no_component;
};

template <int Dim>
void compute_upper_bounds(Bvh<Dim> const &bvh, SlotWeights const &weights, ComponentState &state,
                          Executor const &exec)
{
  auto const n = bvh.size();
  std::vector<std::uint64_t> bound_bits(n, ordered_bits(std::numeric_limits<double>::infinity()));
  if (n >= 2)
  {
    parallel_for(exec, n - 1, [&](std::size_t i) {
      auto const a = static_cast<std::uint32_t>(i);
      auto const b = a + 1;
      auto const label_a = state.leaf_labels[a];
      auto const label_b = state.leaf_labels[b];
      if (label_a == label_b)
        return;
      auto const bits =
          ordered_bits(weights(a, b, distance(bvh.leaf_point(a), bvh.leaf_point(b))));
      atomic_min(bound_bits[label_a], bits);
      atomic_min(bound_bits[label_b], bits);
    });
  }
  parallel_for(exec, state.components.size(), [&](std::size_t i) {
    auto const c = state.components[i];
    state.upper_bounds[c] = from_ordered_bits(bound_bits[c]);
  });
}

template <int Dim>
std::uint64_t find_component_outgoing_edges(Bvh<Dim> const &bvh, SlotWeights const &weights,
                                             ComponentState &state, MstOptions const &options)
{
  if (state.components.size() < 2)
    throw Error(ErrorCode::NothingToFind, "a single component has no outgoing edge");

  auto const n = bvh.size();
  auto const &exec = options.exec;
  auto const permutation = bvh.leaf_permutation();
  constexpr double infinity = std::numeric_limits<double>::infinity();

  std::vector<WeightedEdge> candidate(n);
  std::vector<std::uint32_t> candidate_slot(n, no_component);

  // Queries run in leaf order, i.e. pre-sorted along the Z-curve.
  auto const evaluations = parallel_count(exec, n, [&](std::size_t slot_index) -> std::uint64_t {
    auto const slot = static_cast<std::uint32_t>(slot_index);
    auto const component = state.leaf_labels[slot];
    double const cutoff = options.upper_bounds ? state.upper_bounds[component] : infinity;
    // Every weight from this point is at least its core distance.
    if (weights.core(slot) > cutoff)
      return 0;
    OutgoingEdgeQuery query(state, permutation, weights, options.subtree_skipping, slot, cutoff);
    auto const count = traverse_nearest(bvh, bvh.leaf_point(slot), query);
    if (query.found())
    {
      candidate[slot] = query.best();
      candidate_slot[slot] = query.best_slot();
    }
    return count;
  });

  // Per-component minimum under the total order, as two 64-bit atomic-min
  // rounds: first the weight, then the endpoint pair among the ties.
  std::vector<std::uint64_t> min_weight(n, ordered_bits(infinity));
  std::vector<std::uint64_t> min_pair(n, std::numeric_limits<std::uint64_t>::max());
  auto pair_key = [](WeightedEdge const &edge) {
    return (std::uint64_t{edge.u} << 32) | edge.v;
  };

  parallel_for(exec, n, [&](std::size_t slot) {
    if (candidate_slot[slot] != no_component)
      atomic_min(min_weight[state.leaf_labels[slot]], ordered_bits(candidate[slot].weight));
  });
  parallel_for(exec, n, [&](std::size_t slot) {
    auto const component = state.leaf_labels[slot];
    if (candidate_slot[slot] != no_component &&
        ordered_bits(candidate[slot].weight) == min_weight[component])
      atomic_min(min_pair[component], pair_key(candidate[slot]));
  });
  parallel_for(exec, n, [&](std::size_t slot) {
    auto const component = state.leaf_labels[slot];
    if (candidate_slot[slot] != no_component &&
        ordered_bits(candidate[slot].weight) == min_weight[component] &&
        pair_key(candidate[slot]) == min_pair[component])
    {
      state.best_out_edge[component] = candidate[slot];
      state.best_out_target[component] = state.leaf_labels[candidate_slot[slot]];
    }
  });

  for (auto c : state.components)
    if (min_weight[c] == ordered_bits(infinity))
      throw Error(ErrorCode::InternalInvariantViolation,
                  "component " + std::to_string(c) + " found no outgoing edge");
  return evaluations;
}

} // namespace detail

/// Labels every internal node with the common label of its leaves, or
/// `mixed_label`, in one bottom-up sweep.
template <int Dim>
void reduce_labels(Bvh<Dim> const &bvh, ComponentState &state, Executor const &exec = {})
{
  state.internal_labels = for_each_leaf_to_root(
      bvh, exec, [&](std::uint32_t slot) { return state.leaf_labels[slot]; },
      [](std::uint32_t, std::uint32_t left, std::uint32_t right) {
        return left == right ? left : mixed_label;
      });
}

/// For every Z-curve-adjacent pair of leaves in different components, both
/// components' bounds are lowered to the pair's weight. Components with no
/// such pair get +inf.
template <int Dim>
void compute_upper_bounds(Bvh<Dim> const &bvh, Metric const &metric, ComponentState &state,
                          Executor const &exec = {})
{
  detail::compute_upper_bounds(bvh, detail::SlotWeights(bvh, metric), state, exec);
}

/// Fills best_out_edge/best_out_target for every live component. Returns the
/// number of leaf distance evaluations.
template <int Dim>
std::uint64_t find_component_outgoing_edges(Bvh<Dim> const &bvh, Metric const &metric,
                                             ComponentState &state, MstOptions const &options = {})
{
  return detail::find_component_outgoing_edges(bvh, detail::SlotWeights(bvh, metric), state,
                                                options);
}

struct MergeOutcome
{
  std::size_t components = 0;
  /// In ascending order of the selecting component's representative.
  std::vector<WeightedEdge> edges;
};

/// Follows each component's chain of best outgoing edges to the terminal
/// mutual pair, relabels every leaf with the smallest representative among
/// the components reaching that pair, and returns the selected edges
/// without duplicates.
inline MergeOutcome merge_components(ComponentState &state, Executor const &exec = {})
{
  auto const &components = state.components;
  auto const n = state.upper_bounds.size();
  auto const count = components.size();

  std::vector<std::uint32_t> next(n, no_component);
  for (auto c : components)
  {
    auto const target = state.best_out_target[c];
    if (target >= n || target == c || state.best_out_target[target] == no_component)
      throw Error(ErrorCode::InternalInvariantViolation,
                  "component " + std::to_string(c) + " has no valid outgoing edge");
    next[c] = state.best_out_target[target] == c ? std::min(c, target) : target;
  }

  MergeOutcome outcome;
  for (auto c : components)
  {
    auto const target = state.best_out_target[c];
    bool const mutual = state.best_out_target[target] == c;
    if (!mutual || c < target)
      outcome.edges.push_back(state.best_out_edge[c]);
  }

  // Pointer jumping: each round halves the remaining chain length.
  std::vector<std::uint32_t> resolved = next;
  std::vector<std::uint32_t> jumped(n, no_component);
  int rounds = 0;
  int const max_rounds = 2 + static_cast<int>(std::bit_width(count));
  bool changed = true;
  while (changed)
  {
    if (++rounds > max_rounds)
      throw Error(ErrorCode::InternalInvariantViolation,
                  "component chains did not terminate in a mutual pair");
    changed = false;
    for (auto c : components)
    {
      jumped[c] = resolved[resolved[c]];
      changed = changed || jumped[c] != resolved[c];
    }
    for (auto c : components)
      resolved[c] = jumped[c];
  }
  for (auto c : components)
    if (next[resolved[c]] != resolved[c])
      throw Error(ErrorCode::InternalInvariantViolation,
                  "chain from component " + std::to_string(c) + " has a cycle longer than 2");

  // Relabel every merged group with its smallest representative, i.e. the
  // smallest point index of the new component. `components` is ascending, so
  // the first member seen for a terminal pair is that minimum.
  std::vector<std::uint32_t> smallest(n, no_component);
  for (auto c : components)
    if (smallest[resolved[c]] == no_component)
      smallest[resolved[c]] = c;
  for (auto c : components)
    resolved[c] = smallest[resolved[c]];

  parallel_for(exec, state.leaf_labels.size(), [&](std::size_t slot) {
    state.leaf_labels[slot] = resolved[state.leaf_labels[slot]];
  });

  std::vector<std::uint32_t> survivors;
  for (auto c : components)
    if (resolved[c] == c)
      survivors.push_back(c);
  if (survivors.size() + outcome.edges.size() != count)
    throw Error(ErrorCode::InternalInvariantViolation, "merge lost track of components");

  state.components = std::move(survivors);
  outcome.components = state.components.size();
  return outcome;
}

namespace detail
{

inline void finalize(MstResult &result)
{
  std::sort(result.edges.begin(), result.edges.end());
  result.total_weight = 0;
  for (auto const &edge : result.edges)
    result.total_weight += edge.weight;
}

} // namespace detail

/// Borůvka iterations over a prebuilt tree. Each iteration relabels internal
/// nodes, seeds per-component radii, finds every component's shortest
/// outgoing edge and merges the resulting chains, until one component
/// remains.
template <int Dim>
MstResult boruvka_emst(Bvh<Dim> const &bvh, Metric const &metric, MstOptions const &options = {})
{
  auto const n = bvh.size();
  if (n == 0)
    throw Error(ErrorCode::EmptyDataset, "cannot span an empty point set");

  detail::Stopwatch watch;
  MstResult result;
  result.component_counts.push_back(n);
  detail::SlotWeights const weights(bvh, metric);
  auto state = ComponentState::singletons(bvh);
  result.edges.reserve(n - 1);
  watch.lap();

  while (state.components.size() > 1)
  {
    reduce_labels(bvh, state, options.exec);
    result.timings.reduce_labels += watch.lap();

    if (options.upper_bounds)
      detail::compute_upper_bounds(bvh, weights, state, options.exec);
    result.timings.upper_bounds += watch.lap();

    result.leaf_distance_evaluations +=
        detail::find_component_outgoing_edges(bvh, weights, state, options);
    result.timings.find_edges += watch.lap();

    auto outcome = merge_components(state, options.exec);
    result.edges.insert(result.edges.end(), outcome.edges.begin(), outcome.edges.end());
    ++result.iterations;
    result.component_counts.push_back(outcome.components);
    result.timings.merge += watch.lap();
  }

  detail::finalize(result);
  result.timings.merge += watch.lap();
  result.timings.total = watch.elapsed();
  return result;
}

/// Builds the tree over `points` and runs Borůvka. The metric's core
/// distances, if any, must describe the same points.
template <int Dim>
MstResult boruvka_emst(std::span<Point<Dim> const> points, Metric const &metric,
                       MstOptions const &options = {})
{
  if (points.empty())
    throw Error(ErrorCode::EmptyDataset, "cannot span an empty point set");
  detail::Stopwatch watch;
  auto const bvh = build(points, options.exec);
  double const tree = watch.lap();
  auto result = boruvka_emst(bvh, metric, options);
  result.timings.tree = tree;
  result.timings.total = watch.elapsed();
  return result;
}

struct MstConfig
{
  MetricKind metric = MetricKind::Euclidean;
  int k_pts = 1;
  MstOptions options;
};

/// The full pipeline: tree construction, core distances when the mutual
/// reachability metric is requested, then Borůvka. Every stage is timed.
template <int Dim>
MstResult compute_mst(std::span<Point<Dim> const> points, MstConfig const &config = {})
{
  if (points.empty())
    throw Error(ErrorCode::EmptyDataset, "cannot span an empty point set");
  detail::Stopwatch watch;
  auto const bvh = build(points, config.options.exec);
  double const tree = watch.lap();

  auto metric = Metric::euclidean();
  if (config.metric == MetricKind::MutualReachability)
    metric = Metric::mutual_reachability(compute_core_distances(bvh, config.k_pts, config.options.exec));
  double const core = watch.lap();

  auto result = boruvka_emst(bvh, metric, config.options);
  result.timings.tree = tree;
  result.timings.core_distances = core;
  result.timings.total = watch.elapsed();
  return result;
}

template <int Dim>
MstResult compute_mst(PointSet<Dim> const &points, MstConfig const &config = {})
{
  return compute_mst(std::span<Point<Dim> const>(points), config);
}

} // namespace emst

#endif
