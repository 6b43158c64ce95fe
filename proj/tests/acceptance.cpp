// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <emst/emst.hpp>

#include "commands.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace
{

using namespace emst;
using Clock = std::chrono::steady_clock;

struct Outcome
{
  bool pass = true;
  std::string detail;

  void fail(std::string const &why)
  {
    if (pass)
      detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string describe(DatasetSpec const &spec)
{
  static char const *const names[] = {"uniform", "normal", "blobs"};
  std::ostringstream out;
  out << names[int(spec.kind)] << " d=" << spec.d << " n=" << spec.n << " seed=" << spec.seed;
  return out.str();
}

bool weights_close(double a, double b)
{
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<DatasetSpec> correctness_matrix()
{
  std::vector<DatasetSpec> specs;
  for (auto kind : {DatasetKind::Uniform, DatasetKind::Normal, DatasetKind::ClusteredBlobs})
    for (int d : {2, 3})
      for (std::size_t n : {1u, 2u, 10u, 100u, 1000u, 2000u})
        for (std::uint64_t seed = 1; seed <= 5; ++seed)
          specs.push_back({kind, n, d, seed, 8, 0.05});
  return specs;
}

template <typename Body>
void for_each_dataset(std::vector<DatasetSpec> const &specs, Body &&body)
{
  for (auto const &spec : specs)
  {
    if (spec.d == 2)
      body(spec, generate<2>(spec));
    else
      body(spec, generate<3>(spec));
  }
}

// Exact Euclidean trees on the full matrix.
Outcome euclidean_matches_oracle()
{
  Outcome outcome;
  auto const start = Clock::now();
  std::size_t instances = 0;
  for_each_dataset(correctness_matrix(), [&](DatasetSpec const &spec, auto const &points) {
    auto const result = compute_mst(points);
    auto const reference = oracle::prim_mst(points, Metric::euclidean());
    ++instances;
    if (result.edges != reference.edges)
      outcome.fail("edge set differs on " + describe(spec));
    else if (!weights_close(result.total_weight, reference.total_weight))
      outcome.fail("total weight differs on " + describe(spec));
  });
  double const elapsed = seconds_since(start);
  if (elapsed > 60)
    outcome.fail("matrix took " + std::to_string(elapsed) + " s");
  if (outcome.pass)
    outcome.detail = std::to_string(instances) + " instances, " + std::to_string(elapsed) + " s";
  return outcome;
}

// Mutual-reachability trees against Prim over brute-force core distances,
// and the k_pts = 1 reduction to the Euclidean edge file.
Outcome mutual_reachability_matches_oracle()
{
  Outcome outcome;
  std::vector<DatasetSpec> specs;
  for (auto const &spec : correctness_matrix())
    if (spec.n <= 1000)
      specs.push_back(spec);
  std::size_t instances = 0;
  for_each_dataset(specs, [&](DatasetSpec const &spec, auto const &points) {
    for (int k : {2, 4, 16})
    {
      // Core distances need k_pts <= n.
      if (std::size_t(k) > spec.n)
        continue;
      auto const result = compute_mst(points, {MetricKind::MutualReachability, k, {}});
      auto const metric = Metric::mutual_reachability(oracle::brute_core_distances(points, k));
      auto const reference = oracle::prim_mst(points, metric);
      ++instances;
      if (result.edges != reference.edges || !weights_close(result.total_weight, reference.total_weight))
        outcome.fail("k_pts=" + std::to_string(k) + " differs on " + describe(spec));
    }
    auto const kpts1 = compute_mst(points, {MetricKind::MutualReachability, 1, {}});
    auto const euclid = compute_mst(points);
    if (edges_to_string(kpts1.edges) != edges_to_string(euclid.edges))
      outcome.fail("k_pts=1 edge file differs from Euclidean on " + describe(spec));
  });
  if (outcome.pass)
    outcome.detail = std::to_string(instances) + " instances";
  return outcome;
}

// At most ceil(log2 n) iterations with strictly shrinking component counts.
Outcome iteration_bound()
{
  Outcome outcome;
  int worst_slack = 1 << 30;
  auto check = [&](DatasetSpec const &spec, MstResult const &result) {
    int const bound = test::ceil_log2(spec.n);
    worst_slack = std::min(worst_slack, bound - result.iterations);
    if (result.iterations > bound)
      outcome.fail(std::to_string(result.iterations) + " iterations > " + std::to_string(bound) +
                   " on " + describe(spec));
    auto const &counts = result.component_counts;
    if (counts.size() != std::size_t(result.iterations) + 1 || counts.front() != spec.n ||
        counts.back() != 1)
      outcome.fail("component history malformed on " + describe(spec));
    for (std::size_t i = 1; i < counts.size(); ++i)
      if (counts[i] >= counts[i - 1])
        outcome.fail("component count did not drop on " + describe(spec));
  };
  for_each_dataset(correctness_matrix(), [&](DatasetSpec const &spec, auto const &points) {
    check(spec, compute_mst(points));
    if (spec.n >= 16)
      check(spec, compute_mst(points, {MetricKind::MutualReachability, 4, {}}));
  });
  if (outcome.pass)
    outcome.detail = "minimum slack " + std::to_string(worst_slack) + " iterations";
  return outcome;
}

// Toggling subtree skipping and Z-curve bounds never changes the output, and
// the default does strictly less leaf work than neither.
Outcome optimizations_are_transparent()
{
  Outcome outcome;
  int fewer = 0;
  constexpr int instances = 20;
  for (int i = 0; i < instances; ++i)
  {
    auto const kind = static_cast<DatasetKind>(i % 3);
    DatasetSpec const spec{kind, 1000, 2 + i % 2, std::uint64_t(100 + i), 8, 0.05};
    auto run = [&](bool skipping, bool bounds) {
      MstConfig config;
      config.options.subtree_skipping = skipping;
      config.options.upper_bounds = bounds;
      return spec.d == 2 ? compute_mst(generate<2>(spec), config) : compute_mst(generate<3>(spec), config);
    };
    auto const reference = run(true, true);
    auto const text = edges_to_string(reference.edges);
    for (auto [a, b] : {std::pair(true, false), std::pair(false, true), std::pair(false, false)})
      if (edges_to_string(run(a, b).edges) != text)
        outcome.fail("toggle changed the edge file on " + describe(spec));
    if (reference.leaf_distance_evaluations < run(false, false).leaf_distance_evaluations)
      ++fewer;
  }
  if (fewer < 18)
    outcome.fail("default did less leaf work on only " + std::to_string(fewer) + "/20 instances");
  if (outcome.pass)
    outcome.detail = "fewer leaf evaluations on " + std::to_string(fewer) + "/20";
  return outcome;
}

// Output independent of the worker count.
Outcome thread_determinism()
{
  Outcome outcome;
  for (int i = 0; i < 10; ++i)
  {
    DatasetSpec const spec{static_cast<DatasetKind>(i % 3), 10000, 2 + i % 2, std::uint64_t(200 + i), 8,
                           0.05};
    auto const points = generate(spec);
    std::string reference;
    for (int threads : {1, 2, 8})
    {
      MstConfig config{i % 2 ? MetricKind::MutualReachability : MetricKind::Euclidean, 4, {}};
      config.options.exec.threads = threads;
      auto const text = edges_to_string(
          std::visit([&](auto const &p) { return compute_mst(p, config); }, points).edges);
      if (threads == 1)
        reference = text;
      else if (text != reference)
        outcome.fail(std::to_string(threads) + " threads changed the output on " + describe(spec));
    }
  }
  if (outcome.pass)
    outcome.detail = "10 instances, threads 1/2/8";
  return outcome;
}

// Tree-based core distances equal brute-force k-NN.
Outcome core_distances_exact()
{
  Outcome outcome;
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    for (std::size_t n : {16u, 100u, 500u})
      for (auto kind : {DatasetKind::Uniform, DatasetKind::ClusteredBlobs})
      {
        DatasetSpec const spec{kind, n, 2 + int(seed % 2), seed, 8, 0.05};
        auto check = [&](auto const &points) {
          auto const bvh = build(points);
          for (int k : {1, 2, 4, 16})
          {
            ++checked;
            if (compute_core_distances(bvh, k).values != oracle::brute_core_distances(points, k).values)
              outcome.fail("k=" + std::to_string(k) + " differs on " + describe(spec));
          }
        };
        if (spec.d == 2)
          check(generate<2>(spec));
        else
          check(generate<3>(spec));
      }
  if (outcome.pass)
    outcome.detail = std::to_string(checked) + " (dataset, k) pairs";
  return outcome;
}

std::vector<PhaseTimings> scaling_timings;

// Uniform 2D: the 4M/1M median time ratio stays near linear.
Outcome scaling()
{
  Outcome outcome;
  auto const start = Clock::now();
  constexpr int repeats = 3;
  auto const large = generate<2>({DatasetKind::Uniform, 4000000, 2, 42});
  auto const small = sample(large, 1000000, 7);
  auto median_total = [&](PointSet<2> const &points) {
    std::vector<double> totals;
    for (int r = 0; r < repeats; ++r)
    {
      auto const result = compute_mst(points);
      scaling_timings.push_back(result.timings);
      totals.push_back(result.timings.total);
    }
    std::sort(totals.begin(), totals.end());
    return totals[repeats / 2];
  };
  double const t_small = median_total(small);
  double const t_large = median_total(large);
  double const ratio = t_large / t_small;
  double const elapsed = seconds_since(start);
  char buffer[160];
  std::snprintf(buffer, sizeof(buffer), "t(1M)=%.3f s, t(4M)=%.3f s, ratio=%.3f, wall %.1f s", t_small,
                t_large, ratio, elapsed);
  outcome.detail = buffer;
  if (!(ratio <= 6.0))
    outcome.fail(std::string("ratio above 6.0: ") + buffer);
  if (elapsed > 300)
    outcome.fail(std::string("over 5 minutes: ") + buffer);
  return outcome;
}

// Phase times add up to the measured total; the tree build is its own entry.
Outcome phase_accounting()
{
  Outcome outcome;
  auto timings = scaling_timings;
  for (std::uint64_t seed : {1u, 2u})
  {
    auto const points = generate<3>({DatasetKind::ClusteredBlobs, 200000, 3, seed, 8, 0.05});
    timings.push_back(compute_mst(points).timings);
    timings.push_back(compute_mst(points, {MetricKind::MutualReachability, 8, {}}).timings);
  }
  double worst = 0;
  for (auto const &t : timings)
  {
    double const gap = std::abs(t.total - t.phase_sum()) / t.total;
    worst = std::max(worst, gap);
    if (gap > 0.05)
      outcome.fail("phase sum off by " + std::to_string(100 * gap) + "%");
    if (!(t.tree > 0) || std::abs(t.boruvka() + t.tree + t.core_distances - t.phase_sum()) > 1e-12 * t.total)
      outcome.fail("tree time not reported apart from the Borůvka phases");
  }

  // The same check on the rows the bench command prints.
  for (auto const &metric : {cli::MetricOptions{"euclidean", 1}, cli::MetricOptions{"mrd", 8}})
  {
    cli::BenchCommand bench;
    bench.kind = "blobs";
    bench.d = 3;
    bench.samples = {50000, 200000};
    bench.metric = metric;
    std::ostringstream out, err;
    if (cli::cmd_bench(bench, out, err) != cli::exit_success)
    {
      outcome.fail("bench failed: " + err.str());
      continue;
    }
    std::istringstream rows(out.str());
    std::string line;
    std::getline(rows, line);
    std::vector<std::string> header;
    {
      std::istringstream fields(line);
      for (std::string f; std::getline(fields, f, '\t');)
        header.push_back(f);
    }
    auto column = [&](std::string const &name) {
      return std::size_t(std::find(header.begin(), header.end(), name) - header.begin());
    };
    if (column("t_tree") == header.size() || column("t_mst") == header.size())
      outcome.fail("bench header lacks separate t_tree and t_mst columns");
    while (std::getline(rows, line))
    {
      std::vector<double> values;
      std::istringstream fields(line);
      for (std::string f; std::getline(fields, f, '\t');)
        values.push_back(std::atof(f.c_str()));
      double const total = values[column("t_total")];
      double sum = 0;
      for (auto name : {"t_tree", "t_core", "t_reduce_labels", "t_upper_bounds", "t_find_edges", "t_merge"})
        sum += values[column(name)];
      double const gap = std::abs(total - sum) / total;
      worst = std::max(worst, gap);
      if (gap > 0.05)
        outcome.fail("bench row phase sum off by " + std::to_string(100 * gap) + "%");
      timings.emplace_back();
    }
  }
  if (outcome.pass)
    outcome.detail = std::to_string(timings.size()) + " runs and bench rows, worst gap " +
                     std::to_string(100 * worst) + "%";
  return outcome;
}

// Empty input, a single point, and fully coincident points.
Outcome edge_cases()
{
  Outcome outcome;
  try
  {
    compute_mst(PointSet<2>{});
    outcome.fail("n=0 did not raise");
  }
  catch (Error const &e)
  {
    if (e.code() != ErrorCode::EmptyDataset)
      outcome.fail("n=0 raised the wrong error");
  }
  for (auto kind : {MetricKind::Euclidean, MetricKind::MutualReachability})
  {
    auto const single = compute_mst(PointSet<3>{{{{1, 2, 3}}}}, {kind, 1, {}});
    if (!single.edges.empty() || single.total_weight != 0)
      outcome.fail("n=1 produced edges");

    PointSet<2> same(50, Point<2>{{0.3f, -0.7f}});
    auto const result = compute_mst(same, {kind, 4, {}});
    if (result.edges.size() != 49 || !test::is_spanning_tree(50, result.edges))
      outcome.fail("coincident points did not give a spanning tree");
    for (auto const &e : result.edges)
      if (e.weight != 0)
        outcome.fail("coincident points gave a non-zero edge");
    if (result.iterations > test::ceil_log2(50))
      outcome.fail("coincident points needed " + std::to_string(result.iterations) + " iterations");
  }
  if (outcome.pass)
    outcome.detail = "empty, single and coincident inputs";
  return outcome;
}

} // namespace

int main()
{
  struct Criterion
  {
    char const *name;
    Outcome (*run)();
  };
  Criterion const criteria[] = {
      {"euclidean-exact", euclidean_matches_oracle},
      {"mutual-reachability-exact", mutual_reachability_matches_oracle},
      {"iteration-bound", iteration_bound},
      {"optimizations-transparent", optimizations_are_transparent},
      {"thread-determinism", thread_determinism},
      {"core-distances-exact", core_distances_exact},
      {"near-linear-scaling", scaling},
      {"phase-accounting", phase_accounting},
      {"degenerate-inputs", edge_cases},
  };

  int failures = 0;
  int index = 0;
  for (auto const &criterion : criteria)
  {
    ++index;
    Outcome outcome;
    try
    {
      outcome = criterion.run();
    }
    catch (std::exception const &e)
    {
      outcome.fail(std::string("exception: ") + e.what());
    }
    failures += !outcome.pass;
    std::printf("%s  %d %-28s %s\n", outcome.pass ? "PASS" : "FAIL", index, criterion.name,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
