#ifndef EMST_TOOLS_COMMANDS_HPP
#define EMST_TOOLS_COMMANDS_HPP

#include <emst/emst.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace emst::cli
{

enum ExitCode : int
{
  exit_success = 0,
  exit_verification_failed = 1,
  exit_usage = 2,
  exit_io = 3,
};

inline int exit_code_for(ErrorCode code) noexcept
{
  switch (code)
  {
  case ErrorCode::IoError:
  case ErrorCode::ParseError:
  case ErrorCode::EmptyDataset:
  case ErrorCode::InvalidCoordinate:
  case ErrorCode::UnsupportedDimension:
    return exit_io;
  case ErrorCode::InternalInvariantViolation:
  case ErrorCode::NothingToFind:
  case ErrorCode::NoOutgoingEdge:
    return exit_verification_failed;
  default:
    return exit_usage;
  }
}

/// Floats in reports: 9 significant digits.
inline std::string format_real(double value)
{
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

struct InputOptions
{
  std::string path = "-";
  std::string format = "auto";
};

struct MetricOptions
{
  std::string metric = "euclidean";
  int k_pts = 1;
};

struct EngineOptions
{
  int threads = 0;
  bool no_opt1 = false;
  bool no_opt2 = false;
};

struct MstCommand
{
  InputOptions input;
  MetricOptions metric;
  EngineOptions engine;
  std::string out;
};

struct VerifyCommand
{
  InputOptions input;
  MetricOptions metric;
  EngineOptions engine;
  std::string edges;
  std::size_t cap = oracle::default_cap;
};

struct BenchCommand
{
  std::string input;
  std::string kind = "uniform";
  std::size_t n = 100000;
  int d = 2;
  std::uint64_t seed = 0;
  int blobs = 8;
  double spread = 0.05;
  std::vector<std::size_t> samples;
  int repeats = 3;
  std::uint64_t sample_seed = 0;
  MetricOptions metric;
  EngineOptions engine;
};

struct GenerateCommand
{
  std::string kind = "uniform";
  std::size_t n = 1000;
  int d = 2;
  std::uint64_t seed = 0;
  int blobs = 8;
  double spread = 0.05;
  std::string out;
  std::string format = "csv";
};

inline DatasetKind parse_kind(std::string const &kind)
{
  if (kind == "uniform")
    return DatasetKind::Uniform;
  if (kind == "normal")
    return DatasetKind::Normal;
  if (kind == "blobs")
    return DatasetKind::ClusteredBlobs;
  throw Error(ErrorCode::InvalidParameter, "unknown dataset kind '" + kind + "'");
}

inline FileFormat parse_format(std::string const &format)
{
  if (format == "csv")
    return FileFormat::Csv;
  if (format == "bin")
    return FileFormat::Binary;
  throw Error(ErrorCode::InvalidParameter, "unknown format '" + format + "'");
}

inline AnyPointSet load(InputOptions const &input)
{
  if (input.path == "-")
  {
    if (input.format == "bin")
      return read_binary(std::cin);
    return input.format == "csv" ? read_csv(std::cin) : read_points(std::cin);
  }
  if (input.format == "auto")
    return read_points(input.path);
  return read_points(input.path, parse_format(input.format));
}

inline MstConfig make_config(MetricOptions const &metric, EngineOptions const &engine)
{
  MstConfig config;
  if (metric.metric == "mrd")
    config.metric = MetricKind::MutualReachability;
  else if (metric.metric != "euclidean")
    throw Error(ErrorCode::InvalidParameter, "unknown metric '" + metric.metric + "'");
  if (metric.k_pts < 1)
    throw Error(ErrorCode::InvalidParameter, "--k-pts must be at least 1");
  config.k_pts = metric.k_pts;
  config.options.subtree_skipping = !engine.no_opt1;
  config.options.upper_bounds = !engine.no_opt2;
  if (engine.threads < 0)
    throw Error(ErrorCode::InvalidParameter, "--threads must be non-negative");
  config.options.exec.threads = engine.threads;
  return config;
}

inline MstResult run_engine(AnyPointSet const &points, MstConfig const &config)
{
  return std::visit([&](auto const &p) { return compute_mst(p, config); }, points);
}

template <typename Body>
int guarded(std::ostream &err, Body &&body)
{
  try
  {
    return body();
  }
  catch (Error const &e)
  {
    err << "emst: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
  catch (std::exception const &e)
  {
    err << "emst: " << e.what() << '\n';
    return exit_io;
  }
}

inline int cmd_mst(MstCommand const &cmd, std::ostream &out, std::ostream &err)
{
  return guarded(err, [&] {
    auto const config = make_config(cmd.metric, cmd.engine);
    auto const points = load(cmd.input);
    auto const result = run_engine(points, config);

    std::ostream *summary = &out;
    if (cmd.out.empty())
    {
      write_edges(out, result.edges);
      summary = &err;
    }
    else
    {
      std::ofstream file(cmd.out, std::ios::binary);
      if (!file)
        throw Error(ErrorCode::IoError, "cannot open " + cmd.out + " for writing");
      write_edges(file, result.edges);
      if (!file)
        throw Error(ErrorCode::IoError, "failed writing " + cmd.out);
    }

    *summary << "n\td\tmetric\tk_pts\tedges\ttotal_weight\titerations\tthreads\tt_total\n"
             << size(points) << '\t' << dimension(points) << '\t' << cmd.metric.metric << '\t'
             << config.k_pts << '\t' << result.edges.size() << '\t'
             << format_real(result.total_weight) << '\t' << result.iterations << '\t'
             << config.options.exec.concurrency() << '\t' << format_real(result.timings.total)
             << '\n';
    return static_cast<int>(exit_success);
  });
}

/// Differences between two edge lists compared as sets of (u, v) pairs, plus
/// shared pairs whose weights differ beyond a 1e-9 relative tolerance.
struct EdgeDiff
{
  std::vector<WeightedEdge> missing;
  std::vector<WeightedEdge> unexpected;
  std::vector<std::pair<WeightedEdge, WeightedEdge>> reweighted;

  std::size_t count() const noexcept
  {
    return missing.size() + unexpected.size() + reweighted.size();
  }
};

inline EdgeDiff diff_edges(std::vector<WeightedEdge> const &expected,
                           std::vector<WeightedEdge> const &actual)
{
  auto by_pair = [](WeightedEdge const &a, WeightedEdge const &b) {
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  };
  auto lhs = expected;
  auto rhs = actual;
  std::sort(lhs.begin(), lhs.end(), by_pair);
  std::sort(rhs.begin(), rhs.end(), by_pair);

  EdgeDiff diff;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < lhs.size() || j < rhs.size())
  {
    if (j == rhs.size() || (i < lhs.size() && by_pair(lhs[i], rhs[j])))
      diff.missing.push_back(lhs[i++]);
    else if (i == lhs.size() || by_pair(rhs[j], lhs[i]))
      diff.unexpected.push_back(rhs[j++]);
    else
    {
      double const scale = std::max({1.0, std::abs(lhs[i].weight), std::abs(rhs[j].weight)});
      if (std::abs(lhs[i].weight - rhs[j].weight) > 1e-9 * scale)
        diff.reweighted.emplace_back(lhs[i], rhs[j]);
      ++i;
      ++j;
    }
  }
  return diff;
}

inline int cmd_verify(VerifyCommand const &cmd, std::ostream &out, std::ostream &err)
{
  return guarded(err, [&] {
    auto const config = make_config(cmd.metric, cmd.engine);
    auto const points = load(cmd.input);
    auto const n = size(points);
    if (n > cmd.cap)
    {
      err << "emst: verify needs n <= " << cmd.cap << " for the O(n^2) oracle, got " << n << '\n';
      return static_cast<int>(exit_usage);
    }

    auto const reference = std::visit(
        [&](auto const &p) {
          auto metric = Metric::euclidean();
          if (config.metric == MetricKind::MutualReachability)
          {
            if (config.k_pts > static_cast<int>(p.size()))
              throw Error(ErrorCode::InvalidParameter, "--k-pts exceeds the number of points");
            metric = Metric::mutual_reachability(oracle::brute_core_distances(p, config.k_pts));
          }
          return oracle::prim_mst(p, metric, cmd.cap);
        },
        points);

    std::vector<WeightedEdge> candidate;
    if (!cmd.edges.empty())
    {
      std::ifstream file(cmd.edges);
      if (!file)
        throw Error(ErrorCode::IoError, "cannot open " + cmd.edges);
      candidate = read_edges(file);
    }
    else
      candidate = run_engine(points, config).edges;

    auto const diff = diff_edges(reference.edges, candidate);
    for (auto const &e : diff.missing)
      out << "missing\t" << e.u << ',' << e.v << ',' << format_real(e.weight) << '\n';
    for (auto const &e : diff.unexpected)
      out << "unexpected\t" << e.u << ',' << e.v << ',' << format_real(e.weight) << '\n';
    for (auto const &[want, got] : diff.reweighted)
      out << "weight\t" << want.u << ',' << want.v << '\t' << format_real(want.weight) << " != "
          << format_real(got.weight) << '\n';

    if (diff.count() == 0)
    {
      out << "PASS\tn=" << n << "\tedges=" << candidate.size() << '\n';
      return static_cast<int>(exit_success);
    }
    out << "FAIL\tn=" << n << "\tdifferences=" << diff.count() << '\n';
    return static_cast<int>(exit_verification_failed);
  });
}

struct BenchRow
{
  std::string dataset;
  std::size_t n = 0;
  int d = 0;
  int threads = 0;
  std::string metric;
  int k_pts = 1;
  int iterations = 0;
  PhaseTimings timings;
  double t_mst = 0;

  /// Features processed per second, n*d/t.
  double rate() const noexcept { return double(n) * d / timings.total; }
};

inline double median(std::vector<double> values)
{
  std::sort(values.begin(), values.end());
  auto const mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

inline std::string bench_header()
{
  return "dataset\tn\td\tthreads\tmetric\tk_pts\titerations\tt_tree\tt_core\tt_reduce_labels\t"
         "t_upper_bounds\tt_find_edges\tt_merge\tt_mst\tt_total\trate\tratio";
}

inline std::string format_row(BenchRow const &row, std::optional<double> ratio)
{
  std::ostringstream line;
  auto const &t = row.timings;
  line << row.dataset << '\t' << row.n << '\t' << row.d << '\t' << row.threads << '\t'
       << row.metric << '\t' << row.k_pts << '\t' << row.iterations << '\t' << format_real(t.tree)
       << '\t' << format_real(t.core_distances) << '\t' << format_real(t.reduce_labels) << '\t'
       << format_real(t.upper_bounds) << '\t' << format_real(t.find_edges) << '\t'
       << format_real(t.merge) << '\t' << format_real(row.t_mst) << '\t' << format_real(t.total)
       << '\t' << format_real(row.rate()) << '\t' << (ratio ? format_real(*ratio) : "-");
  return line.str();
}

/// Runs the pipeline `repeats` times on one sample and keeps the median of
/// every timing column independently.
inline BenchRow bench_once(AnyPointSet const &points, MstConfig const &config, int repeats)
{
  std::vector<PhaseTimings> runs;
  int iterations = 0;
  for (int r = 0; r < repeats; ++r)
  {
    auto const result = run_engine(points, config);
    runs.push_back(result.timings);
    iterations = result.iterations;
  }
  auto column = [&](double PhaseTimings::*field) {
    std::vector<double> values;
    for (auto const &t : runs)
      values.push_back(t.*field);
    return median(values);
  };
  BenchRow row;
  row.n = size(points);
  row.d = dimension(points);
  row.threads = config.options.exec.concurrency();
  row.k_pts = config.k_pts;
  row.iterations = iterations;
  row.timings.tree = column(&PhaseTimings::tree);
  row.timings.core_distances = column(&PhaseTimings::core_distances);
  row.timings.reduce_labels = column(&PhaseTimings::reduce_labels);
  row.timings.upper_bounds = column(&PhaseTimings::upper_bounds);
  row.timings.find_edges = column(&PhaseTimings::find_edges);
  row.timings.merge = column(&PhaseTimings::merge);
  row.timings.total = column(&PhaseTimings::total);
  std::vector<double> boruvka;
  for (auto const &t : runs)
    boruvka.push_back(t.boruvka());
  row.t_mst = median(boruvka);
  return row;
}

inline int cmd_bench(BenchCommand const &cmd, std::ostream &out, std::ostream &err)
{
  return guarded(err, [&] {
    auto const config = make_config(cmd.metric, cmd.engine);
    if (cmd.repeats < 1)
      throw Error(ErrorCode::InvalidParameter, "--repeats must be at least 1");

    std::string dataset;
    AnyPointSet source;
    auto samples = cmd.samples;
    if (!cmd.input.empty())
    {
      source = load({cmd.input, "auto"});
      dataset = cmd.input;
    }
    else
    {
      auto const largest = samples.empty() ? cmd.n : *std::max_element(samples.begin(), samples.end());
      source = generate({parse_kind(cmd.kind), largest, cmd.d, cmd.seed, cmd.blobs, cmd.spread});
      dataset = cmd.kind + std::to_string(cmd.d) + "d-seed" + std::to_string(cmd.seed);
    }
    if (samples.empty())
      samples.push_back(size(source));
    for (auto m : samples)
      if (m < 1 || m > size(source))
        throw Error(ErrorCode::InvalidParameter,
                    "sample size " + std::to_string(m) + " outside [1, " +
                        std::to_string(size(source)) + "]");

    out << bench_header() << '\n';
    std::optional<double> previous;
    for (auto m : samples)
    {
      auto const points = m == size(source) ? source : sample(source, m, cmd.sample_seed);
      auto row = bench_once(points, config, cmd.repeats);
      row.dataset = dataset;
      row.metric = cmd.metric.metric;
      std::optional<double> ratio;
      if (previous)
        ratio = row.timings.total / *previous;
      out << format_row(row, ratio) << '\n';
      previous = row.timings.total;
    }
    return static_cast<int>(exit_success);
  });
}

inline int cmd_generate(GenerateCommand const &cmd, std::ostream &out, std::ostream &err)
{
  return guarded(err, [&] {
    auto const format = parse_format(cmd.format);
    auto const points =
        generate({parse_kind(cmd.kind), cmd.n, cmd.d, cmd.seed, cmd.blobs, cmd.spread});
    if (cmd.out.empty() || cmd.out == "-")
      write_points(out, points, format);
    else
      write_points(cmd.out, points, format);
    return static_cast<int>(exit_success);
  });
}

} // namespace emst::cli

#endif
