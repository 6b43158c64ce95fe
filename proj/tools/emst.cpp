#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{

void add_metric_flags(CLI::App *cmd, emst::cli::MetricOptions &metric)
{
  cmd->add_option("--metric", metric.metric, "Edge weights: euclidean or mrd (mutual reachability)")
      ->check(CLI::IsMember({"euclidean", "mrd"}));
  cmd->add_option("--k-pts", metric.k_pts, "Neighbour count for core distances (mrd only)")
      ->check(CLI::PositiveNumber);
}

void add_engine_flags(CLI::App *cmd, emst::cli::EngineOptions &engine)
{
  cmd->add_option("--threads", engine.threads, "Worker threads, 0 = all available")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--no-opt1", engine.no_opt1, "Disable subtree skipping");
  cmd->add_flag("--no-opt2", engine.no_opt2, "Disable Z-curve upper bounds");
}

void add_input(CLI::App *cmd, emst::cli::InputOptions &input)
{
  cmd->add_option("input", input.path, "Point file, '-' for stdin")->required();
  cmd->add_option("--format", input.format, "Input format: auto, csv or bin")
      ->check(CLI::IsMember({"auto", "csv", "bin"}));
}

} // namespace

int main(int argc, char **argv)
{
  using namespace emst::cli;

  CLI::App app{"Euclidean and mutual-reachability minimum spanning trees"};
  app.require_subcommand(1);

  MstCommand mst;
  auto *mst_cmd = app.add_subcommand("mst", "Compute the minimum spanning tree of a point file");
  add_input(mst_cmd, mst.input);
  add_metric_flags(mst_cmd, mst.metric);
  add_engine_flags(mst_cmd, mst.engine);
  mst_cmd->add_option("--out", mst.out, "Edge file (default: stdout, summary then goes to stderr)");

  VerifyCommand verify;
  auto *verify_cmd = app.add_subcommand("verify", "Compare against the brute-force Prim oracle");
  add_input(verify_cmd, verify.input);
  add_metric_flags(verify_cmd, verify.metric);
  add_engine_flags(verify_cmd, verify.engine);
  verify_cmd->add_option("--edges", verify.edges, "Check this edge file instead of running the engine");
  verify_cmd->add_option("--cap", verify.cap, "Largest n the oracle accepts");

  BenchCommand bench;
  auto *bench_cmd = app.add_subcommand("bench", "Time the pipeline and report features per second");
  bench_cmd->add_option("--input", bench.input, "Point file to sample from");
  bench_cmd->add_option("--kind", bench.kind, "Generated dataset: uniform, normal or blobs")
      ->check(CLI::IsMember({"uniform", "normal", "blobs"}));
  bench_cmd->add_option("--n", bench.n, "Generated dataset size (when --samples is absent)");
  bench_cmd->add_option("--d", bench.d, "Dimension")->check(CLI::IsMember({2, 3}));
  bench_cmd->add_option("--seed", bench.seed, "Generator seed");
  bench_cmd->add_option("--blobs", bench.blobs, "Blob count");
  bench_cmd->add_option("--spread", bench.spread, "Blob standard deviation");
  bench_cmd->add_option("--samples", bench.samples, "Sample sizes")->delimiter(',');
  bench_cmd->add_option("--repeats", bench.repeats, "Runs per sample; medians are reported")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--sample-seed", bench.sample_seed, "Seed for subsampling");
  add_metric_flags(bench_cmd, bench.metric);
  add_engine_flags(bench_cmd, bench.engine);

  GenerateCommand generate;
  auto *generate_cmd = app.add_subcommand("generate", "Write a seeded synthetic dataset");
  generate_cmd->add_option("--kind", generate.kind, "uniform, normal or blobs")
      ->check(CLI::IsMember({"uniform", "normal", "blobs"}));
  generate_cmd->add_option("--n", generate.n, "Number of points")->check(CLI::PositiveNumber);
  generate_cmd->add_option("--d", generate.d, "Dimension")->check(CLI::IsMember({2, 3}));
  generate_cmd->add_option("--seed", generate.seed, "Generator seed");
  generate_cmd->add_option("--blobs", generate.blobs, "Blob count");
  generate_cmd->add_option("--spread", generate.spread, "Blob standard deviation");
  generate_cmd->add_option("--out", generate.out, "Output path (default: stdout)");
  generate_cmd->add_option("--format", generate.format, "csv or bin")
      ->check(CLI::IsMember({"csv", "bin"}));

  try
  {
    app.parse(argc, argv);
  }
  catch (CLI::ParseError const &e)
  {
    auto const code = app.exit(e);
    return code == 0 ? exit_success : exit_usage;
  }

  if (*mst_cmd)
    return cmd_mst(mst, std::cout, std::cerr);
  if (*verify_cmd)
    return cmd_verify(verify, std::cout, std::cerr);
  if (*bench_cmd)
    return cmd_bench(bench, std::cout, std::cerr);
  return cmd_generate(generate, std::cout, std::cerr);
}
