#include <emst/data.hpp>

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

namespace
{

using namespace emst;

template <typename F>
Error error_of(F &&f)
{
  try
  {
    f();
  }
  catch (Error const &e)
  {
    return e;
  }
  ADD_FAILURE() << "no error raised";
  return Error(ErrorCode::InternalInvariantViolation, "none");
}

template <int Dim>
std::string binary_bytes(PointSet<Dim> const &points)
{
  std::ostringstream out;
  write_binary(out, std::span<Point<Dim> const>(points));
  return out.str();
}

TEST(Engine, StandardSequence)
{
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  random::Engine engine(5489u);
  engine.discard(9999);
  EXPECT_EQ(engine(), 9981545732273789042ull);
}

TEST(Engine, Transforms)
{
  random::Engine engine(3);
  for (int i = 0; i < 10000; ++i)
  {
    double const u = random::uniform01(engine);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(random::uniform_below(engine, 7), 7u);
  }
  random::Engine a(9), b(9);
  EXPECT_EQ(random::uniform01(a), static_cast<double>(b() >> 11) * 0x1.0p-53);
}

TEST(Generate, UniformStaysInTheCube)
{
  auto const points = generate<3>({DatasetKind::Uniform, 10000, 3, 4});
  for (auto const &p : points)
    for (int k = 0; k < 3; ++k)
    {
      ASSERT_GE(p[k], -0.5f);
      ASSERT_LE(p[k], 0.5f);
    }
}

TEST(Generate, SameSeedSameBytes)
{
  for (auto kind : {DatasetKind::Uniform, DatasetKind::Normal, DatasetKind::ClusteredBlobs})
  {
    auto const a = generate<2>({kind, 1000, 2, 17});
    auto const b = generate<2>({kind, 1000, 2, 17});
    auto const c = generate<2>({kind, 1000, 2, 18});
    EXPECT_EQ(binary_bytes(a), binary_bytes(b));
    EXPECT_NE(binary_bytes(a), binary_bytes(c));
  }
}

TEST(Generate, NormalMoments)
{
  auto const points = generate<3>({DatasetKind::Normal, 100000, 3, 1});
  for (int k = 0; k < 3; ++k)
  {
    double sum = 0, sum_sq = 0;
    for (auto const &p : points)
    {
      sum += p[k];
      sum_sq += double(p[k]) * p[k];
    }
    double const mean = sum / points.size();
    double const sd = std::sqrt(sum_sq / points.size() - mean * mean);
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(sd, 1.0, 0.02);
  }
}

TEST(Generate, BlobsClusterAroundTheirCentres)
{
  DatasetSpec spec{DatasetKind::ClusteredBlobs, 8000, 2, 6, 8, 0.01};
  auto const points = generate<2>(spec);
  // Centres are drawn first with the same engine.
  random::Engine engine(spec.seed);
  std::vector<std::array<double, 2>> centres(8);
  for (auto &c : centres)
    for (auto &x : c)
      x = random::uniform01(engine) - 0.5;
  for (std::size_t i = 0; i < points.size(); ++i)
  {
    auto const &c = centres[i % 8];
    double const dx = points[i][0] - c[0], dy = points[i][1] - c[1];
    ASSERT_LT(std::sqrt(dx * dx + dy * dy), 0.01 * 7);
  }
}

TEST(Generate, RejectsBadSpecs)
{
  EXPECT_EQ(error_of([] { generate({DatasetKind::Uniform, 0, 2, 1}); }).code(),
            ErrorCode::InvalidParameter);
  EXPECT_EQ(error_of([] { generate({DatasetKind::Uniform, 5, 4, 1}); }).code(),
            ErrorCode::UnsupportedDimension);
  EXPECT_EQ(error_of([] { generate({DatasetKind::ClusteredBlobs, 5, 2, 1, 0}); }).code(),
            ErrorCode::InvalidParameter);
  auto const any = generate({DatasetKind::Normal, 5, 3, 1});
  EXPECT_EQ(dimension(any), 3);
  EXPECT_EQ(size(any), 5u);
}

TEST(Sample, FullSampleIsAPermutation)
{
  auto const points = generate<2>({DatasetKind::Uniform, 500, 2, 2});
  auto const all = sample(points, points.size(), 4);
  auto key = [](Point<2> const &p) { return std::pair(p[0], p[1]); };
  std::multiset<std::pair<float, float>> a, b;
  for (auto const &p : points)
    a.insert(key(p));
  for (auto const &p : all)
    b.insert(key(p));
  EXPECT_EQ(a, b);
}

TEST(Sample, SubsetWithoutRepeats)
{
  PointSet<2> points(1000);
  for (std::size_t i = 0; i < points.size(); ++i)
    points[i] = Point<2>{{float(i), 0}};
  auto const one = sample(points, 1, 3);
  ASSERT_EQ(one.size(), 1u);

  auto const half = sample(points, 500, 3);
  std::set<float> seen;
  for (auto const &p : half)
  {
    EXPECT_EQ(p[0], std::floor(p[0]));
    EXPECT_LT(p[0], 1000.0f);
    seen.insert(p[0]);
  }
  EXPECT_EQ(seen.size(), 500u);
  EXPECT_EQ(binary_bytes(half), binary_bytes(sample(points, 500, 3)));
  EXPECT_EQ(error_of([&] { sample(points, 1001, 3); }).code(), ErrorCode::InvalidParameter);
}

TEST(Csv, ReadsTwoPoints)
{
  std::istringstream in("0,0\n3,4\n");
  auto const any = read_csv(in);
  ASSERT_EQ(dimension(any), 2);
  auto const &points = std::get<PointSet<2>>(any);
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[1], (Point<2>{{3, 4}}));
}

TEST(Csv, ToleratesBlankLinesAndSpaces)
{
  std::istringstream in("\n 1.5 , -2,+3\r\n\n4e-1,5,6\n");
  auto const points = std::get<PointSet<3>>(read_csv(in));
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0], (Point<3>{{1.5f, -2, 3}}));
  EXPECT_EQ(points[1][0], 0.4f);
}

TEST(Csv, ErrorsCarryLineNumbers)
{
  std::istringstream bad("0,0\n1,x\n");
  auto const e = error_of([&] { read_csv(bad); });
  EXPECT_EQ(e.code(), ErrorCode::ParseError);
  EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);

  std::istringstream ragged("0,0\n\n1,2,3\n");
  auto const r = error_of([&] { read_csv(ragged); });
  EXPECT_EQ(r.code(), ErrorCode::ParseError);
  EXPECT_NE(std::string(r.what()).find("line 3"), std::string::npos);

  std::istringstream four("1,2,3,4\n");
  EXPECT_EQ(error_of([&] { read_csv(four); }).code(), ErrorCode::UnsupportedDimension);
  std::istringstream empty("\n\n");
  EXPECT_EQ(error_of([&] { read_csv(empty); }).code(), ErrorCode::EmptyDataset);
  std::istringstream nan("nan,1\n");
  EXPECT_EQ(error_of([&] { read_csv(nan); }).code(), ErrorCode::InvalidCoordinate);
}

TEST(Csv, RoundTripIsExact)
{
  auto const points = generate<3>({DatasetKind::Normal, 2000, 3, 8});
  std::stringstream buffer;
  write_csv(buffer, std::span<Point<3> const>(points));
  EXPECT_EQ(std::get<PointSet<3>>(read_csv(buffer)), points);
}

TEST(Binary, ThreePoints)
{
  PointSet<3> points{{{1, 2, 3}}, {{-1, 0.5f, 0}}, {{7, 7, 7}}};
  auto const bytes = binary_bytes(points);
  EXPECT_EQ(bytes.size(), 20u + 3 * 3 * 4);
  EXPECT_EQ(bytes.substr(0, 4), "EMST");
  std::istringstream in(bytes);
  EXPECT_EQ(std::get<PointSet<3>>(read_binary(in)), points);
}

TEST(Binary, LargeRoundTripIsByteIdentical)
{
  auto const points = generate<2>({DatasetKind::ClusteredBlobs, 10000, 2, 3});
  auto const bytes = binary_bytes(points);
  std::istringstream in(bytes);
  auto const back = std::get<PointSet<2>>(read_points(in));
  EXPECT_EQ(binary_bytes(back), bytes);
}

TEST(Binary, DoublePrecisionPayload)
{
  std::ostringstream out;
  out.write("EMST", 4);
  for (std::uint32_t v : {1u, 2u, 2u, 8u})
    detail::put_le(out, v);
  for (double v : {0.25, -1.0, 3.0, 1e-3})
    detail::put_le(out, v);
  std::istringstream in(out.str());
  auto const points = std::get<PointSet<2>>(read_points(in));
  EXPECT_EQ(points, (PointSet<2>{{{0.25f, -1}}, {{3, 1e-3f}}}));
}

TEST(Binary, MalformedHeaders)
{
  auto header = [](std::uint32_t version, std::uint32_t n, std::uint32_t d, std::uint32_t prec) {
    std::ostringstream out;
    out.write("EMST", 4);
    for (auto v : {version, n, d, prec})
      detail::put_le(out, v);
    return out.str();
  };
  auto code_for = [](std::string const &bytes) {
    std::istringstream in(bytes);
    return error_of([&] { read_binary(in); }).code();
  };
  EXPECT_EQ(code_for(header(2, 0, 2, 4)), ErrorCode::ParseError);
  EXPECT_EQ(code_for(header(1, 1, 5, 4)), ErrorCode::UnsupportedDimension);
  EXPECT_EQ(code_for(header(1, 1, 2, 2)), ErrorCode::ParseError);
  EXPECT_EQ(code_for(header(1, 2, 2, 4) + std::string(8, '\0')), ErrorCode::ParseError);
  EXPECT_EQ(code_for(header(1, 1, 2, 4) + std::string(12, '\0')), ErrorCode::ParseError);
  EXPECT_EQ(code_for("EMS"), ErrorCode::ParseError);
}

TEST(Files, MissingPathIsAnIoError)
{
  EXPECT_EQ(error_of([] { read_points("/nonexistent/points.csv"); }).code(), ErrorCode::IoError);
}

TEST(Edges, WrittenInTotalOrderAndReadBack)
{
  std::vector<WeightedEdge> edges{{2, 3, 0.5}, {0, 1, 0.5}, {0, 2, 0.1}, {1, 4, 1.0 / 3}};
  auto const text = edges_to_string(edges);
  EXPECT_EQ(text, "0,2,0.1\n1,4,0.3333333333333333\n0,1,0.5\n2,3,0.5\n");
  std::istringstream in(text);
  auto back = read_edges(in);
  std::sort(edges.begin(), edges.end());
  EXPECT_EQ(back, edges);

  std::istringstream loop("1,1,0.5\n");
  EXPECT_EQ(error_of([&] { read_edges(loop); }).code(), ErrorCode::ParseError);
  std::istringstream swapped("4,1,2\n");
  EXPECT_EQ(read_edges(swapped), (std::vector<WeightedEdge>{{1, 4, 2.0}}));
}

} // namespace
