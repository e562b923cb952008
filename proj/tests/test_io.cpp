#include "tcone/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tcone;

namespace {

std::string temp_path(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("tcone_io_" + name);
  std::filesystem::remove(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Descriptor, NameAndFingerprintRoundTrip) {
  const std::vector<MetricDescriptor> all{
      MetricDescriptor::euclidean(),
      MetricDescriptor::inverse_radial(0.3),
      MetricDescriptor::affine(1.0, 0.1),
      MetricDescriptor::potential_st(0.0, kInf, 1.0, 2.0),
      MetricDescriptor::potential_st(1.0 / 3.0, 2.5, 0.7, 1.5),
      MetricDescriptor::potential_union({{1, 2}, {4, 8}}, 1.0, 3.0),
      MetricDescriptor::rescaled_lattice(make_lattice(2.0, KSequence::geometric(1.0, 10.0)), {1e-4, 1.0}),
      MetricDescriptor::rescaled_lattice(make_lattice(2.0, KSequence::explicit_list({0, 3, 7})), {0.1, 2.0}),
  };
  for (const auto& d : all) {
    EXPECT_EQ(parse_descriptor(d.fingerprint()).fingerprint(), d.fingerprint());
    EXPECT_EQ(parse_descriptor(d.name()).name(), d.name());
  }
}

TEST(Descriptor, MalformedTextIsInvalidArgument) {
  for (const char* bad : {"", "st:1:2:3", "cone:1", "st:a:2:1:2", "union:2:1:1,2,3", "lattice:2:1:1:spiral,1"})
    EXPECT_THROW(parse_descriptor(bad), std::invalid_argument) << bad;
}

TEST(Descriptor, OutOfDomainParametersAreDomainErrors) {
  EXPECT_THROW(parse_descriptor("st:0:inf:1:0.5"), std::domain_error);
  EXPECT_THROW(parse_descriptor("st:2:1:1:2"), std::domain_error);
}

TEST(Csv, HeaderAndLfRows) {
  const auto path = temp_path("csv.csv");
  {
    CsvWriter w(path, {"a", "b"});
    w.row({"1", "2"});
    EXPECT_THROW(w.row({"1"}), std::logic_error);
    EXPECT_THROW(w.row({"1", "x,y"}), std::logic_error);
  }
  EXPECT_EQ(slurp(path), "a,b\n1,2\n");
}

TEST(Cache, HitsAreBitIdenticalToRecomputation) {
  const auto path = temp_path("cache.tsv");
  const auto d = MetricDescriptor::inverse_radial(1.0);
  const Point3 x{1, 0, 0}, y{0, 1, 0};
  const SolverConfig cfg;
  DistanceResult first;
  {
    DistanceCache c(path);
    first = cached_distance(&c, d, x, y, cfg);
    EXPECT_EQ(c.size(), 1u);
  }
  DistanceCache reloaded(path);
  const auto hit = reloaded.get(DistanceCache::key(d, x, y, cfg));
  ASSERT_TRUE(hit.has_value());
  const auto fresh = distance(d, x, y, cfg);
  EXPECT_EQ(hit->value, fresh.value);
  EXPECT_EQ(hit->lower_bound, fresh.lower_bound);
  EXPECT_EQ(hit->upper_bound, fresh.upper_bound);
  EXPECT_EQ(first.value, fresh.value);
}

TEST(Cache, KeyCoversEveryParameter) {
  const Point3 x{1, 0, 0}, y{0, 1, 0};
  SolverConfig cfg, finer;
  finer.grid_resolution = 0.05;
  const auto a = MetricDescriptor::potential_st(1.0, 2.0, 1.0, 2.0);
  const auto b = MetricDescriptor::potential_st(1.0, 2.0 + 1e-15, 1.0, 2.0);
  EXPECT_NE(DistanceCache::key(a, x, y, cfg), DistanceCache::key(b, x, y, cfg));
  EXPECT_NE(DistanceCache::key(a, x, y, cfg), DistanceCache::key(a, x, y, finer));
  EXPECT_NE(DistanceCache::key(a, x, y, cfg), DistanceCache::key(a, y, x, cfg));
}

TEST(Cache, CorruptRecordsAreIgnored) {
  const auto path = temp_path("corrupt.tsv");
  const auto d = MetricDescriptor::euclidean();
  {
    DistanceCache c(path);
    cached_distance(&c, d, {0, 0, 0}, {3, 4, 0}, {});
    cached_distance(&c, d, {0, 0, 0}, {1, 0, 0}, {});
  }
  std::string text = slurp(path);
  text[text.find('\t') + 3] ^= 1;  // damage the first record's value
  std::ofstream(path, std::ios::binary | std::ios::trunc) << text << "truncated line\n";
  DistanceCache c(path);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.rejected_records(), 2u);
  EXPECT_NEAR(cached_distance(&c, d, {0, 0, 0}, {3, 4, 0}, {}).value, 5.0, 1e-9);
}
