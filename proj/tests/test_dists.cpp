#include <chernoff_sbm/dists.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"

using namespace chernoff_sbm;

TEST(ValidatePair, IdenticalSingleCoordinateIsLegal) {
  const auto pair = validate_pair({0.5}, {0.5});
  EXPECT_EQ(pair.size(), 1u);
  EXPECT_TRUE(pair.degenerate());
}

TEST(ValidatePair, LengthMismatch) {
  try {
    validate_pair({0.5, 0.5}, {0.5});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LengthMismatch);
  }
}

TEST(ValidatePair, BoundaryProbabilitiesRejected) {
  for (double bad : {0.0, 1.0, -0.1, 1.5, std::nan("")}) {
    try {
      validate_pair({bad}, {0.5});
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::OutOfRange);
    }
  }
  EXPECT_THROW(validate_pair({}, {}), Error);
}

TEST(Group, MergesByFirstOccurrence) {
  const auto g = group(validate_pair({0.55, 0.55, 0.45}, {0.45, 0.45, 0.55}));
  ASSERT_EQ(g.groups().size(), 2u);
  EXPECT_EQ(g.groups()[0], (Group{0.55, 0.45, 2}));
  EXPECT_EQ(g.groups()[1], (Group{0.45, 0.55, 1}));

  const auto single = group(validate_pair({0.3, 0.3}, {0.7, 0.7}));
  ASSERT_EQ(single.groups().size(), 1u);
  EXPECT_EQ(single.groups()[0], (Group{0.3, 0.7, 2}));
}

TEST(Group, DistinctCoordinatesAreSingletons) {
  const auto g = group(validate_pair({0.1, 0.2, 0.3, 0.4}, {0.5, 0.5, 0.5, 0.5}));
  EXPECT_EQ(g.groups().size(), 4u);
  for (const auto& gr : g.groups()) EXPECT_EQ(gr.count, 1);
}

TEST(Group, ExpandRoundTrip) {
  CounterRng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pair = fixture::random_repetitive_pair(rng, fixture::random_size(rng, 1, 30));
    const auto g = group(pair);
    EXPECT_EQ(g.size(), static_cast<std::int64_t>(pair.size()));
    const auto again = group(expand(g));
    ASSERT_EQ(again.groups().size(), g.groups().size());
    for (std::size_t i = 0; i < g.groups().size(); ++i) EXPECT_EQ(again.groups()[i], g.groups()[i]);
  }
}

TEST(Group, FromGroupsRejectsBadCounts) {
  EXPECT_THROW(GroupedPair::from_groups({Group{0.3, 0.7, 0}}), Error);
  EXPECT_THROW(GroupedPair::from_groups({Group{0.0, 0.7, 1}}), Error);
  const auto merged = GroupedPair::from_groups({Group{0.3, 0.7, 2}, Group{0.3, 0.7, 3}});
  ASSERT_EQ(merged.groups().size(), 1u);
  EXPECT_EQ(merged.size(), 5);
}

TEST(Natural, KnownValues) {
  const auto nat = to_natural(validate_pair({0.5, 0.55}, {0.5, 0.45}));
  EXPECT_EQ(nat.theta0[0], 0.0);
  EXPECT_NEAR(nat.theta0[1], 0.20067069546215111, 1e-15);
  EXPECT_NEAR(nat.theta1[1], -0.20067069546215111, 1e-15);
}

TEST(Natural, RoundTrip) {
  CounterRng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pair = fixture::random_pair(rng, 20, 1e-6, 1 - 1e-6);
    const auto back = from_natural(to_natural(pair));
    for (std::size_t j = 0; j < pair.size(); ++j) {
      EXPECT_NEAR(back.p0()[j], pair.p0()[j], 1e-14 * pair.p0()[j]);
      EXPECT_NEAR(back.p1()[j], pair.p1()[j], 1e-14 * pair.p1()[j]);
    }
  }
}

TEST(PairCsv, RoundTrip) {
  const auto pair = validate_pair({0.1, 0.123456789012345678}, {0.9, 0.5});
  std::stringstream ss;
  write_pair_csv(ss, pair);
  const auto back = read_pair_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.p0()[1], pair.p0()[1]);
  EXPECT_EQ(back.p1()[0], pair.p1()[0]);
}

TEST(PairCsv, HeaderRequired) {
  std::stringstream no_header("0.1,0.2\n");
  EXPECT_THROW(read_pair_csv(no_header), Error);
  std::stringstream bad_number("p0,p1\n0.1,abc\n");
  EXPECT_THROW(read_pair_csv(bad_number), Error);
  std::stringstream out_of_range("p0,p1\n0.1,1.0\n");
  EXPECT_THROW(read_pair_csv(out_of_range), Error);
}
