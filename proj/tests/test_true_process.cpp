#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "binfilter/true_process.hpp"

using namespace binfilter;

TEST(TrueModelTable, PublishedEntries) {
  const TrueModelTable t;
  EXPECT_EQ(t.p1(0, 0, 0, 1), 0.0100);
  EXPECT_EQ(t.p1(1, 0, 1, 0), 0.0400);
  EXPECT_EQ(t.p1(1, 0, 1, 1), 0.9800);
  EXPECT_EQ(t.p1(0, 1, 0, 0), 0.9800);
  EXPECT_EQ(t.p1(1, 1, 1, 1), 0.9999);
}

TEST(TrueModelTable, BoundarySitesUseZeros) {
  const TrueModelTable t;
  EXPECT_EQ(cond_prob_one(t, kOutOfLattice, 0, kOutOfLattice, kOutOfLattice), 0.0050);
  const BinaryVector prev(5, 0);
  EXPECT_EQ(site_prob_one(t, prev, 0, 1), 0.0050);  // left_curr ignored at site 0
  EXPECT_EQ(site_prob_one(t, prev, 1, 1), 0.0100);
}

TEST(TrueModelTable, CsvRoundTrip) {
  std::stringstream ss;
  write_table_csv(ss, TrueModelTable{});
  EXPECT_EQ(read_table_csv(ss), TrueModelTable{});
  std::array<double, 16> bad{};
  bad[3] = 1.5;
  EXPECT_THROW(TrueModelTable{bad}, InvalidInput);
}

TEST(SimulateStep, FromAllZerosIsRare) {
  const TrueModelTable t;
  Rng rng = make_stream(1, 0, 0, StreamPurpose::kTest);
  const BinaryVector prev(400, 0);
  std::size_t ones = 0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r)
    for (auto b : simulate_step(t, prev, rng)) ones += b;
  // Every site has P(1) <= 0.04 given a zero predecessor; overall ~0.005-0.01.
  EXPECT_LT(static_cast<double>(ones) / (400.0 * reps), 0.012);
}

TEST(SimulateStep, FromAllOnesStaysOne) {
  const TrueModelTable t;
  Rng rng = make_stream(2, 0, 0, StreamPurpose::kTest);
  const BinaryVector prev(50, 1);
  for (std::size_t i = 1; i + 1 < 50; ++i) {
    EXPECT_GE(site_prob_one(t, prev, i, 1), 0.98);
    EXPECT_GE(site_prob_one(t, prev, i, 0), 0.98);
  }
  std::size_t ones = 0;
  for (int r = 0; r < 200; ++r)
    for (auto b : simulate_step(t, prev, rng)) ones += b;
  EXPECT_GT(static_cast<double>(ones) / (50.0 * 200), 0.97);
}

TEST(SimulateStep, Reproducible) {
  const TrueModelTable t;
  Rng a = make_stream(3, 0, 0, StreamPurpose::kTruth), b = make_stream(3, 0, 0, StreamPurpose::kTruth);
  BinaryVector pa(30, 0), pb(30, 0);
  for (int s = 0; s < 20; ++s) {
    pa = simulate_step(t, pa, a);
    pb = simulate_step(t, pb, b);
    EXPECT_EQ(pa, pb);
  }
}

TEST(TransitionProb, SumsToOneAndMatchesFrequencies) {
  const TrueModelTable t;
  const BinaryVector prev{0, 1, 0};
  double total = 0.0;
  std::vector<double> exact(8);
  for (std::size_t s = 0; s < 8; ++s) {
    const BinaryVector next{static_cast<std::uint8_t>(s & 1), static_cast<std::uint8_t>((s >> 1) & 1),
                            static_cast<std::uint8_t>((s >> 2) & 1)};
    exact[s] = transition_prob(t, prev, next);
    total += exact[s];
  }
  EXPECT_NEAR(total, 1.0, 1e-14);

  Rng rng = make_stream(4, 0, 0, StreamPurpose::kTest);
  const int N = 1000000;
  std::vector<int> count(8, 0);
  for (int r = 0; r < N; ++r) {
    const auto x = simulate_step(t, prev, rng);
    ++count[x[0] | (x[1] << 1) | (x[2] << 2)];
  }
  for (std::size_t s = 0; s < 8; ++s) {
    const double se = std::sqrt(exact[s] * (1.0 - exact[s]) / N);
    EXPECT_NEAR(static_cast<double>(count[s]) / N, exact[s], 3.0 * se + 1e-12) << s;
  }
}

TEST(Observation, TinySigmaReproducesState) {
  Rng rng = make_stream(5, 0, 0, StreamPurpose::kTest);
  const BinaryVector x{0, 1, 1, 0};
  const auto y = simulate_observation(x, 1e-9, rng);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-7);
  EXPECT_THROW(simulate_observation(x, 0.0, rng), InvalidInput);
}

TEST(Observation, NoiseMeanAndVariance) {
  Rng rng = make_stream(6, 0, 0, StreamPurpose::kTest);
  const BinaryVector x(1000, 0);
  double s = 0.0, s2 = 0.0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r)
    for (double v : simulate_observation(x, 2.0, rng)) {
      s += v;
      s2 += v * v;
    }
  const double N = 1000.0 * reps;
  EXPECT_NEAR(s / N, 0.0, 3.0 * 2.0 / 1000.0);
  EXPECT_NEAR(s2 / N, 4.0, 0.03);
}

TEST(SimulateTruth, ShapesAndDeterminism) {
  const TrueModelTable t;
  ProcessConfig cfg;
  cfg.n = 12;
  cfg.T = 40;
  Rng a1 = make_stream(7, 0, 0, StreamPurpose::kTruth), a2 = make_stream(7, 0, 0, StreamPurpose::kObservation);
  Rng b1 = make_stream(7, 0, 0, StreamPurpose::kTruth), b2 = make_stream(7, 0, 0, StreamPurpose::kObservation);
  const auto a = simulate_truth(t, cfg, a1, a2);
  const auto b = simulate_truth(t, cfg, b1, b2);
  ASSERT_EQ(a.truth.size(), 40u);
  ASSERT_EQ(a.obs.size(), 40u);
  EXPECT_EQ(a.truth[0].size(), 12u);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.obs, b.obs);
  cfg.n = 0;
  EXPECT_THROW(simulate_truth(t, cfg, a1, a2), InvalidInput);
}

TEST(SimulateTruth, WaterSpreadsOverTime) {
  const TrueModelTable t;
  ProcessConfig cfg;
  cfg.n = 200;
  cfg.T = 100;
  Rng a1 = make_stream(8, 0, 0, StreamPurpose::kTruth), a2 = make_stream(8, 0, 0, StreamPurpose::kObservation);
  const auto d = simulate_truth(t, cfg, a1, a2);
  auto ones = [](const BinaryVector& x) {
    std::size_t s = 0;
    for (auto b : x) s += b;
    return s;
  };
  EXPECT_LT(ones(d.truth.front()), ones(d.truth.back()));
}
