#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include <zlib.h>

#include "binfilter/ensemble.hpp"
#include "binfilter/oracle.hpp"
#include "binfilter/toy.hpp"

using namespace binfilter;

TEST(Ensemble, PackAndUnpack) {
  Ensemble e(3, 130);
  BinaryVector x(130, 0);
  x[0] = x[63] = x[64] = x[129] = 1;
  e.set_member(1, x);
  EXPECT_EQ(e.member(1), x);
  EXPECT_EQ(e.member(0), BinaryVector(130, 0));
  EXPECT_EQ(e.get(1, 64), 1);
  EXPECT_THROW(e.set_member(0, BinaryVector(3, 0)), InvalidInput);
  EXPECT_THROW(e.set_member(0, BinaryVector(130, 2)), InvalidInput);
}

TEST(Ensemble, MeanOnes) {
  const Ensemble e(std::vector<BinaryVector>{{1, 0, 1}, {1, 1, 0}, {0, 0, 0}, {1, 0, 0}});
  const auto m = e.mean_ones();
  EXPECT_DOUBLE_EQ(m[0], 0.75);
  EXPECT_DOUBLE_EQ(m[1], 0.25);
  EXPECT_DOUBLE_EQ(m[2], 0.25);
}

TEST(EstimateChain, BetaBinomialInit) {
  std::vector<BinaryVector> rows(20, BinaryVector{1, 1});
  for (int m = 0; m < 8; ++m) rows[m][0] = 0;
  const auto c = estimate_chain(Ensemble(rows));
  EXPECT_NEAR(c.init0(), 10.0 / 24.0, 1e-15);
}

TEST(EstimateChain, EmptyConditioningFallsBackToPriorMean) {
  const Ensemble e(std::vector<BinaryVector>(5, BinaryVector{0, 0, 0}));
  const auto c = estimate_chain(e);
  EXPECT_DOUBLE_EQ(c.p0_given(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(c.p0_given(2, 1), 0.5);
  EXPECT_NEAR(c.p0_given(1, 0), 7.0 / 9.0, 1e-15);
}

TEST(EstimateChain, AllZerosLimit) {
  const Ensemble e(std::vector<BinaryVector>(100000, BinaryVector{0, 0}));
  const auto c = estimate_chain(e);
  EXPECT_GT(c.init0(), 0.9999);
  EXPECT_GT(c.p0_given(1, 0), 0.9999);
  EXPECT_DOUBLE_EQ(c.p0_given(1, 1), 0.5);
}

TEST(EstimateChain, CustomPriorAndValidation) {
  const Ensemble e(std::vector<BinaryVector>{{0, 1}, {1, 1}});
  const auto c = estimate_chain(e, {1.0, 3.0});
  EXPECT_NEAR(c.init0(), 2.0 / 6.0, 1e-15);
  EXPECT_THROW(estimate_chain(e, {0.0, 1.0}), InvalidInput);
  EXPECT_THROW(estimate_chain(Ensemble(0, 3)), InvalidInput);
}

TEST(UpdateMember, IdentityRuleKeepsState) {
  Rng rng = make_stream(1, 0, 0, StreamPurpose::kTest);
  const auto rule = TransitionRule::identity(6);
  for (int r = 0; r < 100; ++r) {
    BinaryVector x(6);
    for (auto& b : x) b = bernoulli(rng, 0.5) ? 1 : 0;
    EXPECT_EQ(update_member(x, rule, rng), x);
  }
  EXPECT_THROW(update_member(BinaryVector(5, 0), rule, rng), InvalidInput);
}

TEST(UpdateMember, ToyMarginalsAndExpectedUnchanged) {
  const auto r = toy::run();
  Rng rng = make_stream(2, 0, 0, StreamPurpose::kTest);
  const int N = 1000000;
  std::vector<double> zeros(4, 0.0);
  double unchanged = 0.0, unchanged_sq = 0.0;
  for (int s = 0; s < N; ++s) {
    const auto x = sample_chain(r.prior, rng);
    const auto xt = update_member(x, r.coupling.rule, rng);
    int same = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      zeros[k] += xt[k] == 0;
      same += x[k] == xt[k];
    }
    unchanged += same;
    unchanged_sq += same * same;
  }
  for (std::size_t k = 0; k < 4; ++k) {
    const double p = toy::kPosteriorMarg0[k];
    EXPECT_NEAR(zeros[k] / N, p, 3.0 * std::sqrt(p * (1 - p) / N)) << k;
  }
  const double mean = unchanged / N;
  const double sd = std::sqrt(unchanged_sq / N - mean * mean);
  const auto exact = enumerate_pushforward(r.coupling.rule, r.prior).expected_unchanged;
  EXPECT_NEAR(mean, exact, 3.0 * sd / std::sqrt(N));
}

TEST(ResampleAssumed, DeterministicChain) {
  Rng rng = make_stream(3, 0, 0, StreamPurpose::kTest);
  const auto c = BinaryMarkovChain::homogeneous(7, 1.0, 1.0, 0.0);
  const auto e = resample_assumed(c, 15, rng);
  for (std::size_t m = 0; m < e.size(); ++m) EXPECT_EQ(e.member(m), BinaryVector(7, 0));
}

TEST(ResampleAssumed, ToyPosteriorMarginals) {
  const auto post = toy::posterior(toy::refine_toy_observations());
  Rng rng = make_stream(4, 0, 0, StreamPurpose::kTest);
  const std::size_t M = 200000;
  const auto e = resample_assumed(post, M, rng);
  const auto ones = e.mean_ones();
  for (std::size_t k = 0; k < 4; ++k) {
    const double p = toy::kPosteriorMarg0[k];
    EXPECT_NEAR(1.0 - ones[k], p, 3.0 * std::sqrt(p * (1 - p) / M));
  }
}

TEST(ResampleAssumed, Reproducible) {
  const auto post = toy::prior();
  Rng a = make_stream(6, 2, 3, StreamPurpose::kResampleAssumed);
  Rng b = make_stream(6, 2, 3, StreamPurpose::kResampleAssumed);
  EXPECT_EQ(resample_assumed(post, 50, a).members(), resample_assumed(post, 50, b).members());
}

TEST(EnsembleCsv, PlainAndGzip) {
  const Ensemble e(std::vector<BinaryVector>{{1, 0, 1}, {0, 0, 1}});
  EXPECT_EQ(ensemble_csv(e), "1,0,1\n0,0,1\n");
  const auto path = (std::filesystem::temp_directory_path() / "binfilter_test_ens.csv.gz").string();
  write_ensemble_csv_gz(path, e);
  gzFile f = gzopen(path.c_str(), "rb");
  ASSERT_NE(f, nullptr);
  char buf[64] = {};
  const int n = gzread(f, buf, sizeof(buf) - 1);
  gzclose(f);
  std::filesystem::remove(path);
  EXPECT_EQ(std::string(buf, static_cast<std::size_t>(n)), "1,0,1\n0,0,1\n");
}
