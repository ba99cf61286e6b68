#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "binfilter/chain_model.hpp"
#include "binfilter/oracle.hpp"
#include "binfilter/toy.hpp"

using namespace binfilter;

namespace {

// Posterior P(x = state) by brute-force enumeration of prior * likelihood.
std::vector<double> enumerate_posterior(const BinaryMarkovChain& prior, const std::vector<double>& y, double sigma) {
  const std::size_t n = prior.size();
  const auto joint = chain_joint(prior);
  std::vector<double> w(joint.size());
  double z = 0.0;
  for (std::size_t s = 0; s < joint.size(); ++s) {
    double l = joint[s];
    for (std::size_t k = 0; k < n; ++k) {
      const double d = (y[k] - static_cast<double>((s >> k) & 1u)) / sigma;
      l *= std::exp(-0.5 * d * d);
    }
    w[s] = l;
    z += l;
  }
  for (auto& v : w) v /= z;
  return w;
}

}  // namespace

TEST(StationaryInit, Toy) { EXPECT_NEAR(stationary_init(0.7, 0.8), 0.4, 1e-15); }

TEST(StationaryInit, Symmetric) { EXPECT_DOUBLE_EQ(stationary_init(0.5, 0.5), 0.5); }

TEST(StationaryInit, MatchesPowerIteration) {
  const double p00 = 0.9, p11 = 0.6;
  double m0 = 1.0;
  for (int i = 0; i < 10000; ++i) m0 = m0 * p00 + (1.0 - m0) * (1.0 - p11);
  EXPECT_NEAR(stationary_init(p00, p11), m0, 1e-12);
}

TEST(StationaryInit, RejectsBadInput) {
  EXPECT_THROW(stationary_init(1.0, 1.0), InvalidInput);
  EXPECT_THROW(stationary_init(1.2, 0.5), InvalidInput);
}

TEST(Chain, RejectsInvalidProbabilities) {
  EXPECT_THROW(BinaryMarkovChain(1.5, {{0, 0}}), InvalidInput);
  EXPECT_THROW(BinaryMarkovChain(0.5, {{0, 0}, {0.3, -0.1}}), InvalidInput);
  EXPECT_THROW(BinaryMarkovChain(0.5, {}), InvalidInput);
}

TEST(Chain, ToyPriorMarginals) {
  for (double m : toy::prior().marginals()) EXPECT_NEAR(m, 0.4, 1e-15);
}

TEST(Chain, DeterministicChainIsAllOnes) {
  const auto c = BinaryMarkovChain::homogeneous(5, 0.0, 0.0, 1.0);
  for (double m : c.marginals()) EXPECT_EQ(m, 0.0);
  Rng rng = make_stream(1, 0, 0, StreamPurpose::kTest);
  for (int r = 0; r < 10; ++r)
    for (auto b : sample_chain(c, rng)) EXPECT_EQ(b, 1);
}

TEST(Chain, PairJointRowsSumToMarginals) {
  const BinaryMarkovChain c(0.3, {{0, 0}, {0.8, 0.25}, {0.1, 0.6}});
  const auto m = c.marginals();
  for (std::size_t k = 1; k < c.size(); ++k) {
    const auto p = c.pair_joint(k);
    EXPECT_NEAR(p[0][0] + p[0][1], m[k - 1], 1e-15);
    EXPECT_NEAR(p[0][0] + p[1][0], m[k], 1e-15);
    EXPECT_NEAR(p[0][0] + p[0][1] + p[1][0] + p[1][1], 1.0, 1e-15);
  }
}

TEST(Chain, PairJointIndependentIsProduct) {
  const BinaryMarkovChain c(0.35, {{0, 0}, {0.35, 0.35}});
  const auto p = c.pair_joint(1);
  EXPECT_NEAR(p[0][0], 0.35 * 0.35, 1e-15);
  EXPECT_NEAR(p[0][1], 0.35 * 0.65, 1e-15);
  EXPECT_NEAR(p[1][1], 0.65 * 0.65, 1e-15);
}

TEST(Chain, ToyPosteriorPairJoint) {
  const auto post = toy::posterior(toy::refine_toy_observations());
  const auto m = post.marginals();
  EXPECT_NEAR(post.pair_joint(3)[0][0], m[2] * 0.5490, 1e-4 * m[2]);
}

TEST(Posterior, ToyRawObservationsMatchPublished) {
  const auto post = toy::posterior(toy::raw_observations());
  EXPECT_LE(toy::posterior_deviation(post), 1e-4);
}

TEST(Posterior, ToyRefinedObservationsReproduceMarginals) {
  const auto y = toy::refine_toy_observations();
  for (std::size_t k = 0; k < y.size(); ++k) EXPECT_LE(std::abs(y[k] - toy::kObservations[k]), 5e-4);
  const auto m = toy::posterior(y).marginals();
  for (std::size_t k = 0; k < m.size(); ++k) EXPECT_NEAR(m[k], toy::kPosteriorMarg0[k], 1e-12);
}

TEST(Posterior, ConstantLikelihoodLeavesPriorUnchanged) {
  const BinaryMarkovChain prior(0.3, {{0, 0}, {0.8, 0.25}, {0.1, 0.6}});
  const LogLikelihoodTable flat(3, {-1.3, -1.3});
  const auto post = posterior_chain(prior, flat);
  EXPECT_NEAR(post.init0(), prior.init0(), 1e-15);
  for (std::size_t k = 1; k < 3; ++k)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(post.p0_given(k, j), prior.p0_given(k, j), 1e-15);
}

TEST(Posterior, TwoNodesMatchEnumeration) {
  const BinaryMarkovChain prior(0.62, {{0, 0}, {0.83, 0.27}});
  const std::vector<double> y{0.4, -0.9};
  const double sigma = 0.7;
  const auto w = enumerate_posterior(prior, y, sigma);
  const auto post = posterior_chain(prior, GaussianNodeLikelihood(sigma), y);
  // States: bit 0 = x_1, bit 1 = x_2.
  EXPECT_NEAR(post.init0(), w[0] + w[2], 1e-14);
  EXPECT_NEAR(post.p0_given(1, 0), w[0] / (w[0] + w[2]), 1e-14);
  EXPECT_NEAR(post.p0_given(1, 1), w[1] / (w[1] + w[3]), 1e-14);
}

TEST(Posterior, JointMatchesEnumerationOnRandomChains) {
  Rng rng = make_stream(3, 0, 0, StreamPurpose::kTest);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep % 6);
    std::vector<std::array<double, 2>> tr(n);
    for (auto& t : tr) t = {0.05 + 0.9 * uniform01(rng), 0.05 + 0.9 * uniform01(rng)};
    const BinaryMarkovChain prior(0.05 + 0.9 * uniform01(rng), tr);
    std::vector<double> y(n);
    for (auto& v : y) v = -2.0 + 5.0 * uniform01(rng);
    const double sigma = 0.5 + uniform01(rng);
    const auto w = enumerate_posterior(prior, y, sigma);
    const auto joint = chain_joint(posterior_chain(prior, GaussianNodeLikelihood(sigma), y));
    for (std::size_t s = 0; s < w.size(); ++s) EXPECT_NEAR(joint[s], w[s], 1e-13);
  }
}

TEST(Posterior, ExtremeObservationsStayFinite) {
  const auto prior = toy::prior();
  const std::vector<double> y{1e3, -1e3, 1e3, -1e3};
  const auto post = posterior_chain(prior, GaussianNodeLikelihood(0.1), y);
  const auto m = post.marginals();
  EXPECT_NEAR(m[0], 0.0, 1e-12);
  EXPECT_NEAR(m[1], 1.0, 1e-12);
}

TEST(Posterior, RejectsLengthMismatchAndNonFinite) {
  const auto prior = toy::prior();
  const std::vector<double> shortY{0.0, 1.0};
  EXPECT_THROW(posterior_chain(prior, GaussianNodeLikelihood(1.0), shortY), InvalidInput);
  const std::vector<double> nanY{0.0, NAN, 0.0, 0.0};
  EXPECT_THROW(posterior_chain(prior, GaussianNodeLikelihood(1.0), nanY), InvalidInput);
  EXPECT_THROW(GaussianNodeLikelihood(0.0), InvalidInput);
}

TEST(Sampling, ToyPriorFrequency) {
  const auto prior = toy::prior();
  Rng rng = make_stream(11, 0, 0, StreamPurpose::kTest);
  const int N = 1000000;
  std::vector<int> zeros(prior.size(), 0);
  for (int r = 0; r < N; ++r) {
    const auto x = sample_chain(prior, rng);
    for (std::size_t k = 0; k < x.size(); ++k) zeros[k] += x[k] == 0;
  }
  const double se = std::sqrt(0.4 * 0.6 / N);
  for (int z : zeros) EXPECT_NEAR(static_cast<double>(z) / N, 0.4, 3.0 * se);
}

TEST(Sampling, Reproducible) {
  const auto prior = toy::prior();
  Rng a = make_stream(5, 1, 2, StreamPurpose::kTest), b = make_stream(5, 1, 2, StreamPurpose::kTest);
  for (int r = 0; r < 100; ++r) EXPECT_EQ(sample_chain(prior, a), sample_chain(prior, b));
}

TEST(ChainCsv, RoundTrip) {
  const BinaryMarkovChain c(0.3, {{0, 0}, {0.8, 0.25}, {0.1, 0.6}});
  std::stringstream ss;
  write_chain_csv(ss, c);
  EXPECT_EQ(read_chain_csv(ss), c);
}
