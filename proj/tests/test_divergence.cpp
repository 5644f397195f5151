#include <doctest.h>

#include <random>

#include "framerank/distribution.hpp"
#include "framerank/divergence.hpp"
#include "framerank/error.hpp"
#include "oracles.hpp"

using namespace framerank;

namespace {

CategoricalDistribution d(std::map<std::string, double> m) {
  return CategoricalDistribution::from_probabilities(std::move(m));
}

}  // namespace

TEST_CASE("distribution construction") {
  const auto p = CategoricalDistribution::from_masses({{"a", 2}, {"b", 1}, {"c", 1}});
  CHECK(p.probability("a") == 0.5);
  CHECK(p.probability("zz") == 0.0);
  CHECK(p.is_normalized());
  CHECK_THROWS_AS(CategoricalDistribution::from_masses({{"a", -1}, {"b", 2}}), InvalidArgument);
  CHECK_THROWS_AS(CategoricalDistribution::from_masses({{"a", 0}}), InvalidArgument);
  CHECK(support_union(d({{"a", 1}}), d({{"b", 0.5}, {"c", 0.5}})) ==
        std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("Jensen-Shannon divergence") {
  const auto p = d({{"A", 0.5}, {"B", 0.5}});
  CHECK(jsd(p, p) == 0.0);
  CHECK(jsd(d({{"A", 1}}), d({{"B", 1}})) == 1.0);
  CHECK(jsd(p, d({{"A", 1}})) == doctest::Approx(0.31128).epsilon(1e-5));
  CHECK_THROWS_AS(jsd(d({{"A", 0.5}}), p), InvalidArgument);
}

TEST_CASE("generalized divergence") {
  const auto p = d({{"A", 0.5}, {"B", 0.5}});
  const auto q = d({{"A", 1}});
  CHECK(divergence_dstar(p, q, Generator::JensenShannon) ==
        doctest::Approx(jsd(p, q)).epsilon(1e-12));
  CHECK(divergence_dstar(p, q, Generator::JensenShannon) == doctest::Approx(0.31128).epsilon(1e-5));
  CHECK(divergence_dstar(p, p, Generator::JensenShannon) == doctest::Approx(0.0));
  CHECK(divergence_dstar(p, p, Generator::KullbackLeibler) == doctest::Approx(0.0));

  // Context (0.5, 0.5), recommendation (0.9, 0.1): KL(rec || context).
  const auto rec = d({{"A", 0.9}, {"B", 0.1}});
  const double expected = 0.9 * std::log2(0.9 / 0.5) + 0.1 * std::log2(0.1 / 0.5);
  CHECK(divergence_dstar(p, rec, Generator::KullbackLeibler) ==
        doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(0.531).epsilon(1e-3));
  CHECK(parse_generator("kl") == Generator::KullbackLeibler);
  CHECK_THROWS_AS(parse_generator("hellinger"), InvalidArgument);
}

TEST_CASE("smoothed KL stays finite on disjoint supports and grows as epsilon shrinks") {
  const auto a = d({{"A", 1}});
  const auto b = d({{"B", 1}});
  const double coarse = smoothed_kl(b, a, 1e-6);
  const double fine = smoothed_kl(b, a, 1e-12);
  CHECK(std::isfinite(fine));
  CHECK(fine > coarse);
  CHECK(smoothed_kl(a, a, 1e-12) == doctest::Approx(0.0));
}

TEST_CASE("divergences match straight-line reimplementations") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 1000; ++t) {
    const auto p = oracle::random_dist(rng, 7), q = oracle::random_dist(rng, 7);
    const auto dp = d(p), dq = d(q);
    CHECK(jsd(dp, dq) == doctest::Approx(oracle::jsd(p, q)).epsilon(1e-12));
    CHECK(std::abs(divergence_dstar(dp, dq, Generator::JensenShannon) - oracle::dstar_jsd(p, q)) <
          1e-9);
  }
}

TEST_CASE("jsd is a bounded symmetric divergence") {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 1000; ++t) {
    const auto p = d(oracle::random_dist(rng, 9)), q = d(oracle::random_dist(rng, 9));
    const double pq = jsd(p, q);
    CHECK(pq == jsd(q, p));
    CHECK(pq >= 0.0);
    CHECK(pq <= 1.0);
    CHECK(jsd(p, p) == 0.0);
    CHECK(std::abs(divergence_dstar(p, q, Generator::JensenShannon) - pq) < 1e-9);
    CHECK(divergence_dstar(p, q, Generator::KullbackLeibler) >= 0.0);
  }
}
