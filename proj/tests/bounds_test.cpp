#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "egalbandit/bounds.hpp"

namespace eb = egalbandit;

// Reference values below come from 30-digit mpmath evaluations of the closed forms.

TEST(ConfidenceRadius, Examples) {
  EXPECT_EQ(eb::confidence_radius(1, 1, 1), 0.0);
  EXPECT_NEAR(eb::confidence_radius(2, 1, 3), 1.893018472824845415704053615, 1e-12);
  EXPECT_NEAR(eb::confidence_radius(7, 4, 2), 0.5 * eb::confidence_radius(7, 1, 2), 1e-15);
  EXPECT_THROW(eb::confidence_radius(0, 1, 1), eb::DomainError);
  EXPECT_THROW(eb::confidence_radius(1, 0, 1), eb::DomainError);
  EXPECT_THROW(eb::confidence_radius(1, 1, 0), eb::DomainError);
}

TEST(DependentBound, Examples) {
  EXPECT_NEAR(eb::dependent_upper_bound(2, 1, 100, 0.1, 0.1), 98367.2351727056316212485949441, 1e-8);
  EXPECT_NEAR(eb::dependent_upper_bound(4, 2, 1000, 0.2, 0.0), 2136.0 * 2.0 * std::log(1000.0) / 0.2, 1e-9);
  EXPECT_THROW(eb::dependent_upper_bound(2, 1, 100, 0.0, 0.1), eb::DomainError);
  EXPECT_THROW(eb::dependent_upper_bound(2, 2, 100, 0.1, 0.1), eb::DomainError);
  EXPECT_THROW(eb::dependent_upper_bound(2, 1, 1, 0.1, 0.1), eb::DomainError);
}

TEST(IndependentBound, Examples) {
  EXPECT_EQ(eb::independent_upper_bound(5, 5, 1000), 0.0);
  EXPECT_EQ(eb::independent_upper_bound(1, 1, 2), 0.0);
  EXPECT_NEAR(eb::independent_upper_bound(10, 5, 150000), 123630.490566456075602005563955, 1e-7);
  for (std::uint64_t T : {2ull, 17ull, 1000ull, 123456ull}) {
    EXPECT_LT(eb::independent_upper_bound(9, 4, T), eb::independent_upper_bound(9, 4, 2 * T));
  }
  EXPECT_THROW(eb::independent_upper_bound(3, 4, 100), eb::DomainError);
  EXPECT_THROW(eb::independent_upper_bound(3, 1, 1), eb::DomainError);
}

TEST(LowerBound, Examples) {
  EXPECT_NEAR(eb::lower_bound_value(4, 2, 10000), 0.930403659455983584737953108033, 1e-12);
  EXPECT_NEAR(eb::lower_bound_value(9, 3, 4 * 777), 2.0 * eb::lower_bound_value(9, 3, 777), 1e-12);
  try {
    eb::lower_bound_value(3, 2, 100);
    FAIL() << "expected DomainError";
  } catch (const eb::DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("K >= 2U"), std::string::npos);
  }
}

TEST(Bounds, LowerNeverExceedsIndependentUpper) {
  for (std::size_t K = 2; K <= 64; ++K) {
    for (std::size_t U = 1; 2 * U <= K; ++U) {
      for (std::uint64_t T : {2ull, 10ull, 1000ull, 1000000ull}) {
        ASSERT_LE(eb::lower_bound_value(K, U, T), eb::independent_upper_bound(K, U, T));
      }
    }
  }
}

TEST(Bounds, ReportPresenceRules) {
  const auto full = eb::bound_report(4, 2, 10000, 0.3, 0.6);
  EXPECT_TRUE(full.dependent_upper);
  ASSERT_TRUE(full.lower);
  EXPECT_NEAR(*full.lower, 0.930403659455983584737953108033, 1e-12);

  const auto no_lower = eb::bound_report(3, 2, 100, 0.1, 0.2);
  EXPECT_FALSE(no_lower.lower);
  const auto no_dep = eb::bound_report(4, 2, 100, std::nullopt, 0.2);
  EXPECT_FALSE(no_dep.dependent_upper);
  const auto all_users = eb::bound_report(eb::EgalMabInstance::bernoulli(std::vector<double>{0.9, 0.5, 0.2}), 3, 50);
  EXPECT_FALSE(all_users.dependent_upper);
  EXPECT_EQ(all_users.independent_upper, 0.0);

  const auto wired = eb::bound_report(eb::EgalMabInstance::bernoulli(std::vector<double>{0.8, 0.8, 0.5, 0.5}), 2, 1000);
  ASSERT_TRUE(wired.dependent_upper);
  EXPECT_NEAR(*wired.dependent_upper, eb::dependent_upper_bound(4, 2, 1000, 0.3, 0.6), 1e-6);
  // Pure: identical inputs, identical outputs.
  const auto again = eb::bound_report(4, 2, 10000, 0.3, 0.6);
  EXPECT_EQ(*again.dependent_upper, *full.dependent_upper);
  EXPECT_EQ(again.independent_upper, full.independent_upper);
}

TEST(HardInstance, Construction) {
  const auto h = eb::hard_instance(4, 2, 100);
  EXPECT_NEAR(h.delta, 0.025, 1e-15);
  const std::vector<double> expected{0.025, 0.025, 0.0, 0.0};
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_NEAR(h.instance.means()[a], expected[a], 1e-15);
    const auto& g = std::get<eb::Gaussian>(h.instance.arm(a).law());
    EXPECT_EQ(g.stddev, 1.0);
  }
  EXPECT_LT(eb::hard_instance(6, 3, 1000000000).delta, 1e-4);
  EXPECT_THROW(eb::hard_instance(3, 2, 100), eb::DomainError);
  // T below (K-U)/(8U^2) would push the means past 1.
  EXPECT_NO_THROW(eb::hard_instance(64, 1, 8));
  EXPECT_THROW(eb::hard_instance(64, 1, 7), eb::DomainError);
}

TEST(AdversarialPartner, Examples) {
  const auto h = eb::hard_instance(4, 2, 100);
  const std::vector<std::uint64_t> counts{50, 50, 10, 5};
  const auto p = eb::adversarial_partner(h.instance, h.delta, 2, counts);
  EXPECT_EQ(p.partner_set, (std::vector<std::size_t>{2, 3}));
  const std::vector<double> expected{0.025, 0.025, 0.05, 0.05};
  for (std::size_t a = 0; a < 4; ++a) EXPECT_NEAR(p.instance.means()[a], expected[a], 1e-15);

  const auto h6 = eb::hard_instance(6, 2, 100);
  const std::vector<std::uint64_t> six{0, 0, 5, 1, 2, 9};
  EXPECT_EQ(eb::adversarial_partner(h6.instance, h6.delta, 2, six).partner_set, (std::vector<std::size_t>{3, 4}));
  const std::vector<std::uint64_t> equal{3, 3, 3, 3, 3, 3};
  EXPECT_EQ(eb::adversarial_partner(h6.instance, h6.delta, 2, equal).partner_set, (std::vector<std::size_t>{2, 3}));

  const std::vector<std::uint64_t> short_counts{1, 2, 3};
  EXPECT_THROW(eb::adversarial_partner(h.instance, h.delta, 2, short_counts), eb::DomainError);
  EXPECT_THROW(eb::adversarial_partner(h.instance, h.delta, 3, counts), eb::DomainError);
}

TEST(AdversarialPartner, GreedyEqualsLexicographicArgmin) {
  std::mt19937_64 gen(12);
  std::uniform_int_distribution<int> count(0, 4);
  for (std::size_t K = 2; K <= 10; ++K) {
    for (std::size_t U = 1; 2 * U <= K; ++U) {
      for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint64_t> counts(K);
        for (auto& c : counts) c = static_cast<std::uint64_t>(count(gen));
        std::vector<std::size_t> best;
        std::uint64_t best_sum = ~0ull;
        for (std::uint32_t mask = 0; mask < (1u << K); ++mask) {
          if (static_cast<std::size_t>(__builtin_popcount(mask)) != U || (mask & ((1u << U) - 1))) continue;
          std::vector<std::size_t> set;
          std::uint64_t sum = 0;
          for (std::size_t a = 0; a < K; ++a) {
            if (mask & (1u << a)) {
              set.push_back(a);
              sum += counts[a];
            }
          }
          if (sum < best_sum || (sum == best_sum && set < best)) {
            best = set;
            best_sum = sum;
          }
        }
        ASSERT_EQ(eb::least_played_set(counts, U), best);
      }
    }
  }
}
