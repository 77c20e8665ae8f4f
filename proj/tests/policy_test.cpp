#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "egalbandit/policy.hpp"
#include "oracles.hpp"

namespace eb = egalbandit;
using Arms = std::vector<std::size_t>;

namespace {

// Plays one full block of `set` with a constant reward per step.
void play_block(eb::EgalUcbState& s, const Arms& set, double reward) {
  const std::vector<double> rewards(s.num_users(), reward);
  for (std::size_t step = 0; step < s.num_users(); ++step) s.observe(s.schedule(set), rewards);
  s.finalize_block();
}

}  // namespace

TEST(EgalUcbInit, FreshState) {
  eb::EgalUcbState s(5, 3);
  EXPECT_EQ(s.block(), 0u);
  for (std::size_t a = 0; a < 5; ++a) {
    EXPECT_FALSE(s.ucb(a).has_value());
    EXPECT_EQ(s.blocks_played(a), 0u);
    EXPECT_EQ(s.cum_reward(a), 0.0);
  }
  EXPECT_EQ(Arms(s.rr_index().begin(), s.rr_index().end()), (Arms{0, 1, 2}));

  eb::EgalUcbState single(1, 1);
  EXPECT_EQ(single.select(), (Arms{0}));

  EXPECT_THROW(eb::EgalUcbState(2, 3), eb::DomainError);
  EXPECT_THROW(eb::EgalUcbState(2, 0), eb::DomainError);
}

TEST(EgalUcbSelect, Examples) {
  const std::vector<eb::UcbValue> unplayed_dominates{0.5, std::nullopt, 0.3, std::nullopt};
  EXPECT_EQ(eb::top_ucb_set(unplayed_dominates, 2), (Arms{1, 3}));

  const std::vector<eb::UcbValue> all_tied{0.9, 0.9, 0.9};
  EXPECT_EQ(eb::top_ucb_set(all_tied, 2), (Arms{0, 1}));

  const std::vector<eb::UcbValue> mixed{0.5, 0.9, 0.7, 0.9};
  EXPECT_EQ(eb::top_ucb_set(mixed, 2), (Arms{1, 3}));
  EXPECT_EQ(eb::oracle::brute_force_top_set(mixed, 2), (Arms{1, 3}));
}

TEST(EgalUcbSelect, MatchesBruteForceIncludingUnplayed) {
  std::mt19937_64 gen(404);
  std::uniform_int_distribution<int> coarse(0, 3);
  std::bernoulli_distribution unplayed(0.2);
  for (std::size_t K = 1; K <= 7; ++K) {
    for (std::size_t U = 1; U <= K; ++U) {
      for (int trial = 0; trial < 100; ++trial) {
        std::vector<eb::UcbValue> ucbs(K);
        for (auto& u : ucbs) {
          if (!unplayed(gen)) u = 0.25 * coarse(gen);
        }
        ASSERT_EQ(eb::top_ucb_set(ucbs, U), eb::oracle::brute_force_top_set(ucbs, U));
      }
    }
  }
}

TEST(EgalUcbSchedule, RightCircularShift) {
  const Arms set{1, 3, 4};
  EXPECT_EQ(eb::round_robin_assignment(set, 0).user_to_arm, (Arms{1, 3, 4}));
  EXPECT_EQ(eb::round_robin_assignment(set, 1).user_to_arm, (Arms{4, 1, 3}));
  EXPECT_EQ(eb::round_robin_assignment(set, 2).user_to_arm, (Arms{3, 4, 1}));
  EXPECT_THROW(eb::round_robin_assignment(set, 3), eb::DomainError);
}

TEST(EgalUcbSchedule, StateIndexVectorAgreesWithFormula) {
  eb::EgalUcbState s(5, 3);
  const Arms set{1, 3, 4};
  const std::vector<double> rewards{0.0, 0.0, 0.0};
  for (std::size_t step = 0; step < 3; ++step) {
    EXPECT_EQ(s.schedule(set), eb::round_robin_assignment(set, step));
    s.observe(s.schedule(set), rewards);
  }
  EXPECT_EQ(Arms(s.rr_index().begin(), s.rr_index().end()), (Arms{0, 1, 2}));
}

TEST(EgalUcbObserve, AccumulatesPerArm) {
  eb::EgalUcbState s(5, 3);
  s.observe({{1, 3, 4}}, std::vector<double>{1.0, 0.0, 0.5});
  EXPECT_EQ(s.cum_reward(1), 1.0);
  EXPECT_EQ(s.cum_reward(3), 0.0);
  EXPECT_EQ(s.cum_reward(4), 0.5);
  EXPECT_EQ(s.cum_reward(0), 0.0);
  EXPECT_EQ(s.blocks_played(1), 0u);  // counts move only at finalize

  eb::EgalUcbState z(5, 3);
  z.observe({{1, 3, 4}}, std::vector<double>{0.0, 0.0, 0.0});
  for (std::size_t a = 0; a < 5; ++a) EXPECT_EQ(z.cum_reward(a), 0.0);
}

TEST(EgalUcbObserve, RejectsMalformedInput) {
  eb::EgalUcbState s(5, 3);
  EXPECT_THROW(s.observe({{1, 3, 4}}, std::vector<double>{1.0, 0.0}), eb::DomainError);
  EXPECT_THROW(s.observe({{1, 1, 4}}, std::vector<double>{1.0, 0.0, 0.0}), eb::DomainError);
  s.observe({{1, 3, 4}}, std::vector<double>{0.0, 0.0, 0.0});
  // A block's arm set is fixed by its first step.
  EXPECT_THROW(s.observe({{0, 3, 4}}, std::vector<double>{0.0, 0.0, 0.0}), eb::StateError);
}

TEST(EgalUcbFinalize, UcbFormulaAfterTwoBlocks) {
  eb::EgalUcbState s(4, 3);
  play_block(s, s.select(), 0.0);  // arms 1..3 (unplayed, index order)
  const auto second = s.select();
  EXPECT_EQ(second, (Arms{0, 1, 3}));  // arm 4 still unplayed; others tied at the same UCB
  play_block(s, second, 1.0);
  EXPECT_EQ(s.block(), 2u);
  EXPECT_EQ(s.blocks_played(3), 1u);
  EXPECT_EQ(s.cum_reward(3), 3.0);
  // 1 + sqrt(6 ln 6 / 3), reference value from a 30-digit evaluation.
  EXPECT_NEAR(*s.ucb(3), 2.893018472824845415704053615, 1e-12);
}

TEST(EgalUcbFinalize, SingleUserFirstBlockHasNoBonus) {
  eb::EgalUcbState s(2, 1);
  s.observe({{0}}, std::vector<double>{0.7});
  s.finalize_block();
  EXPECT_EQ(*s.ucb(0), 0.7);
  EXPECT_FALSE(s.ucb(1).has_value());
}

TEST(EgalUcbFinalize, MidBlockIsAStateError) {
  eb::EgalUcbState s(4, 2);
  EXPECT_THROW(s.finalize_block(), eb::StateError);
  s.observe({{0, 1}}, std::vector<double>{0.0, 0.0});
  EXPECT_THROW(s.finalize_block(), eb::StateError);
  s.observe({{1, 0}}, std::vector<double>{0.0, 0.0});
  EXPECT_THROW(s.observe({{1, 0}}, std::vector<double>{0.0, 0.0}), eb::StateError);
  EXPECT_NO_THROW(s.finalize_block());
}

TEST(EgalUcbFinalize, RecomputesEveryPlayedArm) {
  // An arm not in the latest block still has its bonus refreshed with ln(bU).
  eb::EgalUcbState s(3, 1);
  s.observe({{0}}, std::vector<double>{0.5});
  s.finalize_block();
  s.observe({{1}}, std::vector<double>{0.2});
  s.finalize_block();
  EXPECT_NEAR(*s.ucb(0), 0.5 + std::sqrt(6.0 * std::log(2.0)), 1e-15);
}

TEST(EgalUcbProperties, CountsPermutationAndMonotonicity) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> reward(0.0, 1.0);
  for (std::size_t K = 1; K <= 9; ++K) {
    for (std::size_t U = 1; U <= K; ++U) {
      eb::EgalUcbState s(K, U);
      for (int b = 1; b <= 12; ++b) {
        const auto set = s.select();
        for (std::size_t step = 0; step < U; ++step) {
          auto perm = Arms(s.rr_index().begin(), s.rr_index().end());
          std::sort(perm.begin(), perm.end());
          for (std::size_t i = 0; i < U; ++i) ASSERT_EQ(perm[i], i);
          std::vector<double> r(U);
          for (auto& x : r) x = reward(gen);
          s.observe(s.schedule(set), r);
        }
        s.finalize_block();
        std::uint64_t total = 0;
        for (std::size_t a = 0; a < K; ++a) {
          total += s.blocks_played(a);
          EXPECT_EQ(s.ucb(a).has_value(), s.blocks_played(a) > 0);
        }
        EXPECT_EQ(total, static_cast<std::uint64_t>(b) * U);
      }
    }
  }

  // With b and U fixed: UCB increases with the reward sum, and the bonus
  // shrinks as the arm's block count grows. Plays are forced via observe().
  auto run = [](const std::vector<std::size_t>& arms, double reward) {
    eb::EgalUcbState st(2, 1);
    for (std::size_t a : arms) {
      st.observe({{a}}, std::vector<double>{a == 0 ? reward : 0.0});
      st.finalize_block();
    }
    return st;
  };
  EXPECT_LT(*run({0, 1, 0, 1, 1, 1}, 0.2).ucb(0), *run({0, 1, 0, 1, 1, 1}, 0.4).ucb(0));
  const double fewer = *run({0, 1, 0, 1, 1, 1}, 0.0).ucb(0);
  const double more = *run({0, 1, 0, 1, 0, 1}, 0.0).ucb(0);
  EXPECT_GT(fewer, more);
}

TEST(OracleSelect, Examples) {
  EXPECT_EQ(eb::oracle_select(eb::EgalMabInstance::bernoulli(std::vector<double>{0.9, 0.5, 0.2}), 2), (Arms{0, 1}));
  EXPECT_EQ(eb::oracle_select(eb::EgalMabInstance::bernoulli(std::vector<double>{0.5, 0.5}), 1), (Arms{0}));
  EXPECT_EQ(eb::oracle_select(eb::EgalMabInstance::bernoulli(std::vector<double>{0.2, 0.9}), 1), (Arms{1}));
}

TEST(RandomSelect, FullAndUniform) {
  eb::Rng rng(1);
  EXPECT_EQ(eb::random_select(3, 3, rng), (Arms{0, 1, 2}));
  EXPECT_EQ(eb::random_select(5, 5, rng), (Arms{0, 1, 2, 3, 4}));
  EXPECT_THROW(eb::random_select(2, 3, rng), eb::DomainError);

  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) first += eb::random_select(2, 1, rng)[0] == 0;
  EXPECT_NEAR(static_cast<double>(first) / n, 0.5, 0.01);

  for (int i = 0; i < 1000; ++i) {
    const auto s = eb::random_select(8, 3, rng);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
  }

  eb::Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(eb::random_select(10, 4, a), eb::random_select(10, 4, b));
}

TEST(PolicyKind, NamesRoundTrip) {
  for (auto k : {eb::PolicyKind::EgalUcb, eb::PolicyKind::OracleRoundRobin, eb::PolicyKind::RandomAssignment}) {
    EXPECT_EQ(eb::parse_policy_kind(eb::to_string(k)), k);
  }
  EXPECT_FALSE(eb::parse_policy_kind("thompson"));
}
