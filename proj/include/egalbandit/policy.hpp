#pragma once

// EgalUCB: per block, pick the U arms with the highest upper confidence
// bounds and rotate them round-robin across the U users so that every user
// plays every chosen arm exactly once. Oracle and uniform-random baselines
// share the same block/rotation structure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egalbandit/core.hpp"

namespace egalbandit {

/// An upper confidence bound; nullopt marks an unplayed arm, which ranks above
/// every finite value.
using UcbValue = std::optional<double>;

/// Strict ranking used for arm-set selection: unplayed first, then larger
/// finite UCB, ties by ascending arm index.
inline bool ucb_ranks_above(std::span<const UcbValue> ucbs, std::size_t i, std::size_t j) {
  const auto& x = ucbs[i];
  const auto& y = ucbs[j];
  if (x.has_value() != y.has_value()) return !x.has_value();
  if (x && *x != *y) return *x > *y;
  return i < j;
}

/// The U highest-ranked arms, returned in ascending index order.
inline std::vector<std::size_t> top_ucb_set(std::span<const UcbValue> ucbs, std::size_t num_users) {
  check_users(ucbs.size(), num_users);
  std::vector<std::size_t> idx(ucbs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto cmp = [&](std::size_t i, std::size_t j) { return ucb_ranks_above(ucbs, i, j); };
  const auto cut = idx.begin() + static_cast<std::ptrdiff_t>(num_users);
  if (num_users < idx.size()) std::nth_element(idx.begin(), cut - 1, idx.end(), cmp);
  idx.erase(cut, idx.end());
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Assignment for the given 0-based step of a block: the index vector starts
/// as the identity and is circularly shifted right once per step, so user u
/// plays arm_set[(u - step) mod U].
inline Assignment round_robin_assignment(std::span<const std::size_t> arm_set, std::size_t step) {
  const std::size_t U = arm_set.size();
  if (U == 0) throw DomainError("empty arm set");
  if (step >= U) throw DomainError("step in block must be < U");
  Assignment out;
  out.user_to_arm.resize(U);
  for (std::size_t u = 0; u < U; ++u) out.user_to_arm[u] = arm_set[(u + U - step) % U];
  return out;
}

/// Mutable statistics of one EgalUCB episode. Single owner; not shared
/// between threads.
class EgalUcbState {
 public:
  EgalUcbState(std::size_t num_arms, std::size_t num_users)
      : arms_(num_arms), users_(num_users) {
    check_users(num_arms, num_users);
    blocks_played_.assign(arms_, 0);
    cum_reward_.assign(arms_, 0.0);
    ucb_.assign(arms_, std::nullopt);
    in_block_.assign(arms_, false);
    rr_index_.resize(users_);
    std::iota(rr_index_.begin(), rr_index_.end(), std::size_t{0});
  }

  std::size_t num_arms() const { return arms_; }
  std::size_t num_users() const { return users_; }
  /// Completed blocks b.
  std::uint64_t block() const { return block_; }
  std::size_t steps_in_block() const { return steps_in_block_; }

  std::uint64_t blocks_played(std::size_t a) const { return blocks_played_.at(a); }
  double cum_reward(std::size_t a) const { return cum_reward_.at(a); }
  UcbValue ucb(std::size_t a) const { return ucb_.at(a); }
  std::span<const UcbValue> ucbs() const { return ucb_; }
  std::span<const std::size_t> rr_index() const { return rr_index_; }

  /// Arm set for the next block.
  std::vector<std::size_t> select() const { return top_ucb_set(ucb_, users_); }

  /// Assignment for the current step, from the round-robin index vector.
  Assignment schedule(std::span<const std::size_t> arm_set) const {
    if (arm_set.size() != users_) throw DomainError("arm set must contain exactly U arms");
    Assignment out;
    out.user_to_arm.resize(users_);
    for (std::size_t u = 0; u < users_; ++u) out.user_to_arm[u] = arm_set[rr_index_[u]];
    return out;
  }

  /// Adds each user's reward to the cumulative reward of the arm it played,
  /// then advances the round-robin index vector.
  void observe(const Assignment& assignment, std::span<const double> rewards) {
    if (assignment.user_to_arm.size() != users_ || rewards.size() != users_) {
      throw DomainError("assignment and rewards must both have length U=" + std::to_string(users_));
    }
    if (auto v = validate_assignment(assignment, arms_, users_)) throw DomainError(v->message);
    if (steps_in_block_ == users_) throw StateError("block complete; finalize_block() before observing");
    if (steps_in_block_ == 0) {
      block_arms_ = assignment.user_to_arm;
      for (std::size_t a : block_arms_) in_block_[a] = true;
    } else {
      for (std::size_t a : assignment.user_to_arm) {
        if (!in_block_[a]) throw StateError("arm " + std::to_string(a + 1) + " is not in the current block's set");
      }
    }
    for (std::size_t u = 0; u < users_; ++u) cum_reward_[assignment.user_to_arm[u]] += rewards[u];
    std::rotate(rr_index_.rbegin(), rr_index_.rbegin() + 1, rr_index_.rend());
    ++steps_in_block_;
  }

  /// Closes a block of exactly U observed steps: bumps the block counter and
  /// the played arms' block counts, then recomputes every played arm's UCB
  /// S / (B U) + sqrt(6 ln(b U) / (B U)).
  void finalize_block() {
    if (steps_in_block_ != users_) {
      throw StateError("finalize_block() called after " + std::to_string(steps_in_block_) + " of " +
                       std::to_string(users_) + " steps");
    }
    ++block_;
    for (std::size_t a : block_arms_) {
      ++blocks_played_[a];
      in_block_[a] = false;
    }
    block_arms_.clear();
    steps_in_block_ = 0;
    std::iota(rr_index_.begin(), rr_index_.end(), std::size_t{0});

    const double log_steps = std::log(static_cast<double>(block_ * users_));
    for (std::size_t a = 0; a < arms_; ++a) {
      if (blocks_played_[a] == 0) continue;
      const double pulls = static_cast<double>(blocks_played_[a] * users_);
      ucb_[a] = cum_reward_[a] / pulls + std::sqrt(6.0 * log_steps / pulls);
    }
  }

 private:
  std::size_t arms_;
  std::size_t users_;
  std::uint64_t block_ = 0;
  std::size_t steps_in_block_ = 0;
  std::vector<std::uint64_t> blocks_played_;
  std::vector<double> cum_reward_;
  std::vector<UcbValue> ucb_;
  std::vector<std::size_t> rr_index_;
  std::vector<std::size_t> block_arms_;
  std::vector<bool> in_block_;
};

enum class PolicyKind { EgalUcb, OracleRoundRobin, RandomAssignment };

inline std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::EgalUcb: return "egalucb";
    case PolicyKind::OracleRoundRobin: return "oracle";
    case PolicyKind::RandomAssignment: return "random";
  }
  return "unknown";
}

inline std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  if (name == "egalucb") return PolicyKind::EgalUcb;
  if (name == "oracle") return PolicyKind::OracleRoundRobin;
  if (name == "random") return PolicyKind::RandomAssignment;
  return std::nullopt;
}

/// Top-U arms by true mean, ascending index order.
inline std::vector<std::size_t> oracle_select(const EgalMabInstance& instance, std::size_t num_users) {
  return gap_summary(instance, num_users).top_set;
}

/// Uniformly random size-U subset of the K arms, ascending index order.
inline std::vector<std::size_t> random_select(std::size_t num_arms, std::size_t num_users, Rng& rng) {
  check_users(num_arms, num_users);
  std::vector<std::size_t> all(num_arms);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (num_users == num_arms) return all;
  std::vector<std::size_t> out;
  out.reserve(num_users);
  std::sample(all.begin(), all.end(), std::back_inserter(out), num_users, rng);
  return out;
}

}  // namespace egalbandit
