#pragma once

// Seeded episode execution, egalitarian pseudo-regret accounting and
// replicated runs with pointwise aggregation.

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "egalbandit/core.hpp"
#include "egalbandit/policy.hpp"

namespace egalbandit {

/// One seeded episode. Curves hold one point per block boundary t = (b+1)U.
struct RunResult {
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  std::size_t num_users = 0;
  std::size_t num_arms = 0;
  PolicyKind policy = PolicyKind::EgalUcb;

  /// Arm set of block b occupies block_arms[b*U, (b+1)*U), ascending.
  std::vector<std::size_t> block_arms;
  /// Realized S_{u,t} at the end of block b: user_cum_reward[b*U + u].
  std::vector<double> user_cum_reward;
  std::vector<double> pseudo_regret;
  std::vector<double> min_user_cum_reward;
  /// Total pulls T_{a,T} of each arm over all users.
  std::vector<std::uint64_t> arm_plays;

  std::size_t num_blocks() const { return pseudo_regret.size(); }
  std::uint64_t time_at(std::size_t block) const { return (block + 1) * num_users; }

  std::span<const std::size_t> block_set(std::size_t b) const {
    return std::span<const std::size_t>(block_arms).subspan(b * num_users, num_users);
  }
  std::span<const double> users_at(std::size_t b) const {
    return std::span<const double>(user_cum_reward).subspan(b * num_users, num_users);
  }
};

inline void check_horizon(std::uint64_t horizon, std::size_t num_users) {
  if (horizon < num_users || horizon % num_users != 0) {
    throw DomainError("horizon not divisible by users: T=" + std::to_string(horizon) +
                      ", U=" + std::to_string(num_users));
  }
}

/// Runs B = T/U blocks of the given policy. Rewards are drawn from a single
/// stream seeded with `seed`, users in ascending order within each step, so
/// identical arguments give bit-identical results.
inline RunResult run_episode(const EgalMabInstance& instance, std::size_t num_users,
                             std::uint64_t horizon, PolicyKind kind, std::uint64_t seed) {
  const std::size_t K = instance.num_arms();
  const std::size_t U = num_users;
  check_users(K, U);
  check_horizon(horizon, U);
  const std::size_t blocks = static_cast<std::size_t>(horizon / U);

  RunResult run;
  run.seed = seed;
  run.horizon = horizon;
  run.num_users = U;
  run.num_arms = K;
  run.policy = kind;
  run.block_arms.reserve(blocks * U);
  run.user_cum_reward.reserve(blocks * U);
  run.pseudo_regret.reserve(blocks);
  run.min_user_cum_reward.reserve(blocks);
  run.arm_plays.assign(K, 0);

  Rng rng(seed);
  const GapEvaluator gaps(instance, U);
  std::optional<EgalUcbState> ucb;
  std::vector<std::size_t> fixed_set;
  if (kind == PolicyKind::EgalUcb) ucb.emplace(K, U);
  if (kind == PolicyKind::OracleRoundRobin) fixed_set = oracle_select(instance, U);

  std::vector<double> user_sum(U, 0.0);
  std::vector<double> rewards(U, 0.0);
  double regret = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<std::size_t> arm_set;
    switch (kind) {
      case PolicyKind::EgalUcb: arm_set = ucb->select(); break;
      case PolicyKind::OracleRoundRobin: arm_set = fixed_set; break;
      case PolicyKind::RandomAssignment: arm_set = random_select(K, U, rng); break;
    }
    for (std::size_t step = 0; step < U; ++step) {
      const Assignment assignment =
          ucb ? ucb->schedule(arm_set) : round_robin_assignment(arm_set, step);
      for (std::size_t u = 0; u < U; ++u) {
        const std::size_t a = assignment.user_to_arm[u];
        rewards[u] = instance.arm(a).sample(rng);
        user_sum[u] += rewards[u];
        ++run.arm_plays[a];
      }
      if (ucb) ucb->observe(assignment, rewards);
    }
    if (ucb) ucb->finalize_block();

    regret += gaps.gap(arm_set);
    run.block_arms.insert(run.block_arms.end(), arm_set.begin(), arm_set.end());
    run.user_cum_reward.insert(run.user_cum_reward.end(), user_sum.begin(), user_sum.end());
    run.pseudo_regret.push_back(regret);
    run.min_user_cum_reward.push_back(*std::min_element(user_sum.begin(), user_sum.end()));
  }
  return run;
}

/// Pseudo-regret at each block boundary, t*mu_star/U - min_u sum_{s<=t} mu_{A_{u,s}}.
/// Every policy here plays each block's set once per user, so the per-user
/// true-mean sums coincide at boundaries and the curve is the running sum of
/// the blocks' sub-optimality gaps.
inline std::vector<double> pseudo_regret_curve(const RunResult& run, const EgalMabInstance& instance,
                                               std::size_t num_users) {
  if (run.num_users != num_users || run.num_arms != instance.num_arms()) {
    throw DomainError("run was not produced on this instance / user count");
  }
  const GapEvaluator gaps(instance, num_users);
  std::vector<double> curve;
  curve.reserve(run.num_blocks());
  double regret = 0.0;
  for (std::size_t b = 0; b < run.num_blocks(); ++b) {
    regret += gaps.gap(run.block_set(b));
    curve.push_back(regret);
  }
  return curve;
}

/// Pointwise statistics of pseudo-regret over replicated runs.
struct AggregateResult {
  PolicyKind policy = PolicyKind::EgalUcb;
  std::size_t num_users = 0;
  std::uint64_t horizon = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> mean_regret;
  std::vector<double> min_regret;
  std::vector<double> max_regret;
  /// Mean over runs of the realized least-rewarded user's cumulative reward.
  std::vector<double> mean_min_user_reward;

  std::size_t num_runs() const { return seeds.size(); }
  std::size_t num_blocks() const { return mean_regret.size(); }
  std::uint64_t time_at(std::size_t block) const { return (block + 1) * num_users; }
  double final_mean_regret() const { return mean_regret.back(); }
};

/// Deterministic reduction: runs are ordered by seed before summation.
inline AggregateResult aggregate(std::span<const RunResult> runs) {
  if (runs.empty()) throw DomainError("cannot aggregate zero runs");
  std::vector<const RunResult*> order;
  for (const auto& r : runs) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](auto* x, auto* y) { return x->seed < y->seed; });

  const auto& first = *order.front();
  const std::size_t n = first.num_blocks();
  AggregateResult agg;
  agg.policy = first.policy;
  agg.num_users = first.num_users;
  agg.horizon = first.horizon;
  agg.mean_regret.assign(n, 0.0);
  agg.min_regret.assign(n, std::numeric_limits<double>::infinity());
  agg.max_regret.assign(n, -std::numeric_limits<double>::infinity());
  agg.mean_min_user_reward.assign(n, 0.0);
  for (const auto* r : order) {
    if (r->num_blocks() != n || r->num_users != first.num_users || r->policy != first.policy) {
      throw DomainError("runs disagree on shape or policy");
    }
    agg.seeds.push_back(r->seed);
    for (std::size_t b = 0; b < n; ++b) {
      const double v = r->pseudo_regret[b];
      agg.mean_regret[b] += v;
      agg.min_regret[b] = std::min(agg.min_regret[b], v);
      agg.max_regret[b] = std::max(agg.max_regret[b], v);
      agg.mean_min_user_reward[b] += r->min_user_cum_reward[b];
    }
  }
  const double count = static_cast<double>(order.size());
  for (std::size_t b = 0; b < n; ++b) {
    // Clamp guards the mean against rounding outside [min, max].
    agg.mean_regret[b] = std::clamp(agg.mean_regret[b] / count, agg.min_regret[b], agg.max_regret[b]);
    agg.mean_min_user_reward[b] /= count;
  }
  return agg;
}

inline std::size_t default_thread_count() {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs seeds base_seed, base_seed+1, ... in parallel. `instance_for(seed)`
/// yields the environment of each run (a fixed instance or one generated per
/// seed). Results are indexed by run, independent of scheduling.
template <class InstanceFor>
  requires std::invocable<InstanceFor&, std::uint64_t>
std::vector<RunResult> run_replicates(InstanceFor&& instance_for, std::size_t num_users,
                                      std::uint64_t horizon, PolicyKind kind, std::size_t n_runs,
                                      std::uint64_t base_seed, std::size_t threads = 0) {
  if (n_runs == 0) throw DomainError("n_runs must be >= 1");
  if (threads == 0) threads = default_thread_count();
  threads = std::min(threads, n_runs);

  std::vector<RunResult> runs(n_runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n_runs; i = next++) {
      try {
        const std::uint64_t seed = base_seed + i;
        decltype(auto) instance = instance_for(seed);
        runs[i] = run_episode(instance, num_users, horizon, kind, seed);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_runs;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return runs;
}

inline std::vector<RunResult> run_replicates(const EgalMabInstance& instance, std::size_t num_users,
                                             std::uint64_t horizon, PolicyKind kind, std::size_t n_runs,
                                             std::uint64_t base_seed, std::size_t threads = 0) {
  return run_replicates([&instance](std::uint64_t) -> const EgalMabInstance& { return instance; },
                        num_users, horizon, kind, n_runs, base_seed, threads);
}

inline AggregateResult replicate(const EgalMabInstance& instance, std::size_t num_users,
                                 std::uint64_t horizon, PolicyKind kind, std::size_t n_runs,
                                 std::uint64_t base_seed, std::size_t threads = 0) {
  const auto runs = run_replicates(instance, num_users, horizon, kind, n_runs, base_seed, threads);
  return aggregate(runs);
}

/// Least-squares slope of ln(y) on ln(x).
inline double fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw DomainError("slope fit needs at least 2 points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("slope fit needs strictly positive x and y");
    mx += std::log(x);
    my += std::log(y);
  }
  const double n = static_cast<double>(points.size());
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxy += dx * (std::log(y) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DomainError("slope fit needs at least 2 distinct x values");
  return sxy / sxx;
}

}  // namespace egalbandit
