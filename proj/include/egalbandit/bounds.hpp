#pragma once

// Closed-form regret bounds for EgalUCB, the confidence radius, and the pair
// of Gaussian instances used by the policy-independent lower bound.
// All logarithms are natural.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "egalbandit/core.hpp"

namespace egalbandit {

/// sqrt(6 ln(b U) / (b' U)): radius after playing an arm for b' blocks by block b.
inline double confidence_radius(std::uint64_t block, std::uint64_t blocks_played, std::uint64_t num_users) {
  if (block == 0 || blocks_played == 0 || num_users == 0) {
    throw DomainError("confidence radius needs b, b', U >= 1");
  }
  return std::sqrt(6.0 * std::log(static_cast<double>(block * num_users)) /
                   static_cast<double>(blocks_played * num_users));
}

/// 2136 (K-U) ln T / delta_min + 4 K delta_max / U.
inline double dependent_upper_bound(std::size_t K, std::size_t U, std::uint64_t T, double delta_min,
                                    double delta_max) {
  if (U == 0 || U >= K) throw DomainError("problem-dependent bound needs 1 <= U < K");
  if (T < 2) throw DomainError("problem-dependent bound needs T >= 2");
  if (!(delta_min > 0.0)) throw DomainError("problem-dependent bound needs delta_min > 0");
  if (!(delta_max >= 0.0)) throw DomainError("delta_max must be >= 0");
  const double k = static_cast<double>(K), u = static_cast<double>(U);
  return 2136.0 * (k - u) * std::log(static_cast<double>(T)) / delta_min + 4.0 * k * delta_max / u;
}

/// sqrt(8544 (K-U) T ln T / U) + 4 K min(U, K-U) / U.
inline double independent_upper_bound(std::size_t K, std::size_t U, std::uint64_t T) {
  check_users(K, U);
  if (T < 2) throw DomainError("problem-independent bound needs T >= 2");
  const double k = static_cast<double>(K), u = static_cast<double>(U);
  const double t = static_cast<double>(T);
  const double spare = static_cast<double>(std::min(U, K - U));
  return std::sqrt(8544.0 * (k - u) * t * std::log(t) / u) + 4.0 * k * spare / u;
}

inline void check_lower_bound_hypothesis(std::size_t K, std::size_t U) {
  if (U == 0 || K < 2 * U) {
    throw DomainError("lower bound requires K >= 2U (got K=" + std::to_string(K) +
                      ", U=" + std::to_string(U) + ")");
  }
}

/// sqrt((K-U) T) / (76 U); holds for every policy on some Gaussian instance.
inline double lower_bound_value(std::size_t K, std::size_t U, std::uint64_t T) {
  check_lower_bound_hypothesis(K, U);
  if (T == 0) throw DomainError("lower bound needs T >= 1");
  return std::sqrt(static_cast<double>(K - U) * static_cast<double>(T)) / (76.0 * static_cast<double>(U));
}

struct BoundReport {
  std::size_t num_arms = 0;
  std::size_t num_users = 0;
  std::uint64_t horizon = 0;
  std::optional<double> delta_min;
  std::optional<double> delta_max;

  /// Present only when delta_min is defined and positive and delta_max is known.
  std::optional<double> dependent_upper;
  double independent_upper = 0.0;
  /// Present only when K >= 2U.
  std::optional<double> lower;
};

inline BoundReport bound_report(std::size_t K, std::size_t U, std::uint64_t T, std::optional<double> delta_min,
                                std::optional<double> delta_max) {
  BoundReport r;
  r.num_arms = K;
  r.num_users = U;
  r.horizon = T;
  r.delta_min = delta_min;
  r.delta_max = delta_max;
  r.independent_upper = independent_upper_bound(K, U, T);
  if (delta_min && *delta_min > 0.0 && delta_max && U < K) {
    r.dependent_upper = dependent_upper_bound(K, U, T, *delta_min, *delta_max);
  }
  if (K >= 2 * U) r.lower = lower_bound_value(K, U, T);
  return r;
}

/// Wires the instance's gaps into bound_report.
inline BoundReport bound_report(const EgalMabInstance& instance, std::size_t U, std::uint64_t T) {
  const auto g = gap_summary(instance, U);
  return bound_report(instance.num_arms(), U, T, g.delta_min, g.delta_max);
}

struct HardInstance {
  EgalMabInstance instance;
  double delta;
};

/// Unit-variance Gaussian arms: mean delta on arms [0, U), zero elsewhere, with
/// delta = sqrt((K-U) / (8 T U^2)).
inline HardInstance hard_instance(std::size_t K, std::size_t U, std::uint64_t T) {
  check_lower_bound_hypothesis(K, U);
  if (T == 0) throw DomainError("hard instance needs T >= 1");
  const double u = static_cast<double>(U);
  const double delta = std::sqrt(static_cast<double>(K - U) / (8.0 * static_cast<double>(T) * u * u));
  if (delta > 1.0) {
    throw DomainError("hard instance means leave [0, 1]; need T >= (K-U)/(8U^2)");
  }
  std::vector<double> means(K, 0.0);
  std::fill_n(means.begin(), U, delta);
  return HardInstance{EgalMabInstance::gaussian(means, 1.0), delta};
}

struct PartnerInstance {
  EgalMabInstance instance;
  /// The U least-played arms outside [0, U), ascending.
  std::vector<std::size_t> partner_set;
};

/// Least-played size-U subset of the sub-optimal arms [U, K). Among subsets
/// with the minimal summed count the lexicographically smallest is returned,
/// which is the count-then-index greedy choice.
inline std::vector<std::size_t> least_played_set(std::span<const std::uint64_t> play_counts, std::size_t U) {
  const std::size_t K = play_counts.size();
  check_lower_bound_hypothesis(K, U);
  std::vector<std::size_t> candidates(K - U);
  std::iota(candidates.begin(), candidates.end(), U);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t x, std::size_t y) { return play_counts[x] < play_counts[y]; });
  candidates.resize(U);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

/// The alternative instance: mean 2*delta on the least-played sub-optimal set,
/// nu's means elsewhere, unit variance throughout.
inline PartnerInstance adversarial_partner(const EgalMabInstance& nu, double delta, std::size_t U,
                                           std::span<const std::uint64_t> play_counts) {
  const std::size_t K = nu.num_arms();
  check_lower_bound_hypothesis(K, U);
  if (play_counts.size() != K) throw DomainError("play counts must cover all K arms");
  auto partner = least_played_set(play_counts, U);
  std::vector<double> means(nu.means().begin(), nu.means().end());
  for (std::size_t a : partner) means[a] = 2.0 * delta;
  return PartnerInstance{EgalMabInstance::gaussian(means, 1.0), std::move(partner)};
}

}  // namespace egalbandit
