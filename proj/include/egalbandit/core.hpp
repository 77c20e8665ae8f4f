#pragma once

// Domain types for egalitarian multi-user bandits: arm reward laws, instances,
// collision-free assignments, and the gap quantities derived from true means.
//
// Arm indices are 0-based throughout the C++ API. Files and reports written by
// the CLI use 1-based indices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "egalbandit/csv.hpp"

namespace egalbandit {

/// Precondition violated by a caller-supplied value (bad U, bad index, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation invoked in the wrong state (e.g. finalizing a block mid-way).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// File missing or unparsable input data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The random stream owned by one episode.
using Rng = std::mt19937_64;

struct Gaussian {
  double mean;
  double stddev;
};

struct Bernoulli {
  double mean;
};

struct Empirical {
  std::vector<double> samples;
};

/// Reward law of a single arm. Validated on construction; immutable afterwards.
class ArmDistribution {
 public:
  using Variant = std::variant<Gaussian, Bernoulli, Empirical>;

  static ArmDistribution gaussian(double mean, double stddev) {
    if (!std::isfinite(mean) || !std::isfinite(stddev) || stddev < 0.0) {
      throw DomainError("gaussian arm requires finite mean and std >= 0");
    }
    return ArmDistribution(Gaussian{mean, stddev});
  }

  static ArmDistribution bernoulli(double mean) {
    if (!(mean >= 0.0 && mean <= 1.0)) {
      throw DomainError("bernoulli mean must lie in [0, 1]");
    }
    return ArmDistribution(Bernoulli{mean});
  }

  static ArmDistribution empirical(std::vector<double> samples) {
    if (samples.empty()) {
      throw DomainError("empirical arm requires at least one sample");
    }
    return ArmDistribution(Empirical{std::move(samples)});
  }

  /// Exact expectation: the parameter for parametric laws, the arithmetic
  /// average of the stored samples for empirical ones.
  double mean() const { return mean_; }

  /// One draw. Empirical arms draw uniformly with replacement.
  double sample(Rng& rng) const {
    return std::visit(
        [&rng](const auto& law) -> double {
          using T = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<T, Gaussian>) {
            if (law.stddev == 0.0) return law.mean;
            return std::normal_distribution<double>(law.mean, law.stddev)(rng);
          } else if constexpr (std::is_same_v<T, Bernoulli>) {
            return std::bernoulli_distribution(law.mean)(rng) ? 1.0 : 0.0;
          } else {
            std::uniform_int_distribution<std::size_t> pick(0, law.samples.size() - 1);
            return law.samples[pick(rng)];
          }
        },
        law_);
  }

  const Variant& law() const { return law_; }

  /// Short kind tag used in instance files: gaussian, bernoulli, empirical.
  std::string kind() const {
    switch (law_.index()) {
      case 0: return "gaussian";
      case 1: return "bernoulli";
      default: return "empirical";
    }
  }

 private:
  explicit ArmDistribution(Variant law) : law_(std::move(law)), mean_(compute_mean(law_)) {}

  static double compute_mean(const Variant& law) {
    if (const auto* g = std::get_if<Gaussian>(&law)) return g->mean;
    if (const auto* b = std::get_if<Bernoulli>(&law)) return b->mean;
    const auto& s = std::get<Empirical>(law).samples;
    return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  }

  Variant law_;
  double mean_;
};

/// The environment: an ordered list of K >= 1 arms. No ordering of the means
/// is assumed.
class EgalMabInstance {
 public:
  explicit EgalMabInstance(std::vector<ArmDistribution> arms) : arms_(std::move(arms)) {
    if (arms_.empty()) throw DomainError("instance needs at least one arm");
    means_.reserve(arms_.size());
    for (const auto& a : arms_) means_.push_back(a.mean());
  }

  std::size_t num_arms() const { return arms_.size(); }
  const ArmDistribution& arm(std::size_t a) const { return arms_.at(a); }
  const std::vector<ArmDistribution>& arms() const { return arms_; }
  std::span<const double> means() const { return means_; }

  static EgalMabInstance bernoulli(std::span<const double> means) {
    std::vector<ArmDistribution> arms;
    for (double m : means) arms.push_back(ArmDistribution::bernoulli(m));
    return EgalMabInstance(std::move(arms));
  }

  static EgalMabInstance gaussian(std::span<const double> means, double stddev) {
    std::vector<ArmDistribution> arms;
    for (double m : means) arms.push_back(ArmDistribution::gaussian(m, stddev));
    return EgalMabInstance(std::move(arms));
  }

 private:
  std::vector<ArmDistribution> arms_;
  std::vector<double> means_;
};

/// user_to_arm[u] is the arm played by user u during one step.
struct Assignment {
  std::vector<std::size_t> user_to_arm;

  bool operator==(const Assignment&) const = default;
};

struct AssignmentViolation {
  enum class Kind { WrongLength, OutOfRange, DuplicateArm };
  Kind kind;
  std::size_t position;  // offending user slot
  std::string message;
};

/// Returns the first violation (length, then per-user range / duplicate
/// checks in user order) or nullopt when the assignment is collision-free.
inline std::optional<AssignmentViolation> validate_assignment(const Assignment& a,
                                                              std::size_t num_arms,
                                                              std::size_t num_users) {
  using Kind = AssignmentViolation::Kind;
  if (a.user_to_arm.size() != num_users) {
    return AssignmentViolation{Kind::WrongLength, a.user_to_arm.size(),
                               "expected " + std::to_string(num_users) + " users, got " +
                                   std::to_string(a.user_to_arm.size())};
  }
  std::vector<bool> seen(num_arms, false);
  for (std::size_t u = 0; u < a.user_to_arm.size(); ++u) {
    const std::size_t arm = a.user_to_arm[u];
    if (arm >= num_arms) {
      return AssignmentViolation{Kind::OutOfRange, u,
                                 "arm index " + std::to_string(arm + 1) + " out of range"};
    }
    if (seen[arm]) {
      return AssignmentViolation{Kind::DuplicateArm, u,
                                 "duplicate arm " + std::to_string(arm + 1)};
    }
    seen[arm] = true;
  }
  return std::nullopt;
}

/// Sum of values taken in descending order. Two index sets carrying the same
/// multiset of values therefore produce bit-identical sums.
inline double canonical_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end(), std::greater<>());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

/// Arm indices ordered by descending mean, ties by ascending index.
inline std::vector<std::size_t> arms_by_mean(const EgalMabInstance& instance) {
  const auto means = instance.means();
  std::vector<std::size_t> order(means.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return means[x] > means[y]; });
  return order;
}

struct GapSummary {
  double mu_star = 0.0;
  /// Absent when U = K or the U-th and (U+1)-th largest means coincide.
  std::optional<double> delta_min;
  double delta_max = 0.0;
  /// Indices of the U largest means, ascending.
  std::vector<std::size_t> top_set;
};

inline void check_users(std::size_t num_arms, std::size_t num_users) {
  if (num_users == 0 || num_users > num_arms) {
    throw DomainError("number of users U=" + std::to_string(num_users) +
                      " must satisfy 1 <= U <= K=" + std::to_string(num_arms));
  }
}

inline GapSummary gap_summary(const EgalMabInstance& instance, std::size_t num_users) {
  const std::size_t K = instance.num_arms();
  const std::size_t U = num_users;
  check_users(K, U);

  std::vector<double> sorted(instance.means().begin(), instance.means().end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());

  GapSummary g;
  const std::vector<double> top(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(U));
  const std::vector<double> bottom(sorted.end() - static_cast<std::ptrdiff_t>(U), sorted.end());
  g.mu_star = canonical_sum(top);
  g.delta_max = (top == bottom) ? 0.0 : std::max(0.0, g.mu_star - canonical_sum(bottom));
  if (U < K && sorted[U - 1] != sorted[U]) g.delta_min = sorted[U - 1] - sorted[U];

  auto order = arms_by_mean(instance);
  g.top_set.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(U));
  std::sort(g.top_set.begin(), g.top_set.end());
  return g;
}

/// Precomputes the top-U means of an instance so that the gap of many arm
/// sets can be evaluated cheaply. Gaps are exactly zero whenever the set's
/// means form the same multiset as the top-U means.
class GapEvaluator {
 public:
  GapEvaluator(const EgalMabInstance& instance, std::size_t num_users)
      : means_(instance.means().begin(), instance.means().end()), users_(num_users) {
    check_users(means_.size(), users_);
    top_ = means_;
    std::sort(top_.begin(), top_.end(), std::greater<>());
    top_.resize(users_);
    mu_star_ = std::accumulate(top_.begin(), top_.end(), 0.0);
  }

  double mu_star() const { return mu_star_; }

  double gap(std::span<const std::size_t> arm_set) const {
    if (arm_set.size() != users_) {
      throw DomainError("arm set must contain exactly U=" + std::to_string(users_) + " arms");
    }
    std::vector<std::size_t> ids(arm_set.begin(), arm_set.end());
    std::sort(ids.begin(), ids.end());
    std::vector<double> chosen;
    chosen.reserve(users_);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] >= means_.size()) {
        throw DomainError("arm index " + std::to_string(ids[i] + 1) + " out of range");
      }
      if (i > 0 && ids[i] == ids[i - 1]) {
        throw DomainError("duplicate arm " + std::to_string(ids[i] + 1) + " in arm set");
      }
      chosen.push_back(means_[ids[i]]);
    }
    std::sort(chosen.begin(), chosen.end(), std::greater<>());
    if (chosen == top_) return 0.0;
    return std::max(0.0, mu_star_ - std::accumulate(chosen.begin(), chosen.end(), 0.0));
  }

 private:
  std::vector<double> means_;
  std::size_t users_;
  std::vector<double> top_;
  double mu_star_ = 0.0;
};

/// Sub-optimality gap of arm_set: mu_star minus the set's mean-sum.
inline double suboptimality_gap(const EgalMabInstance& instance, std::size_t num_users,
                                std::span<const std::size_t> arm_set) {
  return GapEvaluator(instance, num_users).gap(arm_set);
}

/// Reads a one-column numeric sample file. A non-numeric first line is taken
/// as a header; any later non-numeric line is an error.
inline std::vector<double> load_sample_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open sample file " + path.string());
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cell = csv::trim(line);
    if (cell.empty()) continue;
    if (auto v = csv::parse_double(cell)) {
      out.push_back(*v);
    } else if (line_no != 1) {
      throw InputError(path.string() + ": line " + std::to_string(line_no) +
                       ": non-numeric sample '" + std::string(cell) + "'");
    }
  }
  if (out.empty()) throw InputError(path.string() + ": no samples");
  return out;
}

/// Loads an instance file with header `arm_id,kind,p1,p2`. Arms keep file row
/// order. `empirical-ref` paths resolve relative to the instance file.
inline EgalMabInstance load_instance_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open instance file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  const auto header = csv::split(line);
  const std::vector<std::string> expected{"arm_id", "kind", "p1", "p2"};
  if (header != expected) {
    throw InputError(path.string() + ": header must be arm_id,kind,p1,p2");
  }
  std::vector<ArmDistribution> arms;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    auto cells = csv::split(line);
    cells.resize(4);
    const auto where = path.string() + ": row " + std::to_string(row) + ": ";
    auto number = [&](const std::string& cell, const char* name) {
      auto v = csv::parse_double(cell);
      if (!v) throw InputError(where + name + " is not a number: '" + cell + "'");
      return *v;
    };
    try {
      if (cells[1] == "gaussian") {
        arms.push_back(ArmDistribution::gaussian(number(cells[2], "p1"), number(cells[3], "p2")));
      } else if (cells[1] == "bernoulli") {
        arms.push_back(ArmDistribution::bernoulli(number(cells[2], "p1")));
      } else if (cells[1] == "empirical-ref") {
        std::filesystem::path ref = cells[2];
        if (ref.is_relative()) ref = path.parent_path() / ref;
        arms.push_back(ArmDistribution::empirical(load_sample_file(ref)));
      } else {
        throw InputError(where + "unknown kind '" + cells[1] + "'");
      }
    } catch (const DomainError& e) {
      throw InputError(where + e.what());
    }
  }
  if (arms.empty()) throw InputError(path.string() + ": no arms");
  return EgalMabInstance(std::move(arms));
}

}  // namespace egalbandit
