#pragma once

// Builds empirical instances from (id, value) trace or ratings CSVs: each
// distinct id becomes an arm whose reward is a uniform draw from that id's
// recorded values.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "egalbandit/core.hpp"
#include "egalbandit/csv.hpp"

namespace egalbandit {

struct TraceSpec {
  enum class Selection { TopCount, Random };

  std::filesystem::path path;
  std::string id_column;
  std::string value_column;
  /// Reward is the negated value (cost-like fields such as cycles per instruction).
  bool negate = false;
  std::size_t top_k = 1;
  std::optional<std::size_t> max_rows;
  Selection selection = Selection::TopCount;
  std::uint64_t selection_seed = 0;
};

struct TraceInstance {
  EgalMabInstance instance;
  /// original_ids[a] is the id behind arm a.
  std::vector<std::string> original_ids;
  std::size_t rows_parsed = 0;
};

/// Groups values by id and keeps top_k ids, either the most frequent (ties by
/// first appearance) or a seeded uniform sample (kept in first-appearance
/// order).
inline TraceInstance load_trace_instance(const TraceSpec& spec) {
  if (spec.top_k == 0) throw DomainError("top_k must be >= 1");
  std::ifstream in(spec.path);
  if (!in) throw InputError("cannot open trace file " + spec.path.string());

  std::string line;
  if (!std::getline(in, line)) throw InputError(spec.path.string() + ": missing header");
  const auto header = csv::split(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(spec.path.string() + ": no column named '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = column(spec.id_column);
  const std::size_t value_col = column(spec.value_column);
  const std::size_t needed = std::max(id_col, value_col) + 1;

  std::vector<std::string> ids;  // first-appearance order
  std::vector<std::vector<double>> values;
  std::unordered_map<std::string, std::size_t> slot;
  std::size_t row = 0;
  while ((!spec.max_rows || row < *spec.max_rows) && std::getline(in, line)) {
    ++row;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    if (cells.size() < needed) {
      throw InputError(spec.path.string() + ": row " + std::to_string(row) + ": expected at least " +
                       std::to_string(needed) + " cells");
    }
    const auto v = csv::parse_double(cells[value_col]);
    if (!v) {
      throw InputError(spec.path.string() + ": row " + std::to_string(row) + ": non-numeric value '" +
                       cells[value_col] + "'");
    }
    auto [it, inserted] = slot.try_emplace(cells[id_col], ids.size());
    if (inserted) {
      ids.push_back(cells[id_col]);
      values.emplace_back();
    }
    values[it->second].push_back(spec.negate ? -*v : *v);
  }

  if (ids.size() < spec.top_k) {
    throw InputError(spec.path.string() + ": insufficient distinct ids (" + std::to_string(ids.size()) +
                     " found, top_k=" + std::to_string(spec.top_k) + ")");
  }

  std::vector<std::size_t> keep(ids.size());
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (spec.selection == TraceSpec::Selection::TopCount) {
    std::stable_sort(keep.begin(), keep.end(),
                     [&](std::size_t x, std::size_t y) { return values[x].size() > values[y].size(); });
    keep.resize(spec.top_k);
  } else {
    std::vector<std::size_t> sampled;
    Rng rng(spec.selection_seed);
    std::sample(keep.begin(), keep.end(), std::back_inserter(sampled), spec.top_k, rng);
    keep = std::move(sampled);
  }

  std::vector<ArmDistribution> arms;
  std::vector<std::string> kept_ids;
  for (std::size_t i : keep) {
    arms.push_back(ArmDistribution::empirical(std::move(values[i])));
    kept_ids.push_back(ids[i]);
  }
  return TraceInstance{EgalMabInstance(std::move(arms)), std::move(kept_ids), row};
}

/// Writes `arm_index,original_id,n_samples,mean` rows (1-based arm index).
/// Parametric arms leave n_samples empty; missing ids default to the index.
inline void write_id_map(std::ostream& out, const EgalMabInstance& instance,
                         const std::vector<std::string>& original_ids = {}) {
  out << "arm_index,original_id,n_samples,mean\n";
  for (std::size_t a = 0; a < instance.num_arms(); ++a) {
    const auto& arm = instance.arm(a);
    out << (a + 1) << ',' << (a < original_ids.size() ? original_ids[a] : std::to_string(a + 1)) << ',';
    if (const auto* e = std::get_if<Empirical>(&arm.law())) out << e->samples.size();
    out << ',' << csv::format_double(arm.mean()) << '\n';
  }
}

/// Human-readable summary: a `key=value` gap line followed by the id-map table.
inline std::string instance_summary(const EgalMabInstance& instance, std::size_t num_users,
                                    const std::vector<std::string>& original_ids = {}) {
  const auto g = gap_summary(instance, num_users);
  std::ostringstream out;
  out << "K=" << instance.num_arms() << " U=" << num_users << " mu_star=" << csv::format_double(g.mu_star)
      << " delta_min=" << (g.delta_min ? csv::format_double(*g.delta_min) : std::string("undefined"))
      << " delta_max=" << csv::format_double(g.delta_max) << '\n';
  write_id_map(out, instance, original_ids);
  return out.str();
}

}  // namespace egalbandit
