#pragma once

// Configuration resolution and experiment orchestration behind the
// `egalbandit` command line tool.
//
// Settings come from flags and, optionally, a flat key=value config file
// (`--config`); flags win. Every output file starts with `#`-prefixed lines
// echoing the resolved settings, which can be fed back as a config file.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "egalbandit/bounds.hpp"
#include "egalbandit/core.hpp"
#include "egalbandit/csv.hpp"
#include "egalbandit/ingest.hpp"
#include "egalbandit/policy.hpp"
#include "egalbandit/simulator.hpp"

namespace egalbandit::cli {

/// Bad or missing command line / config settings.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by parse_config for --help; what() carries the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Simulate, SweepUsers, Bounds, IngestRun };

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "simulate") return Mode::Simulate;
  if (s == "sweep-users") return Mode::SweepUsers;
  if (s == "bounds") return Mode::Bounds;
  if (s == "ingest-run") return Mode::IngestRun;
  return std::nullopt;
}

/// Synthetic environment recipe from `--gen`, tokens joined with '+':
///   gaussian:SIGMA | bernoulli        reward family (default bernoulli)
///   two-level:HI,LO                   HI on arms 1..U, LO elsewhere (default 0.8,0.5)
///   uniform-means:LO,HI,SEED          means ~ U[LO,HI], redrawn per run from SEED + run index
///   hard                              the lower-bound Gaussian instance
struct GeneratorSpec {
  enum class Family { Bernoulli, Gaussian };
  enum class Means { TwoLevel, Uniform, Hard };

  Family family = Family::Bernoulli;
  double sigma = 1.0;
  Means means = Means::TwoLevel;
  double high = 0.8;
  double low = 0.5;
  double uniform_lo = 0.0;
  double uniform_hi = 1.0;
  std::uint64_t uniform_seed = 0;
};

inline GeneratorSpec parse_generator(const std::string& text) {
  GeneratorSpec g;
  std::stringstream tokens(text);
  std::string token;
  bool family_set = false, means_set = false;
  auto numbers = [&](const std::string& body, std::size_t count) {
    const auto cells = csv::split(body);
    std::vector<double> out;
    for (const auto& c : cells) {
      auto v = csv::parse_double(c);
      if (!v) throw UsageError("gen: '" + token + "' has non-numeric parameter '" + c + "'");
      out.push_back(*v);
    }
    if (out.size() != count) throw UsageError("gen: '" + token + "' expects " + std::to_string(count) + " values");
    return out;
  };
  while (std::getline(tokens, token, '+')) {
    const auto colon = token.find(':');
    const std::string name = token.substr(0, colon);
    const std::string body = colon == std::string::npos ? "" : token.substr(colon + 1);
    const bool is_family = name == "gaussian" || name == "bernoulli";
    if ((is_family && family_set) || (!is_family && means_set)) {
      throw UsageError("gen: conflicting token '" + token + "'");
    }
    if (name == "gaussian") {
      g.family = GeneratorSpec::Family::Gaussian;
      g.sigma = numbers(body, 1)[0];
      if (!(g.sigma >= 0.0)) throw UsageError("gen: gaussian sigma must be >= 0");
    } else if (name == "bernoulli") {
      if (!body.empty()) throw UsageError("gen: bernoulli takes no parameters");
      g.family = GeneratorSpec::Family::Bernoulli;
    } else if (name == "two-level") {
      const auto v = numbers(body, 2);
      g.means = GeneratorSpec::Means::TwoLevel;
      g.high = v[0];
      g.low = v[1];
    } else if (name == "uniform-means") {
      const auto v = numbers(body, 3);
      if (!(v[0] <= v[1])) throw UsageError("gen: uniform-means needs LO <= HI");
      if (v[2] < 0 || v[2] != std::floor(v[2])) throw UsageError("gen: uniform-means seed must be a non-negative integer");
      g.means = GeneratorSpec::Means::Uniform;
      g.uniform_lo = v[0];
      g.uniform_hi = v[1];
      g.uniform_seed = static_cast<std::uint64_t>(v[2]);
    } else if (name == "hard") {
      g.means = GeneratorSpec::Means::Hard;
    } else {
      throw UsageError("gen: unknown token '" + token + "'");
    }
    (is_family ? family_set : means_set) = true;
  }
  if (g.means == GeneratorSpec::Means::Hard && family_set) {
    throw UsageError("gen: 'hard' fixes unit-variance Gaussian arms; drop the family token");
  }
  return g;
}

/// Means of run `run_index` under a generator (two-level and uniform only).
inline std::vector<double> generated_means(const GeneratorSpec& g, std::size_t K, std::size_t U,
                                           std::uint64_t run_index) {
  std::vector<double> means(K, g.low);
  if (g.means == GeneratorSpec::Means::TwoLevel) {
    std::fill_n(means.begin(), std::min(U, K), g.high);
  } else {
    Rng rng(g.uniform_seed + run_index);
    std::uniform_real_distribution<double> draw(g.uniform_lo, g.uniform_hi);
    for (auto& m : means) m = draw(rng);
  }
  return means;
}

struct ExperimentConfig {
  Mode mode = Mode::Simulate;
  std::optional<std::size_t> num_arms;
  std::size_t num_users = 0;
  std::vector<std::size_t> user_counts;  // sweep-users
  std::uint64_t horizon = 0;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  PolicyKind policy = PolicyKind::EgalUcb;
  std::string out;
  bool round_horizon = false;
  bool fit_slope = false;
  std::size_t record_every = 1;
  std::optional<std::filesystem::path> instance_file;
  std::optional<GeneratorSpec> generator;
  std::optional<double> delta_min;
  std::optional<double> delta_max;
  std::optional<TraceSpec> trace;

  /// Fully resolved key=value settings, echoed into output headers.
  std::map<std::string, std::string> resolved;
};

namespace detail {

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "command", "K",     "U",          "users",       "T",         "runs",      "seed",
      "policy",  "out",   "round-horizon", "gen",      "instance",  "fit-slope", "record-every",
      "delta-min", "delta-max", "trace", "id-col",     "value-col", "negate",    "top-k",
      "max-rows", "select"};
  return keys;
}

inline std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  const auto& keys = known_keys();
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = csv::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(csv::trim(t.substr(0, eq)));
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw UsageError(path.string() + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    out[key] = std::string(csv::trim(t.substr(eq + 1)));
  }
  return out;
}

template <class T>
T parse_unsigned(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto& s = kv.at(key);
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError("'" + key + "' must be a non-negative integer, got '" + s + "'");
  }
  return v;
}

inline double parse_real(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto v = csv::parse_double(kv.at(key));
  if (!v) throw UsageError("'" + key + "' must be a number, got '" + kv.at(key) + "'");
  return *v;
}

inline bool parse_bool(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto& s = kv.at(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw UsageError("'" + key + "' must be true or false, got '" + s + "'");
}

}  // namespace detail

/// Resolves a configuration from `args` (subcommand first, then flags).
inline ExperimentConfig parse_config(const std::vector<std::string>& args) {
  using detail::known_keys;
  if (args.empty() || args.front() == "--help" || args.front() == "-h") {
    throw HelpRequested(
        "usage: egalbandit <simulate|sweep-users|bounds|ingest-run> [flags]\n"
        "run `egalbandit <command> --help` for the flags of a command\n");
  }
  const auto mode = parse_mode(args.front());
  if (!mode) throw UsageError("unknown command '" + args.front() + "'");

  CLI::App app("egalbandit " + args.front());
  app.set_help_flag("-h,--help", "Show this help");
  std::map<std::string, std::string> flags;
  std::string config_path;
  app.add_option("--config", config_path, "Flat key=value config file; flags override it");
  const std::vector<std::pair<std::string, std::string>> valued{
      {"K", "Number of arms"},
      {"U", "Number of users"},
      {"users", "Comma-separated user counts (sweep-users)"},
      {"T", "Horizon in time steps"},
      {"runs", "Independent runs"},
      {"seed", "Base seed; run i uses seed+i"},
      {"policy", "egalucb | oracle | random"},
      {"out", "Output path prefix"},
      {"gen", "Synthetic instance recipe, e.g. gaussian:1+uniform-means:0.01,0.99,7"},
      {"instance", "Instance CSV (arm_id,kind,p1,p2)"},
      {"record-every", "Emit every n-th block boundary (last one always)"},
      {"delta-min", "Gap delta_min for bounds"},
      {"delta-max", "Gap delta_max for bounds"},
      {"trace", "Trace/ratings CSV for ingest-run"},
      {"id-col", "Id column name"},
      {"value-col", "Value column name"},
      {"top-k", "Number of arms to keep"},
      {"max-rows", "Read at most this many data rows"},
      {"select", "top-count | random:SEED"},
  };
  for (const auto& [key, help] : valued) {
    app.add_option_function<std::string>("--" + key, [&flags, key = key](const std::string& v) { flags[key] = v; },
                                          help);
  }
  const std::vector<std::pair<std::string, std::string>> switches{
      {"round-horizon", "Round T down to a multiple of U instead of failing"},
      {"fit-slope", "Append the log-log slope of final regret vs U (sweep-users)"},
      {"negate", "Negate trace values, turning costs into rewards"},
  };
  for (const auto& [key, help] : switches) {
    app.add_flag_callback("--" + key, [&flags, key = key] { flags[key] = "true"; }, help);
  }

  std::vector<std::string> rest(args.begin() + 1, args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  std::map<std::string, std::string> kv;
  if (!config_path.empty()) kv = detail::read_config_file(config_path);
  if (kv.count("command") && kv["command"] != args.front()) {
    throw UsageError("config file is for command '" + kv["command"] + "', not '" + args.front() + "'");
  }
  for (const auto& [k, v] : flags) kv[k] = v;
  kv["command"] = args.front();

  ExperimentConfig cfg;
  cfg.mode = *mode;
  auto has = [&](const std::string& k) { return kv.count(k) > 0 && !kv.at(k).empty(); };
  auto require = [&](const std::string& k) {
    if (!has(k)) throw UsageError("missing required setting '" + k + "'");
  };
  auto forbid = [&](const std::string& k, const char* why) {
    if (has(k)) throw UsageError("setting '" + k + "' " + why);
  };
  for (const auto& k : {"round-horizon", "fit-slope", "negate"}) {
    if (has(k)) detail::parse_bool(kv, k);
  }

  if (has("K")) cfg.num_arms = detail::parse_unsigned<std::size_t>(kv, "K");
  if (has("T")) cfg.horizon = detail::parse_unsigned<std::uint64_t>(kv, "T");
  if (has("runs")) cfg.runs = detail::parse_unsigned<std::size_t>(kv, "runs");
  if (has("seed")) cfg.seed = detail::parse_unsigned<std::uint64_t>(kv, "seed");
  if (has("record-every")) cfg.record_every = detail::parse_unsigned<std::size_t>(kv, "record-every");
  if (cfg.record_every == 0) throw UsageError("'record-every' must be >= 1");
  if (has("policy")) {
    auto p = parse_policy_kind(kv["policy"]);
    if (!p) throw UsageError("'policy' must be egalucb, oracle or random, got '" + kv["policy"] + "'");
    cfg.policy = *p;
  }
  cfg.round_horizon = has("round-horizon") && detail::parse_bool(kv, "round-horizon");
  cfg.fit_slope = has("fit-slope") && detail::parse_bool(kv, "fit-slope");
  if (has("out")) cfg.out = kv["out"];
  if (has("delta-min")) cfg.delta_min = detail::parse_real(kv, "delta-min");
  if (has("delta-max")) cfg.delta_max = detail::parse_real(kv, "delta-max");
  if (has("instance") && has("gen")) throw UsageError("'instance' and 'gen' are mutually exclusive");
  if (has("instance")) cfg.instance_file = kv["instance"];
  if (has("gen")) cfg.generator = parse_generator(kv["gen"]);

  const bool simulates = cfg.mode != Mode::Bounds;
  if (simulates) {
    require("T");
    require("seed");
    require("out");
    if (cfg.runs == 0) throw UsageError("'runs' must be >= 1");
  }

  if (cfg.mode == Mode::SweepUsers) {
    require("users");
    forbid("U", "is not used by sweep-users; use 'users'");
    for (const auto& cell : csv::split(kv["users"])) {
      std::map<std::string, std::string> one{{"users", cell}};
      const auto u = detail::parse_unsigned<std::size_t>(one, "users");
      if (u == 0) throw UsageError("'users' entries must be >= 1");
      cfg.user_counts.push_back(u);
    }
  } else {
    forbid("users", "is only used by sweep-users");
    require("U");
    cfg.num_users = detail::parse_unsigned<std::size_t>(kv, "U");
    if (cfg.num_users == 0) throw UsageError("'U' must be >= 1");
  }
  if (cfg.mode != Mode::SweepUsers) forbid("fit-slope", "is only used by sweep-users");

  if (cfg.mode == Mode::IngestRun) {
    require("trace");
    require("id-col");
    require("value-col");
    require("top-k");
    forbid("instance", "conflicts with 'trace'");
    forbid("gen", "conflicts with 'trace'");
    TraceSpec t;
    t.path = kv["trace"];
    t.id_column = kv["id-col"];
    t.value_column = kv["value-col"];
    t.negate = has("negate") && detail::parse_bool(kv, "negate");
    t.top_k = detail::parse_unsigned<std::size_t>(kv, "top-k");
    if (t.top_k == 0) throw UsageError("'top-k' must be >= 1");
    if (has("max-rows")) t.max_rows = detail::parse_unsigned<std::size_t>(kv, "max-rows");
    if (has("select")) {
      const auto& s = kv["select"];
      if (s == "top-count") {
        t.selection = TraceSpec::Selection::TopCount;
      } else if (s.rfind("random:", 0) == 0) {
        std::map<std::string, std::string> one{{"select", s.substr(7)}};
        t.selection = TraceSpec::Selection::Random;
        t.selection_seed = detail::parse_unsigned<std::uint64_t>(one, "select");
      } else {
        throw UsageError("'select' must be top-count or random:SEED, got '" + s + "'");
      }
    }
    if (cfg.num_arms && *cfg.num_arms != t.top_k) throw UsageError("'K' conflicts with 'top-k'");
    cfg.num_arms = t.top_k;
    cfg.trace = t;
  } else {
    for (const auto& k : {"trace", "id-col", "value-col", "negate", "top-k", "max-rows", "select"}) {
      forbid(k, "is only used by ingest-run");
    }
    if (simulates && !cfg.instance_file && !cfg.generator) {
      throw UsageError("missing instance: set 'gen' or 'instance'");
    }
    if ((cfg.generator || cfg.mode == Mode::Bounds) && !cfg.instance_file) require("K");
    if (cfg.mode == Mode::Bounds) require("T");
  }
  if (cfg.mode != Mode::Bounds) {
    forbid("delta-min", "is only used by bounds");
    forbid("delta-max", "is only used by bounds");
  }

  // Divisibility: reject, or round down with a warning when asked.
  auto fix_horizon = [&](std::size_t u) {
    if (u == 0 || cfg.horizon % u == 0) return;
    if (!cfg.round_horizon) {
      throw UsageError("horizon not divisible by users: T=" + std::to_string(cfg.horizon) + ", U=" +
                       std::to_string(u) + " (pass --round-horizon to round down)");
    }
  };
  if (simulates) {
    if (cfg.mode == Mode::SweepUsers) {
      for (auto u : cfg.user_counts) fix_horizon(u);
    } else {
      fix_horizon(cfg.num_users);
    }
  }

  for (const auto& [k, v] : kv) {
    if (!v.empty()) cfg.resolved[k] = v;
  }
  if (simulates) {
    cfg.resolved["runs"] = std::to_string(cfg.runs);
    cfg.resolved["policy"] = std::string(to_string(cfg.policy));
    cfg.resolved["record-every"] = std::to_string(cfg.record_every);
  }
  return cfg;
}

/// Horizon actually simulated for `users` (rounded down when allowed).
inline std::uint64_t effective_horizon(const ExperimentConfig& cfg, std::size_t users) {
  return cfg.round_horizon ? cfg.horizon - cfg.horizon % users : cfg.horizon;
}

/// Produces the environment of each run for `users` users, keyed by run seed.
using InstanceFactory = std::function<EgalMabInstance(std::uint64_t seed)>;

inline InstanceFactory make_instance_factory(const ExperimentConfig& cfg, std::size_t users,
                                             std::uint64_t horizon) {
  if (cfg.instance_file) {
    auto inst = std::make_shared<const EgalMabInstance>(load_instance_file(*cfg.instance_file));
    if (cfg.num_arms && *cfg.num_arms != inst->num_arms()) {
      throw UsageError("'K' does not match the " + std::to_string(inst->num_arms()) + " arms of the instance file");
    }
    return [inst](std::uint64_t) { return *inst; };
  }
  if (!cfg.generator) throw UsageError("no instance source configured");
  const auto g = *cfg.generator;
  const std::size_t K = *cfg.num_arms;
  if (g.means == GeneratorSpec::Means::Hard) {
    auto inst = std::make_shared<const EgalMabInstance>(hard_instance(K, users, horizon).instance);
    return [inst](std::uint64_t) { return *inst; };
  }
  const std::uint64_t base = cfg.seed;
  return [g, K, users, base](std::uint64_t seed) {
    const auto means = generated_means(g, K, users, seed - base);
    return g.family == GeneratorSpec::Family::Gaussian ? EgalMabInstance::gaussian(means, g.sigma)
                                                       : EgalMabInstance::bernoulli(means);
  };
}

/// Output files are written to `<path>.tmp` and renamed into place only when
/// the whole command succeeds; on failure every temporary is removed.
class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;
  ~OutputSet() {
    for (const auto& f : files_) {
      std::error_code ec;
      std::filesystem::remove(tmp_path(f.path), ec);
    }
  }

  std::ostream& open(const std::filesystem::path& path) {
    auto& f = files_.emplace_back();
    f.path = path;
    f.stream = std::make_unique<std::ofstream>(tmp_path(path), std::ios::binary | std::ios::trunc);
    if (!*f.stream) throw InputError("cannot write " + path.string());
    return *f.stream;
  }

  void commit() {
    for (auto& f : files_) {
      f.stream->close();
      if (!*f.stream) throw InputError("failed writing " + f.path.string());
    }
    for (auto& f : files_) std::filesystem::rename(tmp_path(f.path), f.path);
    files_.clear();
  }

 private:
  struct File {
    std::filesystem::path path;
    std::unique_ptr<std::ofstream> stream;
  };
  static std::filesystem::path tmp_path(const std::filesystem::path& p) { return p.string() + ".tmp"; }
  std::vector<File> files_;
};

inline void write_provenance(std::ostream& out, const ExperimentConfig& cfg) {
  out << "# egalbandit\n";
  for (const auto& [k, v] : cfg.resolved) {
    if (k == "out") continue;  // outputs are relocatable
    out << "# " << k << '=' << v << '\n';
  }
}

inline bool recorded(std::size_t block, std::size_t blocks, std::size_t every) {
  return (block + 1) % every == 0 || block + 1 == blocks;
}

inline void write_runs(std::ostream& out, std::span<const RunResult> runs, std::size_t every) {
  for (const auto& r : runs) {
    const auto policy = to_string(r.policy);
    for (std::size_t b = 0; b < r.num_blocks(); ++b) {
      if (!recorded(b, r.num_blocks(), every)) continue;
      out << policy << ',' << r.seed << ',' << r.time_at(b) << ',' << csv::format_double(r.pseudo_regret[b]) << ','
          << csv::format_double(r.min_user_cum_reward[b]) << '\n';
    }
  }
}

inline void write_aggregate(std::ostream& out, const AggregateResult& agg, std::size_t every) {
  const auto policy = to_string(agg.policy);
  for (std::size_t b = 0; b < agg.num_blocks(); ++b) {
    if (!recorded(b, agg.num_blocks(), every)) continue;
    out << policy << ',' << agg.time_at(b) << ',' << csv::format_double(agg.mean_regret[b]) << ','
        << csv::format_double(agg.min_regret[b]) << ',' << csv::format_double(agg.max_regret[b]) << ','
        << agg.num_runs() << '\n';
  }
}

inline std::string optional_cell(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}

inline void write_bound_row(std::ostream& out, const BoundReport& r) {
  out << "K,U,T,delta_min,delta_max,dep_upper,indep_upper,lower\n";
  out << r.num_arms << ',' << r.num_users << ',' << r.horizon << ',' << optional_cell(r.delta_min) << ','
      << optional_cell(r.delta_max) << ',' << optional_cell(r.dependent_upper) << ','
      << csv::format_double(r.independent_upper) << ',' << optional_cell(r.lower) << '\n';
}

/// Worker threads: EGALBANDIT_THREADS when set, else hardware parallelism.
inline std::size_t thread_count_from_env() {
  const char* env = std::getenv("EGALBANDIT_THREADS");
  if (!env || !*env) return default_thread_count();
  std::map<std::string, std::string> one{{"EGALBANDIT_THREADS", env}};
  const auto n = detail::parse_unsigned<std::size_t>(one, "EGALBANDIT_THREADS");
  if (n == 0) throw UsageError("EGALBANDIT_THREADS must be >= 1");
  return n;
}

/// Runs the configured experiment. Returns the process exit status; errors
/// propagate as exceptions after all partial outputs have been removed.
inline int run_command(const ExperimentConfig& cfg, std::ostream& log = std::cerr) {
  OutputSet outputs;
  auto path = [&](const char* suffix) { return std::filesystem::path(cfg.out + suffix); };

  auto simulate = [&](const InstanceFactory& factory, std::size_t users, std::ostream* ids_out,
                      const std::vector<std::string>* ids) {
    const std::uint64_t T = effective_horizon(cfg, users);
    if (T != cfg.horizon) {
      log << "egalbandit: warning: horizon rounded down from " << cfg.horizon << " to " << T << " for U=" << users
          << '\n';
    }
    if (ids_out) write_id_map(*ids_out, factory(cfg.seed), *ids);
    const auto runs = run_replicates(factory, users, T, cfg.policy, cfg.runs, cfg.seed, thread_count_from_env());
    return std::make_pair(runs, aggregate(runs));
  };

  switch (cfg.mode) {
    case Mode::Simulate:
    case Mode::IngestRun: {
      InstanceFactory factory;
      std::optional<TraceInstance> trace;
      std::ostream* ids_out = nullptr;
      if (cfg.trace) {
        trace = load_trace_instance(*cfg.trace);
        auto inst = std::make_shared<const EgalMabInstance>(trace->instance);
        factory = [inst](std::uint64_t) { return *inst; };
        ids_out = &outputs.open(path(".idmap.csv"));
        write_provenance(*ids_out, cfg);
      } else {
        factory = make_instance_factory(cfg, cfg.num_users, effective_horizon(cfg, cfg.num_users));
      }
      auto& runs_out = outputs.open(path(".runs.csv"));
      auto& agg_out = outputs.open(path(".aggregate.csv"));
      const auto [runs, agg] =
          simulate(factory, cfg.num_users, ids_out, trace ? &trace->original_ids : nullptr);
      write_provenance(runs_out, cfg);
      runs_out << "policy,run_seed,t,pseudo_regret,min_user_cum_reward\n";
      write_runs(runs_out, runs, cfg.record_every);
      write_provenance(agg_out, cfg);
      agg_out << "policy,t,mean_regret,min_regret,max_regret,n_runs\n";
      write_aggregate(agg_out, agg, cfg.record_every);
      break;
    }
    case Mode::SweepUsers: {
      auto& out = outputs.open(path(".sweep.csv"));
      write_provenance(out, cfg);
      out << "U,policy,t,mean_regret,min_regret,max_regret,n_runs\n";
      std::vector<std::pair<double, double>> points;
      for (auto users : cfg.user_counts) {
        const auto factory = make_instance_factory(cfg, users, effective_horizon(cfg, users));
        const auto [runs, agg] = simulate(factory, users, nullptr, nullptr);
        const std::size_t last = agg.num_blocks() - 1;
        out << users << ',' << to_string(agg.policy) << ',' << agg.time_at(last) << ','
            << csv::format_double(agg.mean_regret[last]) << ',' << csv::format_double(agg.min_regret[last]) << ','
            << csv::format_double(agg.max_regret[last]) << ',' << agg.num_runs() << '\n';
        if (agg.mean_regret[last] > 0.0) points.emplace_back(static_cast<double>(users), agg.mean_regret[last]);
      }
      if (cfg.fit_slope) {
        // Zero-regret rows (U = K) have no logarithm and are left out of the fit.
        const double slope = fit_loglog_slope(points);
        out << "# loglog_slope=" << csv::format_double(slope) << '\n';
        log << "loglog_slope=" << csv::format_double(slope) << '\n';
      }
      break;
    }
    case Mode::Bounds: {
      const std::size_t U = cfg.num_users;
      BoundReport report;
      if (cfg.instance_file || cfg.generator) {
        const std::uint64_t T = cfg.horizon;
        const auto inst = make_instance_factory(cfg, U, T)(cfg.seed);
        const auto g = gap_summary(inst, U);
        report = bound_report(inst.num_arms(), U, T, cfg.delta_min ? cfg.delta_min : g.delta_min,
                              cfg.delta_max ? cfg.delta_max : std::optional<double>(g.delta_max));
      } else {
        report = bound_report(*cfg.num_arms, U, cfg.horizon, cfg.delta_min, cfg.delta_max);
      }
      if (cfg.out.empty()) {
        write_bound_row(std::cout, report);
      } else {
        auto& out = outputs.open(path(".bounds.csv"));
        write_provenance(out, cfg);
        write_bound_row(out, report);
      }
      break;
    }
  }
  outputs.commit();
  return 0;
}

/// Entry point shared by the tool: parses, runs, and maps errors to a single
/// diagnostic line and a nonzero status.
inline int main(const std::vector<std::string>& args, std::ostream& err = std::cerr) {
  try {
    return run_command(parse_config(args), err);
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return 0;
  } catch (const UsageError& e) {
    err << "egalbandit: usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "egalbandit: error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace egalbandit::cli
