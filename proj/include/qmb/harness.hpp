#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qmb/instance.hpp"
#include "qmb/policies.hpp"
#include "qmb/simulator.hpp"

namespace qmb {

// Configuration or input-format problem; the CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::optional<InstanceConfig> instance_config;  // inline generation
  std::string instance_path;                      // or a serialized instance
  std::vector<PolicyKind> policies;
  std::int64_t horizon = 0;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  std::int64_t thin = 1;
  PolicyParams policy;
  double kappa_override = 0.0;  // 0 = keep the instance's value
  bool arrivals_first = false;
};

// ---------------------------------------------------------------------------
// Number formatting. Every float is rendered with 17 significant digits via
// to_chars, which is locale-free and round-trips doubles exactly.

inline std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_double: to_chars failed");
  return {buf, ptr};
}

inline double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("could not parse number for " + what + ": '" + text + "'");
  }
  return value;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, last - begin + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

inline std::int64_t parse_int(const std::string& text, const std::string& key) {
  std::int64_t value = 0;
  const char* begin = text.data();
  auto [ptr, ec] = std::from_chars(begin, begin + text.size(), value);
  if (ec != std::errc() || ptr != begin + text.size()) {
    throw ConfigError("could not parse integer for key '" + key + "': '" + text + "'");
  }
  return value;
}

inline std::uint64_t parse_u64(const std::string& text, const std::string& key) {
  std::uint64_t value = 0;
  const char* begin = text.data();
  auto [ptr, ec] = std::from_chars(begin, begin + text.size(), value);
  if (ec != std::errc() || ptr != begin + text.size()) {
    throw ConfigError("could not parse unsigned integer for key '" + key + "': '" + text + "'");
  }
  return value;
}

inline bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("could not parse boolean for key '" + key + "': '" + text + "'");
}

}  // namespace detail

// Parses the key = value experiment document. Unknown keys are errors so
// typos cannot silently fall back to defaults.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  InstanceConfig inst;
  bool saw_inline_instance = false;
  bool saw_horizon = false;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");

    if (key == "instance.path") {
      cfg.instance_path = value;
    } else if (key == "instance.n") {
      inst.n_agents = static_cast<int>(detail::parse_int(value, key));
      saw_inline_instance = true;
    } else if (key == "instance.k") {
      inst.n_arms = static_cast<int>(detail::parse_int(value, key));
      saw_inline_instance = true;
    } else if (key == "instance.l") {
      inst.capacity = static_cast<int>(detail::parse_int(value, key));
      saw_inline_instance = true;
    } else if (key == "instance.d") {
      inst.dim = static_cast<int>(detail::parse_int(value, key));
      saw_inline_instance = true;
    } else if (key == "instance.epsilon") {
      inst.epsilon = parse_double(value, key);
      saw_inline_instance = true;
    } else if (key == "instance.seed") {
      inst.seed = detail::parse_u64(value, key);
      saw_inline_instance = true;
    } else if (key == "instance.always_normalize") {
      inst.always_normalize = detail::parse_bool(value, key);
      saw_inline_instance = true;
    } else if (key == "policies") {
      for (const auto& name : detail::split(value, ',')) {
        if (name.empty()) continue;
        try {
          cfg.policies.push_back(policy_from_string(name));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("key 'policies': ") + e.what());
        }
      }
    } else if (key == "t") {
      cfg.horizon = detail::parse_int(value, key);
      saw_horizon = true;
    } else if (key == "seeds") {
      for (const auto& s : detail::split(value, ',')) {
        if (!s.empty()) cfg.seeds.push_back(detail::parse_u64(s, key));
      }
    } else if (key == "out_dir") {
      cfg.output_dir = value;
    } else if (key == "thin") {
      cfg.thin = detail::parse_int(value, key);
    } else if (key == "c1") {
      cfg.policy.c1 = parse_double(value, key);
    } else if (key == "lambda_reg") {
      cfg.policy.lambda_reg = parse_double(value, key);
    } else if (key == "ts_samples") {
      cfg.policy.ts_samples_override = static_cast<int>(detail::parse_int(value, key));
    } else if (key == "exact_cap") {
      cfg.policy.exact_cap = detail::parse_u64(value, key);
    } else if (key == "kappa") {
      cfg.kappa_override = parse_double(value, key);
    } else if (key == "arrivals_first") {
      cfg.arrivals_first = detail::parse_bool(value, key);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }

  if (cfg.instance_path.empty() && !saw_inline_instance) {
    throw ConfigError("config must set either 'instance.path' or the inline 'instance.*' keys");
  }
  if (!cfg.instance_path.empty() && saw_inline_instance) {
    throw ConfigError("config sets both 'instance.path' and inline 'instance.*' keys");
  }
  if (cfg.instance_path.empty()) {
    try {
      check_instance_config(inst);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    cfg.instance_config = inst;
  }
  if (!saw_horizon) throw ConfigError("missing key 't'");
  if (cfg.horizon < 1) throw ConfigError("key 't': horizon must be >= 1");
  if (cfg.seeds.empty()) throw ConfigError("key 'seeds': at least one seed required");
  if (cfg.thin < 1) throw ConfigError("key 'thin': must be >= 1");
  if (cfg.policies.empty()) throw ConfigError("key 'policies': at least one policy required");
  if (cfg.policy.lambda_reg <= 0.0) throw ConfigError("key 'lambda_reg': must be > 0");
  if (cfg.policy.ts_samples_override < 0) throw ConfigError("key 'ts_samples': must be >= 0");
  if (cfg.kappa_override < 0.0) throw ConfigError("key 'kappa': must be >= 0");
  return cfg;
}

// Fixed-order emission; parse_config(canonical_config_text(cfg)) reproduces
// cfg field for field.
inline std::string canonical_config_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  if (!cfg.instance_path.empty()) {
    out << "instance.path = " << cfg.instance_path << "\n";
  } else {
    const InstanceConfig& inst = *cfg.instance_config;
    out << "instance.n = " << inst.n_agents << "\n";
    out << "instance.k = " << inst.n_arms << "\n";
    out << "instance.l = " << inst.capacity << "\n";
    out << "instance.d = " << inst.dim << "\n";
    out << "instance.epsilon = " << format_double(inst.epsilon) << "\n";
    out << "instance.seed = " << inst.seed << "\n";
    out << "instance.always_normalize = " << (inst.always_normalize ? "true" : "false") << "\n";
  }
  out << "policies = ";
  for (std::size_t i = 0; i < cfg.policies.size(); ++i) {
    if (i) out << ",";
    out << to_string(cfg.policies[i]);
  }
  out << "\n";
  out << "t = " << cfg.horizon << "\n";
  out << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    if (i) out << ",";
    out << cfg.seeds[i];
  }
  out << "\n";
  out << "out_dir = " << cfg.output_dir << "\n";
  out << "thin = " << cfg.thin << "\n";
  out << "c1 = " << format_double(cfg.policy.c1) << "\n";
  out << "lambda_reg = " << format_double(cfg.policy.lambda_reg) << "\n";
  out << "ts_samples = " << cfg.policy.ts_samples_override << "\n";
  out << "exact_cap = " << cfg.policy.exact_cap << "\n";
  out << "kappa = " << format_double(cfg.kappa_override) << "\n";
  out << "arrivals_first = " << (cfg.arrivals_first ? "true" : "false") << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Instance serialization. Key names here are the wire format; keep stable.

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["n"] = inst.n_agents;
  j["k"] = inst.n_arms;
  j["l"] = inst.capacity;
  j["d"] = inst.dim;
  j["epsilon"] = inst.epsilon;
  j["kappa"] = inst.kappa;
  auto vectors = [](const std::vector<Eigen::VectorXd>& vs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : vs) {
      nlohmann::json row = nlohmann::json::array();
      for (int i = 0; i < v.size(); ++i) row.push_back(v[i]);
      arr.push_back(row);
    }
    return arr;
  };
  j["features"] = vectors(inst.features);
  j["theta"] = vectors(inst.theta);
  j["lambdas"] = inst.lambdas;
  j["witness"] = inst.witness;
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  try {
    inst.n_agents = j.at("n").get<int>();
    inst.n_arms = j.at("k").get<int>();
    inst.capacity = j.at("l").get<int>();
    inst.dim = j.at("d").get<int>();
    inst.epsilon = j.at("epsilon").get<double>();
    inst.kappa = j.at("kappa").get<double>();
    auto vectors = [&](const nlohmann::json& arr) {
      std::vector<Eigen::VectorXd> vs;
      for (const auto& row : arr) {
        Eigen::VectorXd v(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) v[static_cast<int>(i)] = row[i].get<double>();
        vs.push_back(std::move(v));
      }
      return vs;
    };
    inst.features = vectors(j.at("features"));
    inst.theta = vectors(j.at("theta"));
    inst.lambdas = j.at("lambdas").get<std::vector<double>>();
    inst.witness = j.at("witness").get<std::vector<std::vector<int>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed instance document: ") + e.what());
  }
  auto expect = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("malformed instance document: ") + what);
  };
  expect(inst.n_agents >= 1 && inst.n_arms >= 1 && inst.capacity >= 1 && inst.dim >= 1,
         "dimensions must be >= 1");
  expect(static_cast<int>(inst.features.size()) == inst.n_agents,
         "feature row count != n");
  expect(static_cast<int>(inst.theta.size()) == inst.n_arms, "theta row count != k");
  expect(static_cast<int>(inst.lambdas.size()) == inst.n_agents, "lambda count != n");
  for (const auto& x : inst.features) expect(x.size() == inst.dim, "feature row width != d");
  for (const auto& th : inst.theta) expect(th.size() == inst.dim, "theta row width != d");
  return inst;
}

inline Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("instance file " + path.string() + ": " + e.what());
  }
  return instance_from_json(j);
}

// ---------------------------------------------------------------------------
// Time-series emission and the summary statistics computed from it.

struct SeriesRow {
  std::int64_t t = 0;
  double total_queue = 0.0;
  double cum_regret = 0.0;
  double est_error = std::numeric_limits<double>::quiet_NaN();  // NaN = blank
};

// Rounds kept when thinning: 1, 1+thin, 1+2*thin, ..., plus the final round.
inline std::vector<SeriesRow> thin_rows(const RunMetrics& metrics, std::int64_t thin) {
  if (thin < 1) throw std::invalid_argument("thin_rows: thin must be >= 1");
  const auto horizon = static_cast<std::int64_t>(metrics.total_queue.size());
  std::vector<SeriesRow> rows;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    if ((t - 1) % thin == 0 || t == horizon) {
      rows.push_back({t, metrics.total_queue[t - 1], metrics.cum_regret[t - 1],
                      metrics.est_error[t - 1]});
    }
  }
  return rows;
}

inline void write_timeseries(const RunMetrics& metrics, const std::filesystem::path& path,
                             std::int64_t thin) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "t,total_queue,cum_regret,est_error\n";
  for (const SeriesRow& row : thin_rows(metrics, thin)) {
    out << row.t << ',' << format_double(row.total_queue) << ',' << format_double(row.cum_regret)
        << ',';
    if (!std::isnan(row.est_error)) out << format_double(row.est_error);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::vector<SeriesRow> read_timeseries(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "t,total_queue,cum_regret,est_error") {
    throw ConfigError("unexpected header in " + path.string());
  }
  std::vector<SeriesRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() < 3 || cells.size() > 4) {
      throw ConfigError("bad row in " + path.string() + ": '" + line + "'");
    }
    SeriesRow row;
    row.t = detail::parse_int(cells[0], "t");
    row.total_queue = parse_double(cells[1], "total_queue");
    row.cum_regret = parse_double(cells[2], "cum_regret");
    if (cells.size() == 4 && !cells[3].empty()) row.est_error = parse_double(cells[3], "est_error");
    rows.push_back(row);
  }
  if (rows.empty()) throw ConfigError("no data rows in " + path.string());
  return rows;
}

struct RunStats {
  double avg_total_queue = 0.0;
  double final_cum_regret = 0.0;
  double max_total_queue = 0.0;
  double decile_first = 0.0;   // rounds with t <= T/10
  double decile_middle = 0.0;  // rounds with 0.4*T < t <= 0.5*T
  double decile_last = 0.0;    // rounds with t > 0.9*T
  double regret_loglog_slope = 0.0;  // ln(regret+1) vs ln t over [T/4, T]
};

namespace detail {

// Least-squares slope; zero when fewer than two points or no x spread.
inline double slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = xs.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return den == 0.0 ? 0.0 : num / den;
}

}  // namespace detail

// All summary statistics are functions of the emitted rows alone, so an
// independent reader of the CSV reproduces them exactly.
inline RunStats compute_run_stats(const std::vector<SeriesRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("compute_run_stats: no rows");
  const std::int64_t horizon = rows.back().t;
  RunStats stats;
  double sum = 0.0;
  double max_q = -std::numeric_limits<double>::infinity();
  double sum_first = 0.0, sum_middle = 0.0, sum_last = 0.0;
  std::int64_t n_first = 0, n_middle = 0, n_last = 0;
  std::vector<double> log_t, log_r;
  for (const SeriesRow& row : rows) {
    sum += row.total_queue;
    max_q = std::max(max_q, row.total_queue);
    if (10 * row.t <= horizon) {
      sum_first += row.total_queue;
      ++n_first;
    }
    if (10 * row.t > 4 * horizon && 10 * row.t <= 5 * horizon) {
      sum_middle += row.total_queue;
      ++n_middle;
    }
    if (10 * row.t > 9 * horizon) {
      sum_last += row.total_queue;
      ++n_last;
    }
    if (4 * row.t >= horizon) {
      log_t.push_back(std::log(static_cast<double>(row.t)));
      log_r.push_back(std::log1p(row.cum_regret));
    }
  }
  stats.avg_total_queue = sum / static_cast<double>(rows.size());
  stats.final_cum_regret = rows.back().cum_regret;
  stats.max_total_queue = max_q;
  stats.decile_first = n_first ? sum_first / static_cast<double>(n_first) : 0.0;
  stats.decile_middle = n_middle ? sum_middle / static_cast<double>(n_middle) : 0.0;
  stats.decile_last = n_last ? sum_last / static_cast<double>(n_last) : 0.0;
  stats.regret_loglog_slope = detail::slope(log_t, log_r);
  return stats;
}

struct RunSummary {
  PolicyKind policy = PolicyKind::Oracle;
  std::uint64_t seed = 0;
  RunStats stats;
};

struct PolicyAggregate {
  PolicyKind policy = PolicyKind::Oracle;
  RunStats mean;
  RunStats stddev;
};

struct Summary {
  std::int64_t horizon = 0;
  std::int64_t thin = 1;
  std::vector<RunSummary> runs;
  std::vector<PolicyAggregate> per_policy;
};

namespace detail {

template <class Get>
void mean_std(const std::vector<const RunStats*>& stats, Get get, double& mean, double& sd) {
  const auto n = stats.size();
  mean = 0.0;
  for (const RunStats* s : stats) mean += get(*s);
  mean /= static_cast<double>(n);
  sd = 0.0;
  if (n > 1) {
    for (const RunStats* s : stats) {
      const double dev = get(*s) - mean;
      sd += dev * dev;
    }
    sd = std::sqrt(sd / static_cast<double>(n - 1));
  }
}

inline void aggregate_policies(Summary& summary) {
  summary.per_policy.clear();
  std::vector<PolicyKind> seen;
  for (const RunSummary& run : summary.runs) {
    bool found = false;
    for (PolicyKind k : seen) found = found || k == run.policy;
    if (!found) seen.push_back(run.policy);
  }
  for (PolicyKind kind : seen) {
    std::vector<const RunStats*> stats;
    for (const RunSummary& run : summary.runs) {
      if (run.policy == kind) stats.push_back(&run.stats);
    }
    PolicyAggregate agg;
    agg.policy = kind;
    auto fill = [&](auto member) {
      double mean = 0.0, sd = 0.0;
      mean_std(stats, [&](const RunStats& s) { return s.*member; }, mean, sd);
      agg.mean.*member = mean;
      agg.stddev.*member = sd;
    };
    fill(&RunStats::avg_total_queue);
    fill(&RunStats::final_cum_regret);
    fill(&RunStats::max_total_queue);
    fill(&RunStats::decile_first);
    fill(&RunStats::decile_middle);
    fill(&RunStats::decile_last);
    fill(&RunStats::regret_loglog_slope);
    summary.per_policy.push_back(agg);
  }
}

inline nlohmann::json stats_to_json(const RunStats& s) {
  return {{"avg_total_queue", s.avg_total_queue},
          {"final_cum_regret", s.final_cum_regret},
          {"max_total_queue", s.max_total_queue},
          {"decile_first", s.decile_first},
          {"decile_middle", s.decile_middle},
          {"decile_last", s.decile_last},
          {"regret_loglog_slope", s.regret_loglog_slope}};
}

inline RunStats stats_from_json(const nlohmann::json& j) {
  RunStats s;
  s.avg_total_queue = j.at("avg_total_queue").get<double>();
  s.final_cum_regret = j.at("final_cum_regret").get<double>();
  s.max_total_queue = j.at("max_total_queue").get<double>();
  s.decile_first = j.at("decile_first").get<double>();
  s.decile_middle = j.at("decile_middle").get<double>();
  s.decile_last = j.at("decile_last").get<double>();
  s.regret_loglog_slope = j.at("regret_loglog_slope").get<double>();
  return s;
}

}  // namespace detail

inline nlohmann::json summary_to_json(const Summary& summary) {
  nlohmann::json j;
  j["t"] = summary.horizon;
  j["thin"] = summary.thin;
  j["runs"] = nlohmann::json::array();
  for (const RunSummary& run : summary.runs) {
    nlohmann::json r = detail::stats_to_json(run.stats);
    r["policy"] = to_string(run.policy);
    r["seed"] = run.seed;
    j["runs"].push_back(r);
  }
  j["per_policy"] = nlohmann::json::array();
  for (const PolicyAggregate& agg : summary.per_policy) {
    nlohmann::json p;
    p["policy"] = to_string(agg.policy);
    p["mean"] = detail::stats_to_json(agg.mean);
    p["stddev"] = detail::stats_to_json(agg.stddev);
    j["per_policy"].push_back(p);
  }
  return j;
}

inline Summary summary_from_json(const nlohmann::json& j) {
  Summary summary;
  summary.horizon = j.at("t").get<std::int64_t>();
  summary.thin = j.at("thin").get<std::int64_t>();
  for (const auto& r : j.at("runs")) {
    RunSummary run;
    run.policy = policy_from_string(r.at("policy").get<std::string>());
    run.seed = r.at("seed").get<std::uint64_t>();
    run.stats = detail::stats_from_json(r);
    summary.runs.push_back(run);
  }
  for (const auto& p : j.at("per_policy")) {
    PolicyAggregate agg;
    agg.policy = policy_from_string(p.at("policy").get<std::string>());
    agg.mean = detail::stats_from_json(p.at("mean"));
    agg.stddev = detail::stats_from_json(p.at("stddev"));
    summary.per_policy.push_back(agg);
  }
  return summary;
}

inline std::filesystem::path series_path(const std::filesystem::path& dir, PolicyKind policy,
                                         std::uint64_t seed) {
  return dir / (to_string(policy) + "_seed" + std::to_string(seed) + ".csv");
}

inline Instance resolve_instance(const ExperimentConfig& cfg) {
  Instance inst = cfg.instance_path.empty() ? generate_instance(*cfg.instance_config)
                                            : load_instance(cfg.instance_path);
  if (cfg.kappa_override > 0.0) inst.kappa = cfg.kappa_override;
  return inst;
}

// Runs every (policy, seed) pair, emits one CSV per pair plus summary.json
// and the instance document. Workers only touch their own files and result
// slot, and the summary is assembled in declaration order afterwards, so the
// emitted bytes do not depend on the worker count.
inline Summary run_experiment(const ExperimentConfig& cfg, int parallel = 1) {
  if (parallel < 1) throw std::invalid_argument("run_experiment: parallel must be >= 1");
  const Instance inst = resolve_instance(cfg);

  std::filesystem::create_directories(cfg.output_dir);
  {
    std::ofstream out(std::filesystem::path(cfg.output_dir) / "instance.json",
                      std::ios::binary);
    if (!out) throw std::runtime_error("cannot write instance.json under " + cfg.output_dir);
    out << instance_to_json(inst).dump(2) << '\n';
  }

  struct Job {
    PolicyKind policy;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (PolicyKind policy : cfg.policies) {
    for (std::uint64_t seed : cfg.seeds) jobs.push_back({policy, seed});
  }

  RunOptions options;
  options.policy = cfg.policy;
  options.arrivals_before_schedule = cfg.arrivals_first;

  std::vector<RunStats> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const Job& job = jobs[i];
      try {
        const RunMetrics metrics = run(inst, job.policy, cfg.horizon, job.seed, options);
        write_timeseries(metrics, series_path(cfg.output_dir, job.policy, job.seed), cfg.thin);
        results[i] = compute_run_stats(thin_rows(metrics, cfg.thin));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (parallel == 1 || jobs.size() == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const std::size_t n_workers = std::min<std::size_t>(parallel, jobs.size());
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (!errors[i].empty()) {
      throw std::runtime_error("run (" + to_string(jobs[i].policy) + ", seed " +
                               std::to_string(jobs[i].seed) + ") failed: " + errors[i]);
    }
  }

  Summary summary;
  summary.horizon = cfg.horizon;
  summary.thin = cfg.thin;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    summary.runs.push_back({jobs[i].policy, jobs[i].seed, results[i]});
  }
  detail::aggregate_policies(summary);

  std::ofstream out(std::filesystem::path(cfg.output_dir) / "summary.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write summary.json under " + cfg.output_dir);
  out << summary_to_json(summary).dump(2) << '\n';
  return summary;
}

// Recomputes a Summary from the CSVs already sitting in a directory.
inline Summary summarize_dir(const std::filesystem::path& dir) {
  static const std::regex name_pattern("^(oracle|ucb|ts|random)_seed([0-9]+)\\.csv$");
  struct Found {
    PolicyKind policy;
    std::uint64_t seed;
    std::filesystem::path path;
  };
  std::vector<Found> found;
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("not a directory: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch match;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, match, name_pattern)) {
      found.push_back({policy_from_string(match[1].str()),
                       detail::parse_u64(match[2].str(), "seed"), entry.path()});
    }
  }
  if (found.empty()) throw ConfigError("no time-series files found in " + dir.string());
  std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
    if (a.policy != b.policy) return static_cast<int>(a.policy) < static_cast<int>(b.policy);
    return a.seed < b.seed;
  });

  Summary summary;
  for (const Found& f : found) {
    const std::vector<SeriesRow> rows = read_timeseries(f.path);
    if (summary.runs.empty()) {
      summary.horizon = rows.back().t;
      summary.thin = rows.size() >= 2 ? rows[1].t - rows[0].t : 1;
    }
    summary.runs.push_back({f.policy, f.seed, compute_run_stats(rows)});
  }
  detail::aggregate_policies(summary);
  return summary;
}

}  // namespace qmb
