// Command-line front end: generate instances, run experiments, and recompute
// summaries from emitted time series.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "qmb/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qmb::ConfigError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed_override = 0;
  bool has_seed_override = false;
};

qmb::ExperimentConfig load_config(const CommonArgs& args) {
  qmb::ExperimentConfig cfg = qmb::parse_config(read_file(args.config_path));
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (args.has_seed_override) cfg.seeds = {args.seed_override};
  return cfg;
}

int run_gen(const CommonArgs& args) {
  qmb::ExperimentConfig cfg = qmb::parse_config(read_file(args.config_path));
  // For gen the seed override regenerates the instance itself.
  if (args.has_seed_override && cfg.instance_config) {
    cfg.instance_config->seed = args.seed_override;
  }
  const qmb::Instance inst = qmb::resolve_instance(cfg);
  const qmb::ValidationReport report = qmb::validate_instance(inst);
  if (!report.ok()) {
    for (const auto& v : report.violations) std::cerr << "invalid instance: " << v << "\n";
    return 2;
  }
  const std::string text = qmb::instance_to_json(inst).dump(2) + "\n";
  if (args.out_dir.empty()) {
    std::cout << text;
  } else {
    std::filesystem::create_directories(args.out_dir);
    const auto path = std::filesystem::path(args.out_dir) / "instance.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

int run_run(const CommonArgs& args, int parallel) {
  const qmb::ExperimentConfig cfg = load_config(args);
  const qmb::Summary summary = qmb::run_experiment(cfg, parallel);
  for (const auto& agg : summary.per_policy) {
    std::cout << to_string(agg.policy) << ": avg_total_queue=" << agg.mean.avg_total_queue
              << " final_cum_regret=" << agg.mean.final_cum_regret
              << " regret_loglog_slope=" << agg.mean.regret_loglog_slope << "\n";
  }
  std::cout << "wrote " << (std::filesystem::path(cfg.output_dir) / "summary.json").string()
            << "\n";
  return 0;
}

int run_summarize(const std::string& dir) {
  const qmb::Summary summary = qmb::summarize_dir(dir);
  const nlohmann::json j = qmb::summary_to_json(summary);
  const auto path = std::filesystem::path(dir) / "summary_recomputed.json";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Queueing matching bandit simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  int parallel = 1;
  std::string summarize_dir;

  CLI::App* gen = app.add_subcommand("gen", "Generate and emit a serialized instance");
  gen->add_option("--config", args.config_path, "experiment config file")->required();
  gen->add_option("--out", args.out_dir, "directory for instance.json (stdout if omitted)");
  auto* gen_seed = gen->add_option("--seed", args.seed_override, "override the instance seed");

  CLI::App* run = app.add_subcommand("run", "Execute an experiment config");
  run->add_option("--config", args.config_path, "experiment config file")->required();
  run->add_option("--out", args.out_dir, "override the config's output directory");
  auto* run_seed = run->add_option("--seed", args.seed_override, "replace the seed list");
  run->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* summarize =
      app.add_subcommand("summarize", "Recompute a summary from emitted time series");
  summarize->add_option("--out", summarize_dir, "directory holding the CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      args.has_seed_override = gen_seed->count() > 0;
      return run_gen(args);
    }
    if (run->parsed()) {
      args.has_seed_override = run_seed->count() > 0;
      return run_run(args, parallel);
    }
    return run_summarize(summarize_dir);
  } catch (const qmb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
