// Command-line front end: run, pretrain, eval, summarize.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pet/agent/training.hpp"
#include "pet/errors.hpp"
#include "pet/harness/experiment.hpp"
#include "pet/learn/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace pet;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("pet");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("PET_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") {
      spdlog::warn("PET_LOG='{}' not recognised; using info", env);
    } else {
      spdlog::set_level(level);
    }
  }
}

int cmd_run(const fs::path& config, const fs::path& out, std::uint64_t seed_offset) {
  const auto scenario = harness::load_scenario(config);
  harness::RunOptions opts;
  opts.seed_offset = seed_offset;
  const auto dirs = harness::run_experiment(scenario, out, opts);
  spdlog::info("wrote {} bundle(s) under {}", dirs.size(), out.string());
  return 0;
}

int cmd_pretrain(const std::vector<fs::path>& traces, std::uint32_t episodes, const fs::path& out,
                 const std::optional<fs::path>& config, double episode_ms) {
  agent::PretrainConfig pc;
  if (config) {
    const auto scenario = harness::load_scenario(*config);
    pc.fabric = harness::fabric_config(scenario, harness::Scheme{});
    pc.controller = harness::controller_config(scenario, scenario.seeds.front());
    pc.episode_duration = scenario.pet.pretrain_episode;
  }
  if (episode_ms > 0) {
    pc.episode_duration = SimTime{static_cast<SimTime::rep>(episode_ms * 1e6)};
  }
  const auto result = agent::pretrain_offline(pc, traces, episodes, out);
  const auto curve = result.report.episode_mean_rewards();
  for (std::size_t e = 0; e < curve.size(); ++e) {
    spdlog::info("episode {}: mean reward {:.6f}", e, curve[e]);
  }
  auto report_path = out;
  report_path += ".training.csv";
  std::ofstream rep(report_path);
  result.report.write_csv(rep);
  spdlog::info("checkpoint written to {}", out.string());
  return 0;
}

int cmd_eval(const fs::path& ckpt, const fs::path& config, const fs::path& out) {
  const auto scenario = harness::load_scenario(config);
  harness::RunOptions opts;
  opts.checkpoint = ckpt;
  opts.mode = agent::AgentMode::frozen_eval;
  opts.only = {harness::SchemeKind::pet};
  auto sc = scenario;
  if (std::none_of(sc.schemes.begin(), sc.schemes.end(),
                   [](const auto& s) { return s.kind == harness::SchemeKind::pet; })) {
    sc.schemes.push_back(harness::Scheme{});
  }
  const auto dirs = harness::run_experiment(sc, out, opts);
  spdlog::info("wrote {} bundle(s) under {}", dirs.size(), out.string());
  return 0;
}

int cmd_summarize(const fs::path& in, const fs::path& out) {
  const auto rows = harness::summarize_dir(in);
  if (rows.empty()) {
    spdlog::error("no complete bundles found under {}", in.string());
    return 1;
  }
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw ConfigError("summarize: cannot write " + out.string());
  harness::write_summary_csv(f, rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Packet-level leaf-spine simulator with per-port learned ECN tuning"};
  app.require_subcommand(1);

  fs::path run_config, run_out;
  std::uint64_t seed_offset = 0;
  auto* run = app.add_subcommand("run", "Run every (load, seed, scheme) bundle of a scenario");
  run->add_option("--config", run_config, "Scenario JSON")->required();
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--seed-offset", seed_offset, "Added to every scenario seed");

  std::vector<fs::path> traces;
  std::uint32_t episodes = 0;
  fs::path pre_out;
  std::optional<fs::path> pre_config;
  double episode_ms = 0;
  auto* pre = app.add_subcommand("pretrain", "Offline trace-driven pretraining");
  pre->add_option("--trace", traces, "Trace CSV (start_ns,src,dst,size_bytes); repeatable")
      ->required();
  pre->add_option("--episodes", episodes, "Number of episodes")->required();
  pre->add_option("--out", pre_out, "Checkpoint to write")->required();
  pre->add_option("--config", pre_config, "Scenario JSON for topology and agent settings");
  pre->add_option("--episode-ms", episode_ms, "Episode length in ms (overrides config)");

  fs::path eval_ckpt, eval_config, eval_out;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint with frozen greedy agents");
  ev->add_option("--ckpt", eval_ckpt, "Checkpoint")->required();
  ev->add_option("--config", eval_config, "Scenario JSON")->required();
  ev->add_option("--out", eval_out, "Output directory")->required();

  fs::path sum_in, sum_out;
  auto* sum = app.add_subcommand("summarize", "Summarize bundles into one CSV");
  sum->add_option("--in", sum_in, "Bundle or directory of bundles")->required();
  sum->add_option("--out", sum_out, "CSV to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_config, run_out, seed_offset);
    if (*pre) return cmd_pretrain(traces, episodes, pre_out, pre_config, episode_ms);
    if (*ev) return cmd_eval(eval_ckpt, eval_config, eval_out);
    if (*sum) return cmd_summarize(sum_in, sum_out);
  } catch (const ConfigError& e) {
    spdlog::error("invalid configuration: {}", e.what());
    return 2;
  } catch (const ParseError& e) {
    spdlog::error("parse error: {}", e.what());
    return 2;
  } catch (const learn::CheckpointError& e) {
    spdlog::error("checkpoint: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
