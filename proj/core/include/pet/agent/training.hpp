#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pet/agent/controller.hpp"
#include "pet/sim/fabric.hpp"
#include "pet/traffic/workload.hpp"

namespace pet::agent {

struct TrainingRow {
  std::uint32_t episode = 0;
  std::uint32_t agent = 0;
  double mean_reward = 0;
  double policy_loss = 0;
  double value_loss = 0;
  double clip_frac = 0;
};

struct TrainingReport {
  std::vector<TrainingRow> rows;

  void append(std::uint32_t episode, const std::vector<EpisodeStats>& stats);
  /// Mean reward across agents, one entry per episode in order.
  std::vector<double> episode_mean_rewards() const;
  /// CSV `episode,agent,mean_reward,policy_loss,value_loss,clip_frac`.
  void write_csv(std::ostream& out) const;
};

struct PretrainConfig {
  sim::FabricConfig fabric;
  ControllerConfig controller;
  SimTime episode_duration = std::chrono::milliseconds(100);
};

struct PretrainResult {
  std::vector<learn::PolicyParams> params;
  TrainingReport report;
};

/// Trace-driven training: episode e replays traces[e % traces.size()] for
/// episode_duration with agents updating online at a fixed eps0. `init`
/// may be empty (fresh policies).
PretrainResult pretrain_offline(const PretrainConfig& config,
                                const std::vector<std::vector<transport::FlowSpec>>& traces,
                                std::uint32_t episodes, std::vector<learn::PolicyParams> init = {});

/// File-level variant: parses the trace CSVs and writes the checkpoint.
PretrainResult pretrain_offline(const PretrainConfig& config,
                                const std::vector<std::filesystem::path>& trace_files,
                                std::uint32_t episodes,
                                const std::filesystem::path& out_checkpoint);

struct OnlineConfig {
  sim::FabricConfig fabric;
  ControllerConfig controller;
  traffic::WorkloadSpec workload;
  SimTime duration = std::chrono::milliseconds(100);
  std::uint64_t seed = 1;
  /// After `duration`, keep simulating (agents still active) until all
  /// flows finish or drain_limit is reached.
  bool drain = false;
  SimTime drain_limit = std::chrono::seconds(2);
};

struct OnlineResult {
  std::vector<transport::FctRecord> fct;
  sim::SimStats stats;
  TrainingReport report;
  std::vector<learn::PolicyParams> params;
  std::uint64_t actions = 0;
};

/// Generator-driven run with agents in config.controller.mode (online or
/// frozen_eval).
OnlineResult run_online(std::vector<learn::PolicyParams> params, const OnlineConfig& config);
OnlineResult run_online(const std::filesystem::path& checkpoint, const OnlineConfig& config,
                        const std::filesystem::path& out_checkpoint = {});

/// Collects FCT records from a fabric.
class FctCollector final : public sim::FabricObserver {
 public:
  void on_flow_complete(const transport::FctRecord& record) override { records_.push_back(record); }
  const std::vector<transport::FctRecord>& records() const noexcept { return records_; }
  std::vector<transport::FctRecord> take() { return std::move(records_); }

 private:
  std::vector<transport::FctRecord> records_;
};

}  // namespace pet::agent
