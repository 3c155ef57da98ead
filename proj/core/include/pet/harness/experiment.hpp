#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pet/agent/training.hpp"
#include "pet/harness/metrics.hpp"
#include "pet/harness/scenario.hpp"

namespace pet::harness {

struct RunKey {
  double load = 0.6;
  std::uint64_t seed = 1;
  Scheme scheme;

  /// e.g. "load60_seed1_secn2".
  std::string dir_name() const;
};

struct Regime {
  std::string label;
  SimTime start{0};
  SimTime end{0};
  std::vector<FctSummary> fct;
  std::uint64_t drops = 0;
  std::optional<QueueSummary> queue;
};

struct BundleResult {
  RunKey key;
  std::vector<transport::FctRecord> fct;  // sorted by flow id
  std::vector<QueueSample> queue;
  std::vector<std::string> state_log;     // CSV rows without header
  sim::SimStats stats;
  std::vector<SimTime> drop_times;
  std::vector<std::uint32_t> failed_cables;
  std::vector<Regime> regimes;
  std::size_t flows_generated = 0;
  /// Distinct ECN configurations observed on any port while sampling.
  std::vector<queue::EcnConfig> observed_configs;
  std::uint64_t config_applications = 0;
  std::optional<agent::TrainingReport> training;
  std::optional<std::vector<learn::PolicyParams>> params;
};

struct RunOptions {
  std::uint64_t seed_offset = 0;
  /// Overrides the scenario's pet.checkpoint / pretraining.
  std::optional<std::filesystem::path> checkpoint;
  std::optional<agent::AgentMode> mode;
  /// Policies to start from instead of checkpoint/pretraining (in-process use).
  const std::vector<learn::PolicyParams>* initial_params = nullptr;
  /// Restricts the run to these schemes when non-empty.
  std::vector<SchemeKind> only;
};

/// Simulates one (load, seed, scheme) combination.
BundleResult run_bundle(const Scenario& scenario, const RunKey& key, const RunOptions& options = {});

/// Writes fct.csv, queue.csv, regimes.csv, summary.json and, for pet,
/// training.csv, policy.ckpt and optionally state.csv into `dir`.
void write_bundle(const Scenario& scenario, const BundleResult& result,
                  const std::filesystem::path& dir);

inline constexpr const char* kIncompleteMarker = ".incomplete";

/// Runs every (load, seed, scheme) bundle under out_dir. A bundle directory
/// keeps an `.incomplete` marker until it has been fully written. Returns
/// the bundle directories.
std::vector<std::filesystem::path> run_experiment(const Scenario& scenario,
                                                  const std::filesystem::path& out_dir,
                                                  const RunOptions& options = {});

/// Pretrains fresh policies on generated traces of the scenario's workload.
agent::PretrainResult pretrain_for(const Scenario& scenario, double load, std::uint64_t seed,
                                   std::uint32_t episodes);

agent::ControllerConfig controller_config(const Scenario& scenario, std::uint64_t seed);
sim::FabricConfig fabric_config(const Scenario& scenario, const Scheme& scheme);

struct SummaryRow {
  std::string run;
  FctSummary fct;
  std::optional<QueueSummary> queue;
};

/// Summaries for every bundle under `in` (or `in` itself if it is a bundle).
std::vector<SummaryRow> summarize_dir(const std::filesystem::path& in);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

inline constexpr const char* kNormalizationNote =
    "norm_fct = fct / (size * 8 / bottleneck_rate + base_rtt); base_rtt is the round-trip "
    "propagation plus one-MTU serialization per forward hop";

}  // namespace pet::harness
