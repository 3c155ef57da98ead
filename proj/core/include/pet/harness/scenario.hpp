#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "pet/agent/controller.hpp"
#include "pet/queue/ecn_config.hpp"
#include "pet/sim/topology.hpp"
#include "pet/traffic/workload.hpp"

namespace pet::harness {

enum class SchemeKind { pet, secn1, secn2, fixed };

struct Scheme {
  SchemeKind kind = SchemeKind::pet;
  queue::EcnConfig fixed;  // used when kind == fixed

  std::string label() const;
};

/// Static thresholds for the non-learning schemes.
queue::EcnConfig scheme_ecn(const Scheme& scheme, double baseline_p_max);

struct WorkloadSwitch {
  SimTime at{0};
  traffic::WorkloadSpec workload;
};

struct FailureSpec {
  double fraction = 0.1;
  SimTime down_at{0};
  SimTime up_at{0};
};

struct PetOptions {
  std::optional<std::filesystem::path> checkpoint;
  std::uint32_t pretrain_episodes = 0;
  SimTime pretrain_episode = std::chrono::milliseconds(100);
  agent::AgentMode mode = agent::AgentMode::online;
  std::optional<double> beta1;  // defaults follow the initial workload
  learn::Hyperparams hp;
  SimTime delta_t{0};
  bool mask_incast = false;
  bool mask_ratio = false;
};

struct Scenario {
  std::string name = "scenario";
  sim::TopologyConfig topology;
  traffic::WorkloadSpec workload;
  std::vector<WorkloadSwitch> switches;
  std::vector<double> loads{0.6};
  std::vector<Scheme> schemes{Scheme{}};
  double baseline_p_max = 0.2;
  std::optional<FailureSpec> failures;
  SimTime duration = std::chrono::milliseconds(100);
  bool drain = true;
  SimTime drain_limit = std::chrono::seconds(1);
  std::vector<std::uint64_t> seeds{1};
  SimTime queue_sample = std::chrono::microseconds(100);
  bool state_log = false;
  PetOptions pet;
  nlohmann::json source;  // the parsed document, echoed into summaries
};

/// Parses and validates; errors are ConfigError naming the offending field
/// (e.g. "schemes[1]: unknown scheme 'foo'").
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);
void validate(const Scenario& scenario);

/// The fabric cables that go down: max(1, round(fraction * fabric cables))
/// chosen by a seeded shuffle.
std::vector<std::uint32_t> choose_failed_cables(const sim::Topology& topology, double fraction,
                                                std::uint64_t seed);

}  // namespace pet::harness
