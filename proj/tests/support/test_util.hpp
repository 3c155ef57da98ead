#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "pet/random.hpp"
#include "pet/sim/fabric.hpp"

namespace pet::test {

/// 2 spines, 2 leaves, 2 hosts per leaf.
inline sim::TopologyConfig tiny_topology() {
  sim::TopologyConfig t;
  t.n_spine = 2;
  t.n_leaf = 2;
  t.hosts_per_leaf = 2;
  return t;
}

inline sim::FabricConfig tiny_fabric() {
  sim::FabricConfig c;
  c.topology = tiny_topology();
  return c;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("pet_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace pet::test
