#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "pet/learn/policy.hpp"

namespace pet::learn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_checkpoint(std::ostream& out, const std::vector<PolicyParams>& agents);
std::vector<PolicyParams> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const std::vector<PolicyParams>& agents);
std::vector<PolicyParams> load_checkpoint(const std::filesystem::path& path);

}  // namespace pet::learn
