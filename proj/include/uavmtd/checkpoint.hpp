#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "uavmtd/policy_net.hpp"

namespace uavmtd {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[8] = {'U', 'A', 'V', 'M', 'T', 'D', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout, all integers and floats little-endian:
///   magic[8] version:u32 n_agents:u32
///   per agent: n_layers:u32, then per layer
///     part:u8 (0 shared, 1 head) label_len:u8 label rows:u32 cols:u32
///     weight f64[rows*cols] (column-major) bias f64[rows]
std::vector<char> encode_checkpoint(const std::vector<Policy>& agents);
std::vector<Policy> decode_checkpoint(const std::vector<char>& bytes);

void save_checkpoint(const std::filesystem::path& path, const std::vector<Policy>& agents);
/// Errors name the file.
std::vector<Policy> load_checkpoint(const std::filesystem::path& path);

}  // namespace uavmtd
