#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "cnet/adam.hpp"
#include "cnet/config.hpp"
#include "cnet/model.hpp"

namespace cnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything restored from a checkpoint file.
struct Checkpoint {
  CNetConfig config;
  CNetModel model;
  AdamState<float> optimizer;
  /// Free-form entries stored alongside the config (class names, etc.).
  std::map<std::string, std::string> metadata;
};

/// Layout (all integers little-endian):
///   "CNET" | u32 version | u32 text length | text | u32 tensor count |
///   tensor records | u32 CRC-32 of every preceding byte
/// The text block is canonical "key=value" lines sorted by key: network
/// config keys, "adam.*" optimizer scalars and "meta.*" metadata. A tensor
/// record is u32 name length | name | u8 dtype (1 = f32) | u32 rank |
/// u32 dims... | f32 payload. Parameters come first in registry order,
/// followed by "adam.m.<name>" and "adam.v.<name>" moments.
///
/// Throws kIoError when the file cannot be written.
void save_checkpoint(const std::filesystem::path& path, const CNetModel& model,
                     const AdamState<float>& optimizer,
                     const std::map<std::string, std::string>& metadata = {});

/// Throws kCorruptChecksum (truncated or altered file), kFormatVersionMismatch
/// (wrong magic or version), kConfigMismatch (config differs from
/// `expected`, or tensors do not fit the graph), kIoError (unreadable).
Checkpoint load_checkpoint(const std::filesystem::path& path, const CNetConfig* expected = nullptr);

}  // namespace cnet
