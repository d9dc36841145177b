#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lasco/feedback/codec.hpp"
#include "lasco/models/recon_net.hpp"

namespace lasco::models {

// Single-file archive: magic, version, JSON meta block, name-length-prefixed
// float32 tensor records, trailing CRC32 over everything before it.
struct CheckpointMeta {
  ModelConfig config;
  feedback::CodecKey codec;
  std::string role = "standalone";
  uint64_t train_seed = 0;
  int64_t epochs = 0;
  std::vector<int> dataset_ids;
};

void save_checkpoint(const ReconNet<float>& net, const CheckpointMeta& meta,
                     const std::string& path);

struct LoadedCheckpoint {
  CheckpointMeta meta;
  ReconNet<float> net;
};

// Throws CorruptFileError / VersionMismatchError; additionally MismatchError
// when expectations are provided and disagree with the stored meta.
LoadedCheckpoint load_checkpoint(
    const std::string& path,
    const std::optional<ModelConfig>& expect_config = std::nullopt,
    const std::optional<feedback::CodecKey>& expect_codec = std::nullopt);

CheckpointMeta read_checkpoint_meta(const std::string& path);

}  // namespace lasco::models
