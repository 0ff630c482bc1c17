#pragma once

#include <filesystem>
#include <vector>

#include "deepref/nn/networks.hpp"

namespace deepref::nn {

// Checkpoint layout: a text header
//   deepref-checkpoint 1
//   kind dqn|drqn
//   shape <input> <hidden> <actions>
//   layer <role> <type> <in> <out>     (one per layer)
//   tensor <rows> <cols>               (one per parameter tensor)
//   end
// followed by every tensor's values as little-endian float64, row-major,
// in header order.
struct CheckpointHeader {
  int version = 1;
  NetworkShape shape;
  std::vector<LayerInfo> layers;
  std::vector<std::pair<std::size_t, std::size_t>> tensors;
};

void save_checkpoint(const std::filesystem::path& path, FeedForwardQNet& net);
void save_checkpoint(const std::filesystem::path& path, RecurrentQNet& net);

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

// Throw DataError on a missing, truncated or mismatched file.
FeedForwardQNet load_feedforward(const std::filesystem::path& path);
RecurrentQNet load_recurrent(const std::filesystem::path& path);

}  // namespace deepref::nn
