#pragma once

#include <filesystem>
#include <string>

#include "kanppo/network.hpp"
#include "kanppo/normalizer.hpp"

namespace kanppo {

/// Everything needed to rebuild a policy for evaluation or pruning: the
/// architecture spec, flat parameter values per named slice, KAN edge masks,
/// and the frozen observation-normalizer state.
struct Checkpoint {
  std::string env_name;
  ActorCritic net;
  ObsNormalizer normalizer;
};

/// JSON serialization. Doubles survive a round trip bit-exactly (shortest
/// round-trip formatting), so save followed by load reproduces the network
/// byte for byte.
std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kanppo
