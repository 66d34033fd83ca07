#pragma once

#include "sgrl/io/config.hpp"
#include "sgrl/rl/agent.hpp"

#include <memory>
#include <string>

namespace sgrl::io {

// Checkpoints are a JSON envelope describing the run plus a single base64
// blob of every parameter as contiguous little-endian binary64 values, in
// the tensor order listed in the envelope.  The round trip is exact: a
// loaded agent is bit-for-bit the agent that was saved.

struct CheckpointMeta {
    long step = 0;
    int episode = 0;
};

void save_checkpoint(const std::string& path, const rl::SafeDdpgAgent& agent,
                     const Config& config, const CheckpointMeta& meta);

struct LoadedCheckpoint {
    Config config;
    CheckpointMeta meta;
    std::unique_ptr<rl::SafeDdpgAgent> agent;
};

// Throws ParseError on any structural problem (bad JSON, unknown format
// version, tensor counts that disagree with the declared architecture,
// truncated blob).
LoadedCheckpoint load_checkpoint(const std::string& path);

} // namespace sgrl::io
