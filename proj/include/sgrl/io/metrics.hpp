#pragma once

#include <cstdint>
#include <fstream>
#include <string>

namespace sgrl::io {

struct EpisodeRecord {
    long step = 0;    // total environment steps at episode end
    int episode = 0;  // 1-based episode index
    double episode_return = 0.0;
    long cumulative_catastrophes = 0;
    int catastrophe_episodes = 0;
    long gp_size = 0;
    double beta_value = 0.0;
    double guard_loss = 0.0;     // episode means
    double critic_loss = 0.0;
    double actor_objective = 0.0;
};

struct EvalRecord {
    long step = 0;
    int episode = 0;
    double mean_return = 0.0;
    long cumulative_catastrophes = 0; // training total at eval time
    int catastrophe_episodes = 0;
    long gp_size = 0;
    double beta_value = 0.0;
    int eval_catastrophes = 0; // within the evaluation episodes themselves
};

// Streaming CSV writer for training metrics.  One file, one header, two row
// shapes distinguished by the record_type column; fields that do not apply
// to a row are left empty.  Output is byte-deterministic for a given run.
class MetricsWriter {
public:
    explicit MetricsWriter(const std::string& path);

    void write(const EpisodeRecord& r);
    void write(const EvalRecord& r);

    static const char* header();

private:
    std::ofstream out_;
};

} // namespace sgrl::io
