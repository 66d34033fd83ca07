#include "sgrl/io/metrics.hpp"

#include "sgrl/errors.hpp"
#include "sgrl/io/format.hpp"

namespace sgrl::io {

const char* MetricsWriter::header() {
    return "record_type,step,episode,episode_return,cumulative_catastrophes,"
           "catastrophe_episodes,gp_size,beta_value,guard_loss,critic_loss,"
           "actor_objective,eval_catastrophes";
}

MetricsWriter::MetricsWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_)
        throw ParseError("metrics: cannot open '" + path + "' for writing");
    out_ << header() << '\n';
}

void MetricsWriter::write(const EpisodeRecord& r) {
    out_ << "episode," << r.step << ',' << r.episode << ','
         << format_double(r.episode_return) << ',' << r.cumulative_catastrophes << ','
         << r.catastrophe_episodes << ',' << r.gp_size << ','
         << format_double(r.beta_value) << ',' << format_double(r.guard_loss) << ','
         << format_double(r.critic_loss) << ',' << format_double(r.actor_objective)
         << ",\n";
}

void MetricsWriter::write(const EvalRecord& r) {
    out_ << "eval," << r.step << ',' << r.episode << ',' << format_double(r.mean_return)
         << ',' << r.cumulative_catastrophes << ',' << r.catastrophe_episodes << ','
         << r.gp_size << ',' << format_double(r.beta_value) << ",,,,"
         << r.eval_catastrophes << '\n';
}

} // namespace sgrl::io
