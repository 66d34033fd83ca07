#include "sgrl/io/trajectory.hpp"

#include "sgrl/errors.hpp"
#include "sgrl/io/format.hpp"

#include <fstream>
#include <sstream>

namespace sgrl::io {

namespace {
constexpr const char* kHeader = "s0,s1,a0,r,c,sn0,sn1,done";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}
} // namespace

void write_trajectory(const std::string& path, const std::vector<rl::Transition>& transitions) {
    std::ofstream out(path, std::ios::binary); // binary: no newline translation
    if (!out)
        throw ParseError("trajectory: cannot open '" + path + "' for writing");
    out << kHeader << '\n';
    for (const rl::Transition& t : transitions) {
        if (t.state.size() != 2 || t.next_state.size() != 2 || t.action.size() != 1)
            throw ParseError("trajectory: only 2-d states with scalar actions are supported");
        out << format_double(t.state(0)) << ',' << format_double(t.state(1)) << ','
            << format_double(t.action(0)) << ',' << format_double(t.reward) << ','
            << format_double(t.cost) << ',' << format_double(t.next_state(0)) << ','
            << format_double(t.next_state(1)) << ',' << (t.done ? '1' : '0') << '\n';
    }
    if (!out)
        throw ParseError("trajectory: write to '" + path + "' failed");
}

std::vector<rl::Transition> read_trajectory(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("trajectory: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("trajectory: empty file '" + path + "'");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != kHeader)
        throw ParseError("trajectory: unexpected header '" + line + "'");

    std::vector<rl::Transition> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != 8)
            throw ParseError("trajectory: row " + std::to_string(row) + " has " +
                             std::to_string(f.size()) + " fields, expected 8");
        rl::Transition t;
        t.state = Eigen::Vector2d(parse_double(f[0]), parse_double(f[1]));
        t.action = Eigen::VectorXd::Constant(1, parse_double(f[2]));
        t.reward = parse_double(f[3]);
        t.cost = parse_double(f[4]);
        t.next_state = Eigen::Vector2d(parse_double(f[5]), parse_double(f[6]));
        if (f[7] == "0")
            t.done = false;
        else if (f[7] == "1")
            t.done = true;
        else
            throw ParseError("trajectory: row " + std::to_string(row) + " has bad done flag");
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace sgrl::io
