#pragma once

#include <fstream>

#include <json.hpp>

#include "sail/env.hpp"

namespace sail {

// Demonstration files are JSON-lines, one trajectory per line:
//   {"episodic_return": R, "quality": q, "steps": [[[s...],[a...],[s'...],i], ...]}
// Per-step rewards are never stored; the episodic return is re-attached to
// the final transition on load when it is a true terminal.

inline void write_demos(std::ostream& os, const std::vector<Trajectory>& trajectories, double quality) {
    for (const auto& traj : trajectories) {
        nlohmann::json line;
        line["episodic_return"] = traj.episodic_return;
        line["quality"] = quality;
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& t : traj.transitions) steps.push_back({t.s, t.a, t.s_next, t.i});
        line["steps"] = std::move(steps);
        os << line.dump() << "\n";
    }
}

inline void save_demos(const std::string& path, const std::vector<Trajectory>& trajectories, double quality) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open demo file for writing: " + path);
    write_demos(f, trajectories, quality);
    if (!f) throw IoError("short write to demo file: " + path);
}

inline void validate_demo(const Trajectory& traj, const EnvSpec* spec) {
    if (traj.transitions.empty()) throw IoError("demo trajectory with no steps");
    for (std::size_t k = 0; k < traj.transitions.size(); ++k) {
        const Transition& t = traj.transitions[k];
        if (t.i != 0 && t.i != 1) throw IoError("demo indicator outside {0,1}");
        if (t.i == 1 && k + 1 != traj.transitions.size()) throw IoError("demo has a terminal before the final step");
        if (t.r_e != 0.0 && t.i != 1) throw IoError("demo carries an episodic reward on a non-terminal step");
        if (!all_finite(t.s) || !all_finite(t.a) || !all_finite(t.s_next)) throw IoError("demo has non-finite values");
        if (spec) {
            if (static_cast<int>(t.s.size()) != spec->state_dim || static_cast<int>(t.a.size()) != spec->action_dim)
                throw IoError("demo step dimensions do not match the environment");
            for (int d = 0; d < spec->action_dim; ++d) {
                const double a = t.a[static_cast<std::size_t>(d)];
                if (a < spec->action_low[static_cast<std::size_t>(d)] - 1e-12 ||
                    a > spec->action_high[static_cast<std::size_t>(d)] + 1e-12)
                    throw IoError("demo action outside declared bounds");
            }
        }
    }
}

inline std::vector<Trajectory> read_demos(std::istream& is, const EnvSpec* spec) {
    std::vector<Trajectory> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError("demo line " + std::to_string(lineno) + ": " + e.what());
        }
        Trajectory traj;
        traj.episodic_return = j.at("episodic_return").get<double>();
        for (const auto& step : j.at("steps")) {
            Transition t;
            t.s = step.at(0).get<Vec>();
            t.a = step.at(1).get<Vec>();
            t.s_next = step.at(2).get<Vec>();
            t.i = step.at(3).get<int>();
            traj.transitions.push_back(std::move(t));
        }
        if (!traj.transitions.empty() && traj.transitions.back().i == 1)
            traj.transitions.back().r_e = traj.episodic_return;
        validate_demo(traj, spec);
        out.push_back(std::move(traj));
    }
    return out;
}

inline std::vector<Trajectory> load_demos(const std::string& path, const EnvSpec* spec) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open demo file: " + path);
    return read_demos(f, spec);
}

}  // namespace sail
