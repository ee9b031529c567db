#pragma once

#include <cstdio>
#include <fstream>

#include "sail/common.hpp"

namespace sail {

// One learning-curve sample, taken at every evaluation checkpoint.
struct RunRecord {
    long env_steps = 0;
    double eval_mean_return = 0.0;
    double eval_std = 0.0;
    double train_episode_return = 0.0;
    double teacher_threshold = 0.0;
    double alpha = 0.0;
    double disc_loss = 0.0;
    double critic_loss = 0.0;
    long promotions_count = 0;
};

struct RunLog {
    std::vector<RunRecord> records;
};

inline const char* runlog_csv_header() {
    return "env_steps,eval_mean_return,eval_std,train_episode_return,teacher_threshold,alpha,disc_loss,critic_loss,"
           "promotions_count";
}

inline std::string runlog_csv_row(const RunRecord& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%ld", r.env_steps,
                  r.eval_mean_return, r.eval_std, r.train_episode_return, r.teacher_threshold, r.alpha, r.disc_loss,
                  r.critic_loss, r.promotions_count);
    return buf;
}

inline void write_runlog_csv(std::ostream& os, const RunLog& log) {
    os << runlog_csv_header() << "\n";
    for (const auto& r : log.records) os << runlog_csv_row(r) << "\n";
}

inline RunLog read_runlog_csv(std::istream& is) {
    RunLog log;
    std::string line;
    if (!std::getline(is, line)) throw IoError("run log: empty file");
    if (line != runlog_csv_header()) throw IoError("run log: unexpected header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        RunRecord r;
        const int got = std::sscanf(line.c_str(), "%ld,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%ld", &r.env_steps,
                                    &r.eval_mean_return, &r.eval_std, &r.train_episode_return, &r.teacher_threshold,
                                    &r.alpha, &r.disc_loss, &r.critic_loss, &r.promotions_count);
        if (got != 9) throw IoError("run log: malformed row: " + line);
        log.records.push_back(r);
    }
    return log;
}

inline RunLog load_runlog_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open run log: " + path);
    return read_runlog_csv(f);
}

}  // namespace sail
