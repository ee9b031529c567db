#pragma once

#include <algorithm>

#include "sail/env.hpp"

namespace sail {

// FIFO ring of transitions with uniform sampling.
class SelfBuffer {
  public:
    explicit SelfBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity_ == 0) throw ConfigError("SelfBuffer: capacity must be positive");
    }

    void push(Transition t) {
        if (ring_.size() < capacity_) {
            ring_.push_back(std::move(t));
        } else {
            ring_[cursor_] = std::move(t);
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    const Transition& sample(Rng& rng) const {
        if (ring_.empty()) throw UsageError("SelfBuffer: sampling from an empty buffer");
        return ring_[static_cast<std::size_t>(rng() % ring_.size())];
    }

    std::size_t size() const { return ring_.size(); }
    std::size_t capacity() const { return capacity_; }
    const std::vector<Transition>& raw() const { return ring_; }

  private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> ring_;
};

// Demonstration store keyed by episodic return. Promotion strictly beats the
// threshold (the minimum stored return); overflow evicts the worst
// trajectory, so the threshold never decreases.
class TeacherBuffer {
  public:
    explicit TeacherBuffer(std::size_t capacity_trajectories) : capacity_(capacity_trajectories) {
        if (capacity_ == 0) throw ConfigError("TeacherBuffer: capacity must be positive");
    }

    void initialize(std::vector<Trajectory> demos) {
        if (demos.empty()) throw ConfigError("TeacherBuffer: initialized with no demonstrations");
        trajectories_ = std::move(demos);
        while (trajectories_.size() > capacity_) evict_worst();
        rebuild_index();
    }

    double threshold() const {
        if (trajectories_.empty()) throw UsageError("TeacherBuffer: threshold of an empty buffer");
        double lo = trajectories_.front().episodic_return;
        for (const auto& t : trajectories_) lo = std::min(lo, t.episodic_return);
        return lo;
    }

    // Algorithm: add the trajectory iff its episodic score strictly exceeds
    // the threshold. Timeout trajectories never promote; their score was
    // never revealed.
    bool maybe_promote(Trajectory traj) {
        if (traj.transitions.empty()) throw UsageError("TeacherBuffer: promoting an empty trajectory");
        if (!traj.reached_terminal()) return false;
        if (!(traj.episodic_return > threshold())) return false;
        if (trajectories_.size() >= capacity_) evict_worst();
        trajectories_.push_back(std::move(traj));
        rebuild_index();
        return true;
    }

    const Transition& sample(Rng& rng) const {
        if (flat_.empty()) throw UsageError("TeacherBuffer: sampling from an empty buffer");
        const auto& [ti, si] = flat_[static_cast<std::size_t>(rng() % flat_.size())];
        return trajectories_[ti].transitions[si];
    }

    std::size_t num_trajectories() const { return trajectories_.size(); }
    std::size_t num_transitions() const { return flat_.size(); }
    const std::vector<Trajectory>& trajectories() const { return trajectories_; }

  private:
    void evict_worst() {
        auto worst = trajectories_.begin();
        for (auto it = trajectories_.begin(); it != trajectories_.end(); ++it)
            if (it->episodic_return < worst->episodic_return) worst = it;
        trajectories_.erase(worst);
    }

    void rebuild_index() {
        flat_.clear();
        for (std::size_t t = 0; t < trajectories_.size(); ++t)
            for (std::size_t s = 0; s < trajectories_[t].transitions.size(); ++s) flat_.emplace_back(t, s);
    }

    std::size_t capacity_;
    std::vector<Trajectory> trajectories_;
    std::vector<std::pair<std::size_t, std::size_t>> flat_;
};

// Teacher fraction of each training batch. Initialized at 0.5 and annealed to
// zero once the policy starts beating the demonstrations; the pseudocode drop
// to zero is the default, a per-promotion linear schedule is the alternative.
struct MixtureSampler {
    enum class Anneal { step, linear };

    double alpha = 0.5;
    double alpha_init = 0.5;
    Anneal mode = Anneal::step;
    int linear_events = 10;
    int promotions_seen = 0;

    static MixtureSampler make(double alpha_init, Anneal mode, int linear_events = 10) {
        if (alpha_init < 0.0 || alpha_init > 1.0) throw ConfigError("alpha_init must lie in [0,1]");
        if (linear_events < 1) throw ConfigError("linear anneal needs at least one event");
        return {alpha_init, alpha_init, mode, linear_events, 0};
    }
};

inline void anneal_alpha(MixtureSampler& sampler, bool promotion_occurred) {
    if (!promotion_occurred) return;
    sampler.promotions_seen += 1;
    if (sampler.mode == MixtureSampler::Anneal::step) {
        sampler.alpha = 0.0;
    } else {
        const double frac = static_cast<double>(sampler.promotions_seen) / sampler.linear_events;
        sampler.alpha = std::max(0.0, sampler.alpha_init * (1.0 - frac));
    }
}

struct MixedBatch {
    std::vector<Transition> items;
    std::vector<bool> from_teacher;

    std::size_t size() const { return items.size(); }
};

// Draws round(alpha*n) teacher transitions and the rest from the self buffer,
// each uniform within its source.
inline MixedBatch sample_mixture(const SelfBuffer& selfbuf, const TeacherBuffer& teacherbuf,
                                 const MixtureSampler& sampler, std::size_t n, Rng& rng) {
    if (n < 1) throw UsageError("sample_mixture: batch size must be >= 1");
    const auto n_teacher = static_cast<std::size_t>(std::lround(sampler.alpha * static_cast<double>(n)));
    const std::size_t n_self = n - n_teacher;
    if (n_teacher > 0 && teacherbuf.num_transitions() == 0)
        throw UsageError("sample_mixture: alpha > 0 with an empty teacher buffer");
    if (n_self > 0 && selfbuf.size() == 0) throw UsageError("sample_mixture: empty self buffer");

    MixedBatch batch;
    batch.items.reserve(n);
    batch.from_teacher.reserve(n);
    for (std::size_t k = 0; k < n_teacher; ++k) {
        batch.items.push_back(teacherbuf.sample(rng));
        batch.from_teacher.push_back(true);
    }
    for (std::size_t k = 0; k < n_self; ++k) {
        batch.items.push_back(selfbuf.sample(rng));
        batch.from_teacher.push_back(false);
    }
    return batch;
}

}  // namespace sail
