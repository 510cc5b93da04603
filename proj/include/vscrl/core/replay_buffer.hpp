#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "vscrl/core/types.hpp"

namespace vscrl {

struct BufferEntry {
  SubTrajectory sub;
  Goal goal;
};

// One sampled transition. Points into the buffer, so it is only valid until
// the next push.
class Sample {
 public:
  Sample(const BufferEntry* entry, const Transition* step) : entry_(entry), step_(step) {}

  const Observation& obs() const { return step_->obs; }
  int action() const { return step_->action; }
  const Subgoal& subgoal() const { return entry_->sub.subgoal; }
  double return_bit() const { return entry_->sub.return_bit; }
  const Goal& goal() const { return entry_->goal; }
  const Transition& transition() const { return *step_; }

 private:
  const BufferEntry* entry_;
  const Transition* step_;
};

using Batch = std::vector<Sample>;

// FIFO store of sub-trajectories. Single writer; sampling must not overlap
// with a push.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw Error("invalid-capacity");
  }

  void push(SubTrajectory sub, Goal goal) {
    if (sub.size() == 0) return;
    entries_.push_back(BufferEntry{std::move(sub), std::move(goal)});
    while (entries_.size() > capacity_) entries_.pop_front();
    dirty_ = true;
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const BufferEntry& entry(std::size_t i) const { return entries_.at(i); }

  std::size_t transition_count() const {
    refresh();
    return offsets_.empty() ? 0 : offsets_.back();
  }

  // Uniform with replacement over every stored transition.
  Batch sample_batch(std::size_t batch_size, std::mt19937_64& rng) const {
    if (entries_.empty()) throw Error("empty-buffer");
    if (batch_size == 0) throw Error("invalid-batch-size");
    refresh();
    const std::uint64_t total = offsets_.back();
    Batch out;
    out.reserve(batch_size);
    for (std::size_t k = 0; k < batch_size; ++k) {
      // Plain modulo reduction keeps the stream identical across standard
      // libraries, unlike uniform_int_distribution.
      const std::uint64_t flat = rng() % total;
      auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat);
      const auto e = static_cast<std::size_t>(it - offsets_.begin());
      const std::uint64_t base = e == 0 ? 0 : offsets_[e - 1];
      const BufferEntry& entry = entries_[e];
      out.emplace_back(&entry, &entry.sub.steps()[flat - base]);
    }
    return out;
  }

  Batch sample_batch(std::size_t batch_size, std::uint64_t rng_seed) const {
    std::mt19937_64 rng(rng_seed);
    return sample_batch(batch_size, rng);
  }

 private:
  void refresh() const {
    if (!dirty_) return;
    offsets_.clear();
    offsets_.reserve(entries_.size());
    std::uint64_t acc = 0;
    for (const auto& e : entries_) {
      acc += e.sub.size();
      offsets_.push_back(acc);
    }
    dirty_ = false;
  }

  std::size_t capacity_;
  std::deque<BufferEntry> entries_;
  mutable std::vector<std::uint64_t> offsets_;
  mutable bool dirty_ = true;
};

}  // namespace vscrl
