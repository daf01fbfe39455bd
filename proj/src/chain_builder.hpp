#pragma once
// Row-by-row DTMC assembly. Contributions are merged per target in a fixed
// order so that different constructions of the same chain agree bit for bit.

#include <algorithm>
#include <utility>
#include <vector>

#include "psynth/mc.hpp"

namespace psynth::detail {

class ChainBuilder {
 public:
  void add(StateId target, double prob) { pending_.emplace_back(target, prob); }
  void add_reward(double r) { reward_ += r; }

  void finish_row(StateId origin, std::size_t memory) {
    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < pending_.size();) {
      const StateId t = pending_[i].first;
      double sum = 0.0;
      for (; i < pending_.size() && pending_[i].first == t; ++i) sum += pending_[i].second;
      if (sum > 0.0) {
        d_.p.col.push_back(t);
        d_.p.val.push_back(sum);
      }
    }
    d_.p.row_start.push_back(d_.p.col.size());
    d_.reward.push_back(reward_);
    d_.origin.push_back(origin);
    d_.memory.push_back(memory);
    pending_.clear();
    reward_ = 0.0;
  }

  Dtmc finish(StateId initial, std::vector<Transition> dist) {
    d_.initial = initial;
    d_.initial_distribution = std::move(dist);
    return std::move(d_);
  }

 private:
  Dtmc d_;
  std::vector<std::pair<StateId, double>> pending_;
  double reward_ = 0.0;
};

}  // namespace psynth::detail
