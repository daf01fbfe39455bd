#pragma once
// Reading a memoryless strategy (or FSC action mapping) off a trained policy.

#include "psynth/policy.hpp"
#include "psynth/strategy.hpp"

namespace psynth {

struct ExtractReport {
  std::size_t fallbacks = 0;  // rows with no mass left on allowed actions
  std::size_t unused = 0;     // observation ids no state emits
};

// One row per observation id of m (use the product model for FSCs, with
// memory_nodes = k). Each row is the prediction for the length-1 sequence (z),
// restricted to the actions of the observation class and renormalised.
// predictions > 1 repeats the query and insists on identical answers.
ObservationStrategy extract_strategy(const RecurrentPolicy& p, const Pomdp& m, std::size_t memory_nodes = 1,
                                     ExtractReport* report = nullptr, std::size_t predictions = 1);

}  // namespace psynth
