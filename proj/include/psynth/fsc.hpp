#pragma once
// Finite-state controllers with a fixed memory update.
//
// FSC file format:
//   fsc k=<k> init=0
//   gamma <n> <z> : <action>=<p> ...
//   delta <n> <z> <action> -> <n'>

#include <string>
#include <string_view>
#include <vector>

#include "psynth/mc.hpp"
#include "psynth/model.hpp"
#include "psynth/spec.hpp"
#include "psynth/strategy.hpp"

namespace psynth {

enum class MemoryKind { ObservationRepeat, SpecDriven, ExplicitTable };

std::string memory_kind_name(MemoryKind kind);
MemoryKind parse_memory_kind(std::string_view name);

struct MemoryUpdate {
  MemoryKind kind = MemoryKind::ExplicitTable;
  std::size_t nodes = 1;
  std::size_t num_observations = 0;
  std::size_t num_actions = 0;
  std::vector<std::size_t> table;  // ((n * Z) + z) * A + a -> n'

  std::size_t operator()(std::size_t n, ObsId z, ActionId a) const {
    return table[(n * num_observations + z) * num_actions + a];
  }
  std::size_t& at(std::size_t n, ObsId z, ActionId a) {
    return table[(n * num_observations + z) * num_actions + a];
  }
  bool operator==(const MemoryUpdate&) const = default;
};

// Observation classes that drive the spec-driven rule: the node becomes 1
// after an observation in `set`, and 0 after one in `reset`. Both label
// arguments are comma-separated proposition lists.
struct SpecDrivenClasses {
  std::vector<ObsId> set, reset;
};
SpecDrivenClasses spec_driven_classes(const Pomdp& m, const std::string& set_labels,
                                      const std::string& reset_labels);

// observation-repeat: n -> min(n+1, k-1) when the action surely repeats the
// current observation from every state of the class; otherwise n is kept.
// spec-driven: needs classes. explicit-table: all zero, to be filled in.
MemoryUpdate memory_update(MemoryKind kind, std::size_t k, const Pomdp& m,
                           const SpecDrivenClasses* classes = nullptr);

// Throws ModelError if the table is not total or refers to missing nodes.
void check_memory_update(const MemoryUpdate& delta);

// Product POMDP: state s * k + n, observation O(s) * k + n.
Pomdp product(const Pomdp& m, const MemoryUpdate& delta);

struct Fsc {
  std::size_t k = 1;
  std::size_t initial = 0;
  ObservationStrategy gamma;  // rows z * k + n
  MemoryUpdate delta;

  std::span<const double> action_dist(std::size_t n, ObsId z) const { return gamma.row(z * k + n); }
};

Fsc project_fsc(const ObservationStrategy& product_strategy, const MemoryUpdate& delta);
// View of an FSC as a memoryless strategy on the product.
ObservationStrategy flatten(const Fsc& f);

// Chain over (state, node) built directly from the FSC, state s * k + n.
Dtmc induced_dtmc(const Pomdp& m, const Fsc& f);
VerificationResult check_fsc(const ComposedModel& cm, const Fsc& f, const Specification& spec);
VerificationResult check_fsc(const Pomdp& m, const Fsc& f, const Specification& spec);

std::string serialize_fsc(const Fsc& f, const std::vector<std::string>& actions);
Fsc parse_fsc(std::string_view text, const std::vector<std::string>& actions, std::size_t num_observations);

}  // namespace psynth
