#pragma once
// Graph algorithms on explicit transition structures.

#include <cstddef>
#include <vector>

#include "psynth/model.hpp"

namespace psynth {

// Compressed adjacency lists.
struct Digraph {
  std::vector<std::size_t> start{0};
  std::vector<std::size_t> adj;

  std::size_t size() const { return start.size() - 1; }
  const std::size_t* begin(std::size_t v) const { return adj.data() + start[v]; }
  const std::size_t* end(std::size_t v) const { return adj.data() + start[v + 1]; }

  Digraph reversed() const;
};

// Component index per vertex; components come out in reverse topological
// order (a component only reaches components with smaller index).
std::vector<std::size_t> scc_tarjan(const Digraph& g, std::size_t* count = nullptr);

// Component ids of the bottom SCCs.
std::vector<char> bottom_components(const Digraph& g, const std::vector<std::size_t>& comp,
                                    std::size_t count);

// Vertices that reach `target` via vertices in `through` (targets always included).
std::vector<char> backward_reach(const Digraph& reverse, const std::vector<char>& target,
                                 const std::vector<char>& through);

// Maximal end component: states plus the actions that stay inside.
struct EndComponent {
  std::vector<StateId> states;
  std::vector<std::vector<ActionId>> actions;  // parallel to states
};

// MECs of the sub-MDP restricted to `allowed` states.
std::vector<EndComponent> mec_decomposition(const Mdp& m, const std::vector<char>& allowed);

}  // namespace psynth
