#include "psynth/graph.hpp"

#include <algorithm>
#include <limits>

namespace psynth {

Digraph Digraph::reversed() const {
  const std::size_t n = size();
  Digraph r;
  r.start.assign(n + 1, 0);
  for (std::size_t w : adj) ++r.start[w + 1];
  for (std::size_t v = 0; v < n; ++v) r.start[v + 1] += r.start[v];
  r.adj.resize(adj.size());
  std::vector<std::size_t> fill(r.start.begin(), r.start.end() - 1);
  for (std::size_t v = 0; v < n; ++v)
    for (auto it = begin(v); it != end(v); ++it) r.adj[fill[*it]++] = v;
  return r;
}

std::vector<std::size_t> scc_tarjan(const Digraph& g, std::size_t* count) {
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  const std::size_t n = g.size();
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<std::size_t> stack;
  std::vector<char> on_stack(n, 0);
  // explicit call stack: (vertex, next edge offset)
  std::vector<std::pair<std::size_t, std::size_t>> calls;
  std::size_t next_index = 0, next_comp = 0;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    calls.emplace_back(root, g.start[root]);
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!calls.empty()) {
      auto& [v, e] = calls.back();
      if (e < g.start[v + 1]) {
        const std::size_t w = g.adj[e++];
        if (index[w] == kUnset) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = 1;
          calls.emplace_back(w, g.start[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      calls.pop_back();
      if (!calls.empty()) low[calls.back().first] = std::min(low[calls.back().first], low[done]);
      if (low[done] == index[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = next_comp;
        } while (w != done);
        ++next_comp;
      }
    }
  }
  if (count) *count = next_comp;
  return comp;
}

std::vector<char> bottom_components(const Digraph& g, const std::vector<std::size_t>& comp,
                                    std::size_t count) {
  std::vector<char> bottom(count, 1);
  for (std::size_t v = 0; v < g.size(); ++v)
    for (auto it = g.begin(v); it != g.end(v); ++it)
      if (comp[*it] != comp[v]) bottom[comp[v]] = 0;
  return bottom;
}

std::vector<char> backward_reach(const Digraph& reverse, const std::vector<char>& target,
                                 const std::vector<char>& through) {
  std::vector<char> seen(target);
  std::vector<std::size_t> queue;
  for (std::size_t v = 0; v < seen.size(); ++v)
    if (seen[v]) queue.push_back(v);
  while (!queue.empty()) {
    const std::size_t v = queue.back();
    queue.pop_back();
    for (auto it = reverse.begin(v); it != reverse.end(v); ++it)
      if (!seen[*it] && through[*it]) {
        seen[*it] = 1;
        queue.push_back(*it);
      }
  }
  return seen;
}

std::vector<EndComponent> mec_decomposition(const Mdp& m, const std::vector<char>& allowed) {
  const std::size_t n = m.num_states();
  // Current candidate block per state; states outside any block are removed.
  constexpr std::size_t kGone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> block(n, kGone);
  for (StateId s = 0; s < n; ++s)
    if (allowed[s]) block[s] = 0;
  // Enabled (state, choice index) flags.
  std::vector<std::vector<char>> live(n);
  for (StateId s = 0; s < n; ++s) live[s].assign(m.choices[s].size(), 1);

  bool changed = true;
  while (changed) {
    changed = false;
    // Drop actions that can leave the state's block.
    for (StateId s = 0; s < n; ++s) {
      if (block[s] == kGone) continue;
      bool any = false;
      for (std::size_t c = 0; c < m.choices[s].size(); ++c) {
        if (!live[s][c]) continue;
        for (const auto& t : m.choices[s][c].successors)
          if (t.prob > 0 && block[t.target] != block[s]) {
            live[s][c] = 0;
            changed = true;
            break;
          }
        any = any || live[s][c];
      }
      if (!any) {
        block[s] = kGone;
        changed = true;
      }
    }
    // Split blocks into SCCs of the remaining graph.
    std::vector<std::size_t> ids;
    for (StateId s = 0; s < n; ++s)
      if (block[s] != kGone) ids.push_back(s);
    std::vector<std::size_t> local(n, kGone);
    for (std::size_t i = 0; i < ids.size(); ++i) local[ids[i]] = i;
    Digraph g;
    g.start.reserve(ids.size() + 1);
    for (StateId s : ids) {
      for (std::size_t c = 0; c < m.choices[s].size(); ++c) {
        if (!live[s][c]) continue;
        for (const auto& t : m.choices[s][c].successors)
          if (t.prob > 0 && local[t.target] != kGone) g.adj.push_back(local[t.target]);
      }
      g.start.push_back(g.adj.size());
    }
    std::size_t count = 0;
    const auto comp = scc_tarjan(g, &count);
    // Renumber blocks by (old block, scc) pair; a split changes the partition.
    std::vector<std::size_t> fresh(ids.size());
    std::vector<std::pair<std::size_t, std::size_t>> key(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) key[i] = {block[ids[i]], comp[i]};
    std::vector<std::pair<std::size_t, std::size_t>> sorted = key;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t nb = static_cast<std::size_t>(
          std::lower_bound(sorted.begin(), sorted.end(), key[i]) - sorted.begin());
      fresh[i] = nb;
    }
    // Detect partition refinement: count distinct old blocks.
    std::vector<std::size_t> olds;
    for (const auto& k : sorted) olds.push_back(k.first);
    olds.erase(std::unique(olds.begin(), olds.end()), olds.end());
    if (olds.size() != sorted.size()) changed = true;
    for (std::size_t i = 0; i < ids.size(); ++i) block[ids[i]] = fresh[i];
  }

  std::vector<EndComponent> out;
  std::vector<std::size_t> slot(n, kGone);
  for (StateId s = 0; s < n; ++s) {
    if (block[s] == kGone) continue;
    if (slot[block[s]] == kGone) {
      slot[block[s]] = out.size();
      out.emplace_back();
    }
    auto& ec = out[slot[block[s]]];
    ec.states.push_back(s);
    ec.actions.emplace_back();
    for (std::size_t c = 0; c < m.choices[s].size(); ++c)
      if (live[s][c]) ec.actions.back().push_back(m.choices[s][c].action);
  }
  return out;
}

}  // namespace psynth
