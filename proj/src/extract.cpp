#include "psynth/extract.hpp"

#include <stdexcept>

namespace psynth {

ObservationStrategy extract_strategy(const RecurrentPolicy& p, const Pomdp& m, std::size_t memory_nodes,
                                     ExtractReport* report, std::size_t predictions) {
  if (p.num_observations() != m.num_observations || p.num_actions() != m.num_actions())
    throw std::invalid_argument("policy alphabet does not match model");
  ObservationStrategy s(m.num_observations, m.num_actions(), memory_nodes);
  const auto classes = m.observation_classes();
  ExtractReport rep;
  for (ObsId z = 0; z < m.num_observations; ++z) {
    const std::vector<ActionId> allowed = m.class_actions(z);
    auto row = s.row(z);
    if (classes[z].empty()) {
      ++rep.unused;
      for (ActionId a : allowed) row[a] = 1.0 / static_cast<double>(allowed.size());
      continue;
    }
    const ObsId query[1] = {z};
    const auto dist = p.forward(query);
    for (std::size_t i = 1; i < predictions; ++i)
      if (p.forward(query) != dist) throw std::logic_error("policy inference is not deterministic");
    double mass = 0.0;
    for (ActionId a : allowed) mass += dist[a];
    if (mass > 0.0) {
      for (ActionId a : allowed) row[a] = dist[a] / mass;
    } else {
      ++rep.fallbacks;
      for (ActionId a : allowed) row[a] = 1.0 / static_cast<double>(allowed.size());
    }
  }
  if (report) *report = rep;
  return s;
}

}  // namespace psynth
