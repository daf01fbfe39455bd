#pragma once
// Recurrent sequence policy: one gated memory cell layer (input, forget,
// candidate, output gates) over one-hot observations, softmax over actions.
// Trained on mean per-step cross-entropy with backprop through time and Adam.
//
// With memory_nodes k > 1 the alphabet is a product (z, n) numbered z*k + n and
// is encoded as two one-hot blocks, base observation and node, so rows for the
// same z share weights across nodes.

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "psynth/dataset.hpp"
#include "psynth/model.hpp"

namespace psynth {

class TrainingError : public std::runtime_error {
 public:
  TrainingError(std::size_t step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct TrainConfig {
  std::size_t hidden = 32;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 30;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  std::size_t max_len = 0;  // 0: no truncation
};

struct TrainReport {
  std::vector<double> epoch_loss;  // running mean per epoch
  double initial_loss = 0.0;       // full-dataset loss before training
  double final_loss = 0.0;         // and after
  bool flagged = false;            // final loss above initial loss
  std::size_t updates = 0;
};

class RecurrentPolicy {
 public:
  RecurrentPolicy() = default;
  RecurrentPolicy(std::size_t num_observations, std::size_t num_actions, std::size_t hidden,
                  std::uint64_t seed, std::size_t memory_nodes = 1);

  std::size_t num_observations() const { return z_; }
  std::size_t num_actions() const { return a_; }
  std::size_t hidden() const { return h_; }
  std::size_t memory_nodes() const { return k_; }
  std::size_t num_inputs() const { return k_ > 1 ? z_ / k_ + k_ : z_; }
  std::size_t num_parameters() const { return theta_.size(); }

  std::span<double> parameters() { return theta_; }
  std::span<const double> parameters() const { return theta_; }

  // Distribution over actions after reading the whole sequence.
  std::vector<double> forward(std::span<const ObsId> seq) const;
  // Distribution after every prefix.
  std::vector<std::vector<double>> forward_all(std::span<const ObsId> seq) const;

  // Mean per-step cross-entropy over the labelled positions of the batch.
  double loss(std::span<const Sequence> batch, std::size_t max_len = 0) const;
  // Same, and writes d loss / d theta into grad (resized as needed).
  double loss_and_gradient(std::span<const Sequence* const> batch, std::vector<double>& grad,
                           std::size_t max_len = 0) const;

  void adam_update(std::span<const double> grad, double learning_rate);
  std::size_t adam_steps() const { return steps_; }

  std::string serialize() const;
  static RecurrentPolicy parse(std::string_view text);

  bool operator==(const RecurrentPolicy&) const = default;

 private:
  std::size_t z_ = 0, a_ = 0, h_ = 0, k_ = 1;
  std::vector<double> theta_, m_, v_;
  std::size_t steps_ = 0;

  // Offsets into theta_.
  std::size_t wx() const { return 0; }
  std::size_t wh() const { return num_inputs() * 4 * h_; }
  std::size_t bias() const { return wh() + 4 * h_ * h_; }
  std::size_t wy() const { return bias() + 4 * h_; }
  std::size_t by() const { return wy() + a_ * h_; }

  void check_symbols(std::span<const ObsId> seq) const;
  // Adds the input-weight contribution of observation z to pre (4H), or scatters da into grad.
  void add_input(ObsId z, std::span<double> pre) const;
  void add_input_gradient(ObsId z, std::span<const double> da, std::span<double> grad) const;
};

TrainReport train(RecurrentPolicy& p, const TrajectoryDataset& d, const TrainConfig& cfg);

std::vector<double> policy_forward(const RecurrentPolicy& p, std::span<const ObsId> seq);

double central_difference(const std::function<double(double)>& f, double x, double eps = 1e-5);

// Relative error |a - n| / max(|a|, |n|, floor) between the analytic gradient
// and central differences, maximised over all parameters.
double gradient_check(const RecurrentPolicy& p, std::span<const Sequence> batch, double eps = 1e-5);

}  // namespace psynth
