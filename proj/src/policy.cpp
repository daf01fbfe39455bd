#include "psynth/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "psynth/kernels/kernels.hpp"

namespace psynth {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void softmax(std::span<double> x) {
  const double hi = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double& v : x) {
    v = std::exp(v - hi);
    sum += v;
  }
  for (double& v : x) v /= sum;
}

// Activations of one step.
struct StepCache {
  std::vector<double> gates;  // i f g o after nonlinearity, 4H
  std::vector<double> c, h, tc, prob;
};

}  // namespace

RecurrentPolicy::RecurrentPolicy(std::size_t num_observations, std::size_t num_actions, std::size_t hidden,
                                 std::uint64_t seed, std::size_t memory_nodes)
    : z_(num_observations), a_(num_actions), h_(hidden), k_(memory_nodes) {
  if (z_ == 0 || a_ == 0 || h_ == 0 || k_ == 0) throw std::invalid_argument("policy dimensions must be positive");
  if (z_ % k_) throw std::invalid_argument("observation count is not a multiple of the memory nodes");
  theta_.assign(by() + a_, 0.0);
  m_.assign(theta_.size(), 0.0);
  v_.assign(theta_.size(), 0.0);
  std::mt19937_64 rng(seed);
  const double r = 1.0 / std::sqrt(static_cast<double>(h_));
  std::uniform_real_distribution<double> recurrent(-r, r), output(-0.1 * r, 0.1 * r);
  for (std::size_t i = wx(); i < bias(); ++i) theta_[i] = recurrent(rng);
  for (std::size_t j = 0; j < h_; ++j) theta_[bias() + h_ + j] = 1.0;  // forget gate bias
  for (std::size_t i = wy(); i < by(); ++i) theta_[i] = output(rng);
}

void RecurrentPolicy::check_symbols(std::span<const ObsId> seq) const {
  for (ObsId z : seq)
    if (z >= z_) throw std::out_of_range("observation " + std::to_string(z) + " outside the policy alphabet");
}

void RecurrentPolicy::add_input(ObsId z, std::span<double> pre) const {
  const std::size_t G = 4 * h_;
  const std::span<const double> th(theta_);
  if (k_ == 1) {
    kernels::axpy(1.0, th.subspan(wx() + z * G, G), pre);
    return;
  }
  kernels::axpy(1.0, th.subspan(wx() + (z / k_) * G, G), pre);
  kernels::axpy(1.0, th.subspan(wx() + (z_ / k_ + z % k_) * G, G), pre);
}

void RecurrentPolicy::add_input_gradient(ObsId z, std::span<const double> da, std::span<double> grad) const {
  const std::size_t G = 4 * h_;
  if (k_ == 1) {
    kernels::axpy(1.0, da, grad.subspan(wx() + z * G, G));
    return;
  }
  kernels::axpy(1.0, da, grad.subspan(wx() + (z / k_) * G, G));
  kernels::axpy(1.0, da, grad.subspan(wx() + (z_ / k_ + z % k_) * G, G));
}

std::vector<std::vector<double>> RecurrentPolicy::forward_all(std::span<const ObsId> seq) const {
  if (seq.empty()) throw std::invalid_argument("empty observation sequence");
  check_symbols(seq);
  const std::size_t H = h_;
  std::vector<double> h(H, 0.0), c(H, 0.0), g(4 * H);
  std::vector<std::vector<double>> out;
  const std::span<const double> th(theta_);
  for (ObsId z : seq) {
    std::copy_n(theta_.begin() + static_cast<std::ptrdiff_t>(bias()), 4 * H, g.begin());
    add_input(z, g);
    kernels::gemv(th.subspan(wh(), 4 * H * H), 4 * H, H, h, g);
    for (std::size_t j = 0; j < H; ++j) {
      const double i = sigmoid(g[j]), f = sigmoid(g[H + j]), cand = std::tanh(g[2 * H + j]),
                   o = sigmoid(g[3 * H + j]);
      c[j] = f * c[j] + i * cand;
      h[j] = o * std::tanh(c[j]);
    }
    std::vector<double> logits(th.begin() + static_cast<std::ptrdiff_t>(by()),
                               th.begin() + static_cast<std::ptrdiff_t>(by() + a_));
    kernels::gemv(th.subspan(wy(), a_ * H), a_, H, h, logits);
    softmax(logits);
    out.push_back(std::move(logits));
  }
  return out;
}

std::vector<double> RecurrentPolicy::forward(std::span<const ObsId> seq) const {
  return forward_all(seq).back();
}

double RecurrentPolicy::loss(std::span<const Sequence> batch, std::size_t max_len) const {
  double total = 0.0;
  std::size_t steps = 0;
  for (const Sequence& s : batch) {
    std::size_t t_len = s.actions.size();
    if (max_len) t_len = std::min(t_len, max_len);
    if (t_len == 0) continue;
    const auto probs = forward_all(std::span<const ObsId>(s.obs).first(t_len));
    for (std::size_t t = 0; t < t_len; ++t) total -= std::log(probs[t][s.actions[t]]);
    steps += t_len;
  }
  return steps ? total / static_cast<double>(steps) : 0.0;
}

double RecurrentPolicy::loss_and_gradient(std::span<const Sequence* const> batch, std::vector<double>& grad,
                                          std::size_t max_len) const {
  grad.assign(theta_.size(), 0.0);
  const std::size_t H = h_;
  std::size_t steps = 0;
  for (const Sequence* s : batch) {
    const std::size_t t_len = max_len ? std::min(s->actions.size(), max_len) : s->actions.size();
    steps += t_len;
  }
  if (steps == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(steps);
  const std::span<const double> th(theta_);
  const std::span<double> gr(grad);

  double total = 0.0;
  std::vector<StepCache> cache;
  std::vector<double> pre(4 * H), dh(H), dh_next(H), dc_next(H), da(4 * H), dlogits(a_);
  const std::vector<double> zeros(H, 0.0);
  for (const Sequence* s : batch) {
    const std::size_t T = max_len ? std::min(s->actions.size(), max_len) : s->actions.size();
    if (T == 0) continue;
    check_symbols(std::span<const ObsId>(s->obs).first(T));
    cache.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      const std::vector<double>& h_prev = t ? cache[t - 1].h : zeros;
      const std::vector<double>& c_prev = t ? cache[t - 1].c : zeros;
      auto& k = cache[t];
      std::copy_n(theta_.begin() + static_cast<std::ptrdiff_t>(bias()), 4 * H, pre.begin());
      add_input(s->obs[t], pre);
      kernels::gemv(th.subspan(wh(), 4 * H * H), 4 * H, H, h_prev, pre);
      k.gates.resize(4 * H);
      k.c.resize(H);
      k.h.resize(H);
      k.tc.resize(H);
      for (std::size_t j = 0; j < H; ++j) {
        k.gates[j] = sigmoid(pre[j]);
        k.gates[H + j] = sigmoid(pre[H + j]);
        k.gates[2 * H + j] = std::tanh(pre[2 * H + j]);
        k.gates[3 * H + j] = sigmoid(pre[3 * H + j]);
        k.c[j] = k.gates[H + j] * c_prev[j] + k.gates[j] * k.gates[2 * H + j];
        k.tc[j] = std::tanh(k.c[j]);
        k.h[j] = k.gates[3 * H + j] * k.tc[j];
      }
      k.prob.assign(th.begin() + static_cast<std::ptrdiff_t>(by()), th.begin() + static_cast<std::ptrdiff_t>(by() + a_));
      kernels::gemv(th.subspan(wy(), a_ * H), a_, H, k.h, k.prob);
      softmax(k.prob);
      total -= std::log(k.prob[s->actions[t]]);
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    std::fill(dc_next.begin(), dc_next.end(), 0.0);
    for (std::size_t t = T; t-- > 0;) {
      const auto& k = cache[t];
      const std::vector<double>& h_prev = t ? cache[t - 1].h : zeros;
      const std::vector<double>& c_prev = t ? cache[t - 1].c : zeros;
      for (std::size_t a = 0; a < a_; ++a) dlogits[a] = k.prob[a] * scale;
      dlogits[s->actions[t]] -= scale;
      kernels::ger(gr.subspan(wy(), a_ * H), a_, H, dlogits, k.h);
      kernels::axpy(1.0, dlogits, gr.subspan(by(), a_));
      dh = dh_next;
      kernels::gemv_t(th.subspan(wy(), a_ * H), a_, H, dlogits, dh);
      for (std::size_t j = 0; j < H; ++j) {
        const double i = k.gates[j], f = k.gates[H + j], g = k.gates[2 * H + j], o = k.gates[3 * H + j];
        const double dc = dh[j] * o * (1.0 - k.tc[j] * k.tc[j]) + dc_next[j];
        da[j] = dc * g * i * (1.0 - i);
        da[H + j] = dc * c_prev[j] * f * (1.0 - f);
        da[2 * H + j] = dc * i * (1.0 - g * g);
        da[3 * H + j] = dh[j] * k.tc[j] * o * (1.0 - o);
        dc_next[j] = dc * f;
      }
      add_input_gradient(s->obs[t], da, gr);
      kernels::axpy(1.0, da, gr.subspan(bias(), 4 * H));
      kernels::ger(gr.subspan(wh(), 4 * H * H), 4 * H, H, da, h_prev);
      std::fill(dh_next.begin(), dh_next.end(), 0.0);
      kernels::gemv_t(th.subspan(wh(), 4 * H * H), 4 * H, H, da, dh_next);
    }
  }
  return total * scale;
}

void RecurrentPolicy::adam_update(std::span<const double> grad, double learning_rate) {
  ++steps_;
  kernels::AdamStep st;
  st.lr = learning_rate;
  st.bias1 = 1.0 - std::pow(st.beta1, static_cast<double>(steps_));
  st.bias2 = 1.0 - std::pow(st.beta2, static_cast<double>(steps_));
  kernels::adam(theta_, grad, m_, v_, st);
}

std::string RecurrentPolicy::serialize() const {
  std::ostringstream os;
  os << "policy v1 observations=" << z_ << " actions=" << a_ << " hidden=" << h_ << " memory=" << k_
     << " steps=" << steps_ << "\n";
  char buf[40];
  auto dump = [&](const char* name, const std::vector<double>& v) {
    os << name << ' ' << v.size() << "\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", v[i]);
      os << buf << ((i % 8 == 7 || i + 1 == v.size()) ? '\n' : ' ');
    }
  };
  dump("theta", theta_);
  dump("adam_m", m_);
  dump("adam_v", v_);
  return os.str();
}

RecurrentPolicy RecurrentPolicy::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, version;
  hs >> magic >> version;
  if (magic != "policy" || version != "v1") throw std::runtime_error("expected header 'policy v1'");
  RecurrentPolicy p;
  for (std::string field; hs >> field;) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw std::runtime_error("bad policy header field '" + field + "'");
    const std::size_t v = std::stoul(field.substr(eq + 1));
    const std::string key = field.substr(0, eq);
    if (key == "observations") p.z_ = v;
    else if (key == "actions") p.a_ = v;
    else if (key == "hidden") p.h_ = v;
    else if (key == "memory") p.k_ = v;
    else if (key == "steps") p.steps_ = v;
    else throw std::runtime_error("unknown policy header field '" + key + "'");
  }
  if (p.z_ == 0 || p.a_ == 0 || p.h_ == 0 || p.k_ == 0 || p.z_ % p.k_)
    throw std::runtime_error("policy checkpoint: inconsistent dimensions");
  const std::size_t expect = p.num_inputs() * 4 * p.h_ + 4 * p.h_ * p.h_ + 4 * p.h_ + p.a_ * p.h_ + p.a_;
  auto load = [&](const char* name, std::vector<double>& v) {
    std::string tag;
    std::size_t n = 0;
    if (!(in >> tag >> n) || tag != name || n != expect)
      throw std::runtime_error(std::string("policy checkpoint: bad '") + name + "' block");
    v.resize(n);
    for (double& x : v)
      if (!(in >> x)) throw std::runtime_error(std::string("policy checkpoint: truncated '") + name + "'");
  };
  load("theta", p.theta_);
  load("adam_m", p.m_);
  load("adam_v", p.v_);
  return p;
}

TrainReport train(RecurrentPolicy& p, const TrajectoryDataset& d, const TrainConfig& cfg) {
  TrainReport rep;
  if (cfg.epochs == 0) return rep;
  if (d.num_observations != p.num_observations() || d.num_actions != p.num_actions())
    throw std::invalid_argument("dataset alphabet does not match the policy");
  if (cfg.batch_size == 0 || !(cfg.learning_rate > 0) || !(cfg.clip_norm > 0))
    throw std::invalid_argument("training configuration must be positive");
  std::vector<const Sequence*> usable;
  for (const auto& s : d.sequences)
    if (!s.actions.empty()) usable.push_back(&s);
  rep.initial_loss = p.loss(d.sequences, cfg.max_len);
  if (usable.empty()) {
    rep.final_loss = rep.initial_loss;
    return rep;
  }
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> grad;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(usable.begin(), usable.end(), rng);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < usable.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(usable.size(), start + cfg.batch_size);
      const double l = p.loss_and_gradient(std::span<const Sequence* const>(usable).subspan(start, end - start),
                                           grad, cfg.max_len);
      double norm = 0.0;
      for (double g : grad) norm += g * g;
      norm = std::sqrt(norm);
      if (!std::isfinite(l) || !std::isfinite(norm))
        throw TrainingError(rep.updates, "non-finite loss or gradient");
      if (norm > cfg.clip_norm)
        for (double& g : grad) g *= cfg.clip_norm / norm;
      p.adam_update(grad, cfg.learning_rate);
      ++rep.updates;
      sum += l;
      ++batches;
    }
    rep.epoch_loss.push_back(sum / static_cast<double>(batches));
  }
  rep.final_loss = p.loss(d.sequences, cfg.max_len);
  rep.flagged = rep.final_loss > rep.initial_loss;
  return rep;
}

std::vector<double> policy_forward(const RecurrentPolicy& p, std::span<const ObsId> seq) { return p.forward(seq); }

double central_difference(const std::function<double(double)>& f, double x, double eps) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

double gradient_check(const RecurrentPolicy& p, std::span<const Sequence> batch, double eps) {
  std::vector<const Sequence*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  std::vector<double> analytic;
  p.loss_and_gradient(ptrs, analytic);
  RecurrentPolicy probe = p;
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.num_parameters(); ++i) {
    const double saved = probe.parameters()[i];
    const double numeric = central_difference(
        [&](double x) {
          probe.parameters()[i] = x;
          return probe.loss(batch);
        },
        saved, eps);
    probe.parameters()[i] = saved;
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace psynth
