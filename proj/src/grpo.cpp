#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "umlcot/error.hpp"
#include "umlcot/format.hpp"
#include "umlcot/grpo.hpp"

namespace umlcot::grpo {

std::vector<double> normalize_advantages(std::span<const double> rewards, double epsilon,
                                         StdKind kind) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::GroupTooSmall,
                "advantage normalization needs at least 2 candidates, got " +
                    std::to_string(rewards.size()));
  }
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");

  const auto n = static_cast<double>(rewards.size());
  std::vector<double> centered(rewards.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    centered[i] = rewards[i] - rewards[0];
    sum += centered[i];
  }
  const double mean = sum / n;
  double squares = 0.0;
  for (double& c : centered) {
    c -= mean;
    squares += c * c;
  }
  const double divisor = kind == StdKind::Population ? n : n - 1.0;
  const double scale = std::sqrt(squares / divisor) + epsilon;
  if (scale == 0.0) return std::vector<double>(rewards.size(), 0.0);
  for (double& c : centered) c /= scale;
  return centered;
}

std::size_t select_candidate(std::span<const double> advantages) {
  if (advantages.empty()) throw std::invalid_argument("select_candidate on an empty group");
  std::size_t best = 0;
  for (std::size_t i = 1; i < advantages.size(); ++i) {
    if (advantages[i] > advantages[best]) best = i;
  }
  return best;
}

double policy_loss(double logprob_selected, double advantage_selected) {
  if (logprob_selected > 0.0) throw std::invalid_argument("log-probability must be <= 0");
  return -logprob_selected * advantage_selected;
}

CandidateGroup CandidateGroup::score(std::vector<std::string> candidates,
                                     const RewardFn& reward_fn, double epsilon) {
  CandidateGroup g;
  g.epsilon = epsilon;
  g.rewards.reserve(candidates.size());
  for (const auto& c : candidates) g.rewards.push_back(reward_fn(c));
  g.candidates = std::move(candidates);
  g.advantages = normalize_advantages(g.rewards, epsilon);
  g.selected = select_candidate(g.advantages);
  return g;
}

std::optional<double> CandidateGroup::loss() const {
  if (!selected_logprob) return std::nullopt;
  return policy_loss(*selected_logprob, advantages.at(selected));
}

std::vector<double> log_softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double x : logits) z += std::exp(x - top);
  const double log_z = top + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_z;
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    z += out[i];
  }
  for (double& p : out) p /= z;
  return out;
}

double template_loss(std::span<const double> theta, std::size_t k, double advantage) {
  return -log_softmax(theta).at(k) * advantage;
}

std::vector<double> template_loss_gradient(std::span<const double> theta, std::size_t k,
                                           double advantage) {
  auto grad = softmax(theta);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double onehot = i == k ? 1.0 : 0.0;
    grad[i] = -advantage * (onehot - grad[i]);
  }
  return grad;
}

ToyPolicy::ToyPolicy(std::vector<std::string> templates_, double learning_rate_,
                     std::uint64_t seed)
    : theta(templates_.size(), 0.0),
      templates(std::move(templates_)),
      learning_rate(learning_rate_),
      rng_seed(seed),
      rng(seed) {
  if (templates.empty()) throw std::invalid_argument("toy policy needs at least one template");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
}

std::size_t ToyPolicy::sample() {
  // 53 random bits mapped to [0, 1); mt19937_64 output is fully specified,
  // so draws are identical across standard libraries.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const auto p = probabilities();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cumulative += p[i];
    if (u < cumulative) return i;
  }
  return p.size() - 1;
}

namespace {

std::vector<double> template_rewards(const ToyPolicy& policy, const RewardFn& reward_fn) {
  std::vector<double> r;
  r.reserve(policy.templates.size());
  for (const auto& t : policy.templates) r.push_back(reward_fn(t));
  return r;
}

}  // namespace

std::pair<ToyPolicy, StepRecord> sim_step_with_samples(ToyPolicy policy,
                                                       std::span<const std::size_t> samples,
                                                       const RewardFn& reward_fn,
                                                       StepOptions options) {
  StepRecord rec;
  rec.samples.assign(samples.begin(), samples.end());
  rec.rewards.reserve(samples.size());
  for (auto s : samples) rec.rewards.push_back(reward_fn(policy.templates.at(s)));
  rec.advantages = normalize_advantages(rec.rewards, options.epsilon, options.std_kind);
  rec.selected = select_candidate(rec.advantages);
  rec.selected_template = samples[rec.selected];

  const double advantage = rec.advantages[rec.selected];
  rec.loss = policy_loss(log_softmax(policy.theta)[rec.selected_template], advantage);
  const auto grad = template_loss_gradient(policy.theta, rec.selected_template, advantage);
  for (std::size_t i = 0; i < policy.theta.size(); ++i) {
    policy.theta[i] -= policy.learning_rate * grad[i];
  }

  double sum = 0.0;
  for (double r : rec.rewards) sum += r;
  rec.mean_reward = sum / static_cast<double>(rec.rewards.size());
  rec.max_reward = *std::max_element(rec.rewards.begin(), rec.rewards.end());
  const auto per_template = template_rewards(policy, reward_fn);
  const auto p = policy.probabilities();
  rec.p_best_template = p[select_candidate(per_template)];
  for (std::size_t i = 0; i < p.size(); ++i) rec.expected_reward += p[i] * per_template[i];
  return {std::move(policy), std::move(rec)};
}

std::pair<ToyPolicy, StepRecord> sim_step(ToyPolicy policy, std::size_t group_size,
                                          const RewardFn& reward_fn, StepOptions options) {
  if (group_size < 2) {
    throw Error(ErrorCode::GroupTooSmall,
                "group size must be at least 2, got " + std::to_string(group_size));
  }
  std::vector<std::size_t> samples(group_size);
  for (auto& s : samples) s = policy.sample();
  return sim_step_with_samples(std::move(policy), samples, reward_fn, options);
}

Simulation run_simulation(ToyPolicy policy, std::size_t iterations, std::size_t group_size,
                          const RewardFn& reward_fn, StepOptions options) {
  if (iterations < 1) throw std::invalid_argument("simulation needs at least one iteration");
  std::unordered_map<std::string, double> cache;
  RewardFn cached = [&](const std::string& text) {
    auto it = cache.find(text);
    if (it != cache.end()) return it->second;
    const double r = reward_fn(text);
    cache.emplace(text, r);
    return r;
  };

  Simulation sim{std::move(policy), {}};
  sim.curve.reserve(iterations);
  for (std::size_t it = 0; it < iterations; ++it) {
    auto [next, rec] = sim_step(std::move(sim.final_policy), group_size, cached, options);
    rec.iteration = it;
    sim.final_policy = std::move(next);
    sim.curve.push_back(std::move(rec));
  }
  return sim;
}

std::string curve_csv(std::span<const StepRecord> curve) {
  std::string out = "iteration,mean_reward,max_reward,expected_reward,p_best_template,loss\n";
  for (const auto& r : curve) {
    out += std::to_string(r.iteration);
    for (double v : {r.mean_reward, r.max_reward, r.expected_reward, r.p_best_template, r.loss}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace umlcot::grpo
