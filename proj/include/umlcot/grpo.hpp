#pragma once

// Group-relative advantages, single-candidate policy loss, and a softmax
// policy over fixed output templates for exercising the update loop.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace umlcot::grpo {

inline constexpr double kDefaultEpsilon = 1e-4;
inline constexpr std::size_t kDefaultGroupSize = 8;

enum class StdKind {
  Population,  // divide by G
  Sample,      // divide by G - 1
};

/// (r_i - mean) / (std + epsilon). Deviations are taken from the first
/// reward before averaging, so adding a constant that is exactly
/// representable leaves the result bit-identical.
///
/// Throws umlcot::Error(GroupTooSmall) for fewer than two rewards and
/// std::invalid_argument for a negative epsilon.
std::vector<double> normalize_advantages(std::span<const double> rewards,
                                         double epsilon = kDefaultEpsilon,
                                         StdKind kind = StdKind::Population);

/// Index of the largest value; the lowest index wins ties.
std::size_t select_candidate(std::span<const double> advantages);

/// -logprob * advantage. Throws std::invalid_argument for logprob > 0.
double policy_loss(double logprob_selected, double advantage_selected);

using RewardFn = std::function<double(const std::string&)>;

struct CandidateGroup {
  std::vector<std::string> candidates;
  std::vector<double> rewards;
  std::vector<double> advantages;
  double epsilon = kDefaultEpsilon;
  std::size_t selected = 0;
  std::optional<double> selected_logprob;

  /// Scores every candidate, normalizes and selects.
  static CandidateGroup score(std::vector<std::string> candidates, const RewardFn& reward_fn,
                              double epsilon = kDefaultEpsilon);

  std::optional<double> loss() const;
};

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

/// Loss of choosing template `k` with the given advantage under `theta`.
double template_loss(std::span<const double> theta, std::size_t k, double advantage);

/// d template_loss / d theta = -advantage * (onehot(k) - softmax(theta)).
std::vector<double> template_loss_gradient(std::span<const double> theta, std::size_t k,
                                           double advantage);

/// Softmax policy over K fixed candidate outputs.
struct ToyPolicy {
  std::vector<double> theta;
  std::vector<std::string> templates;
  double learning_rate = 0.1;
  std::uint64_t rng_seed = 0;
  std::mt19937_64 rng;

  /// Uniform initial policy (all logits zero).
  ToyPolicy(std::vector<std::string> templates, double learning_rate, std::uint64_t seed);

  std::vector<double> probabilities() const { return softmax(theta); }
  std::size_t sample();
};

struct StepRecord {
  std::size_t iteration = 0;
  std::vector<std::size_t> samples;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::size_t selected = 0;           // position within the group
  std::size_t selected_template = 0;  // template index
  double mean_reward = 0.0;
  double max_reward = 0.0;
  double p_best_template = 0.0;  // after the update
  // Reward expected under the updated policy, sum_k p_k * reward(template_k).
  double expected_reward = 0.0;
  double loss = 0.0;
};

struct StepOptions {
  double epsilon = kDefaultEpsilon;
  StdKind std_kind = StdKind::Population;
};

/// Samples a group of `group_size` templates from the policy and applies one
/// update. Throws umlcot::Error(GroupTooSmall) when group_size < 2.
std::pair<ToyPolicy, StepRecord> sim_step(ToyPolicy policy, std::size_t group_size,
                                          const RewardFn& reward_fn, StepOptions options = {});

/// Same update with the group fixed by the caller.
std::pair<ToyPolicy, StepRecord> sim_step_with_samples(ToyPolicy policy,
                                                       std::span<const std::size_t> samples,
                                                       const RewardFn& reward_fn,
                                                       StepOptions options = {});

struct Simulation {
  ToyPolicy final_policy;
  std::vector<StepRecord> curve;
};

/// Template rewards are evaluated once and cached (reward_fn must be a pure
/// function of the text).
Simulation run_simulation(ToyPolicy policy, std::size_t iterations, std::size_t group_size,
                          const RewardFn& reward_fn, StepOptions options = {});

/// CSV with columns iteration,mean_reward,max_reward,expected_reward,
/// p_best_template,loss.
std::string curve_csv(std::span<const StepRecord> curve);

}  // namespace umlcot::grpo
