#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "clover/agentnet.hpp"
#include "clover/arena.hpp"
#include "clover/mixer.hpp"
#include "clover/params.hpp"

namespace clover::train {

struct StepRecord {
  std::vector<std::vector<double>> game_obs;      // o_T^t per agent
  std::vector<std::vector<double>> wireless_obs;  // o_C^t per agent
  arena::CommGraph graph;        // G^t: delivery mask feeding step-t inboxes
  std::vector<double> state;     // s^t
  std::vector<arena::AugmentedAction> actions;  // executed augmented actions
  double reward = 0.0;
  bool done = false;
  // collection-time outputs, kept for replay checks and behavior logs
  std::vector<std::vector<double>> sent_messages;
  std::vector<double> q_executed;
  std::vector<uint8_t> target_visible;
};

struct EpisodeTrajectory {
  std::vector<StepRecord> steps;
  int length() const { return static_cast<int>(steps.size()); }
  int n_agents() const { return steps.empty() ? 0 : static_cast<int>(steps[0].actions.size()); }
};

struct TrainerConfig {
  double gamma = 0.99;
  double lr = 5e-4;
  int batch_episodes = 32;
  int buffer_capacity = 5000;     // episodes, FIFO
  int target_sync_interval = 200; // episodes
  double eps_start = 1.0;
  double eps_end = 0.05;
  int64_t eps_decay_steps = 50000;
  int64_t total_env_steps = 200000;
  double grad_clip = 10.0;

  void validate() const;
  double epsilon_at(int64_t env_steps) const;
};

// Networks + mixer wiring for one run. Parameters live in the store under
// the "agent.*" and mixer prefixes.
struct ModelConfig {
  net::AgentNetConfig agent;
  mix::MixerConfig mixer;
  mix::MixerKind kind = mix::MixerKind::Clover;
  bool comm_enabled = true;
};

void init_model_params(ad::ParamStore& store, const ModelConfig& mc, Rng& rng);

// greedy argmax; with communication disabled only the a_C = 0 column competes
std::pair<int, int> greedy_action(const Mat& q, bool comm_enabled);
arena::AugmentedAction select_augmented(const Mat& q, double epsilon,
                                        bool comm_enabled, Rng& rng);

// Rolls one episode with epsilon-greedy augmented actions, recording
// everything needed to replay it through a network.
EpisodeTrajectory collect_episode(arena::Arena& arena, ad::ParamStore& store,
                                  const ModelConfig& mc, double epsilon,
                                  Rng& env_rng, Rng& chan_rng, Rng& explore_rng);

enum class ActionSelect { Executed, Argmax };

struct ReplayResult {
  std::vector<ad::NodeId> qtot;                   // per step
  std::vector<std::vector<ad::NodeId>> q_mats;    // per step, per agent
  std::vector<std::vector<ad::NodeId>> q_chosen;  // per step, per agent (1x1)
  std::vector<std::vector<ad::NodeId>> messages;  // per step, per agent
};

// Re-runs the episode through the bound network: messages are recomputed
// from the bound parameters and flow through the stored delivery mask, so
// gradients reach senders' message heads via receivers' encoders.
ReplayResult replay_forward(ad::Tape& tape, ad::Binder& params,
                            const EpisodeTrajectory& traj, const ModelConfig& mc,
                            ActionSelect select);

// Eq-style episodic TD loss: y_t = r_t + gamma * Qtot'(t+1) under the target
// network with per-agent argmax actions; terminal step uses y = r. Targets
// are constants.
ad::NodeId td_loss(ad::Tape& tape, ad::Binder& online,
                   const EpisodeTrajectory& traj, ad::ParamStore& store,
                   const ModelConfig& mc, double gamma);

struct MetricsRow {
  int64_t env_steps = 0;
  int64_t episodes = 0;
  uint64_t seed = 0;
  double mean_steps_to_termination = 0.0;  // sliding 100-episode window
  double mean_return = 0.0;                // sliding 100-episode window
  double mean_comm_prob = 0.0;             // sliding 100-episode window
  double epsilon = 0.0;
  double loss = 0.0;
};

using MetricsCallback = std::function<void(const MetricsRow&)>;

// Full training loop: collect, store (FIFO buffer), sample, minimize the
// mean episodic TD loss with Adam, hard-sync the target network.
void train_run(arena::Arena& arena, ad::ParamStore& store, const ModelConfig& mc,
               const TrainerConfig& tc, const RngPool& rngs, uint64_t seed,
               const MetricsCallback& on_row);

}  // namespace clover::train
