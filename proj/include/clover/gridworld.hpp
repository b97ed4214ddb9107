#pragma once

#include <cstdint>
#include <vector>

#include "clover/channel.hpp"
#include "clover/rng.hpp"

namespace clover::game {

enum class GameKind { PP, LJ };

// actions: 0 up, 1 down, 2 left, 3 right, 4 stay
inline constexpr int kGameActions = 5;

struct GameConfig {
  GameKind kind = GameKind::PP;
  int grid = 7;
  int n_agents = 3;
  int n_obstacles = 0;   // PP, random-cell mode
  int barrier_len = 0;   // PP, straight wall instead of random cells
  int n_trees = 3;       // LJ
  int k_choppers = 2;    // LJ
  double observe_reward = 0.05;
  double chop_reward = 0.5;
  double step_penalty = -0.1;
  int max_steps = 100;
  int obs_radius = 1;

  void validate() const;
  int obs_len() const;
  int state_len() const;
};

struct GameState {
  std::vector<chan::GridPos> agents;
  chan::GridPos prey;
  std::vector<uint8_t> arrived;        // PP
  std::vector<chan::GridPos> trees;    // LJ
  std::vector<uint8_t> tree_alive;     // LJ
  std::vector<uint8_t> tree_observed;  // LJ
  chan::ObstacleGrid obstacles;        // movement-blocking cells (PP)
  int step_count = 0;
  bool done = false;
};

struct ResetResult {
  std::vector<std::vector<double>> obs;
  std::vector<double> state;
};

struct StepResult {
  std::vector<std::vector<double>> obs;
  std::vector<double> state;
  double reward = 0.0;
  bool done = false;
};

// The two cooperative games behind one contract. step() is deterministic;
// all randomness is consumed at reset().
class Gridworld {
 public:
  explicit Gridworld(GameConfig cfg);

  ResetResult reset(Rng& rng);
  // scripted starts: installs a hand-built state (bounds-checked)
  ResetResult reset_to(GameState s);
  StepResult step(const std::vector<int>& joint_actions);

  std::vector<double> observe(int agent) const;
  std::vector<double> global_state() const;

  // cells that attenuate radio: PP walls, LJ live trees
  chan::ObstacleGrid wireless_obstacles() const;
  // true when the agent currently sees the prey / any live tree
  bool target_visible(int agent) const;

  const GameState& state() const { return state_; }
  const GameConfig& config() const { return cfg_; }

 private:
  GameConfig cfg_;
  GameState state_;
  void place_entities(Rng& rng);
};

}  // namespace clover::game
