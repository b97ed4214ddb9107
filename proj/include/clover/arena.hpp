#pragma once

#include <vector>

#include "clover/channel.hpp"
#include "clover/gridworld.hpp"
#include "clover/rng.hpp"

namespace clover::arena {

// Directed communication graph: edge (j -> i) iff i decoded j's message in
// the last delivery round.
struct CommGraph {
  int n = 0;
  std::vector<std::vector<int>> in_neighbors;  // per receiver, ascending

  CommGraph() = default;
  explicit CommGraph(int agents) : n(agents), in_neighbors(agents) {}

  void add_edge(int from, int to);
  bool has_edge(int from, int to) const;
  int edge_count() const;
};

struct AugmentedObservation {
  std::vector<double> game_obs;       // o_T
  std::vector<double> wireless_obs;   // o_C: normalized RSS per sender slot
  std::vector<chan::Delivery> inbox;  // decoded last round, sender-ascending
};

struct AugmentedAction {
  int game_action = 4;  // stay
  int comm = 0;         // a_C bit
};

struct ArenaConfig {
  int message_dim = 8;
  double rss_floor = -100.0;
  double rss_ceil = -30.0;
};

double normalize_rss(double rss_dbm, double floor = -100.0, double ceil = -30.0);

struct ArenaResetResult {
  std::vector<AugmentedObservation> obs;
  std::vector<double> state;
  CommGraph graph;
};

struct ArenaStepResult {
  std::vector<AugmentedObservation> obs;
  std::vector<double> state;
  double reward = 0.0;
  bool done = false;
  CommGraph graph;  // realized graph consumed at the NEXT step
  chan::DeliveryReport report;
};

// Couples one gridworld with the channel. Messages sent at step t are
// buffered and appear in observations at step t+1 only.
class Arena {
 public:
  Arena(game::GameConfig gcfg, chan::ChannelParams ccfg, ArenaConfig acfg);

  ArenaResetResult reset(Rng& env_rng);
  ArenaStepResult step(const std::vector<AugmentedAction>& joint,
                       const std::vector<std::vector<double>>& messages,
                       Rng& chan_rng);

  const game::Gridworld& world() const { return world_; }
  const CommGraph& graph() const { return graph_; }
  const ArenaConfig& config() const { return acfg_; }
  const chan::ChannelParams& channel() const { return ccfg_; }
  int n_agents() const { return world_.config().n_agents; }
  bool done() const { return world_.state().done; }

 private:
  game::Gridworld world_;
  chan::ChannelParams ccfg_;
  ArenaConfig acfg_;
  CommGraph graph_;

  std::vector<AugmentedObservation> assemble_obs(
      const std::vector<std::vector<double>>& game_obs,
      const chan::DeliveryReport* report) const;
};

}  // namespace clover::arena
