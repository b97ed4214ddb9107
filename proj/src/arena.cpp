#include "clover/arena.hpp"

#include <algorithm>

namespace clover::arena {

void CommGraph::add_edge(int from, int to) {
  if (from == to) throw ContractError("comm graph: self loop");
  if (from < 0 || from >= n || to < 0 || to >= n)
    throw ContractError("comm graph: node out of range");
  auto& nb = in_neighbors[to];
  auto it = std::lower_bound(nb.begin(), nb.end(), from);
  if (it == nb.end() || *it != from) nb.insert(it, from);
}

bool CommGraph::has_edge(int from, int to) const {
  const auto& nb = in_neighbors[to];
  return std::binary_search(nb.begin(), nb.end(), from);
}

int CommGraph::edge_count() const {
  int c = 0;
  for (const auto& nb : in_neighbors) c += static_cast<int>(nb.size());
  return c;
}

double normalize_rss(double rss_dbm, double floor, double ceil) {
  const double t = (rss_dbm - floor) / (ceil - floor);
  return std::clamp(t, 0.0, 1.0);
}

Arena::Arena(game::GameConfig gcfg, chan::ChannelParams ccfg, ArenaConfig acfg)
    : world_(gcfg), ccfg_(ccfg), acfg_(acfg) {
  ccfg_.validate();
  if (acfg_.message_dim < 1) throw ConfigError("arena: message_dim must be >= 1");
}

std::vector<AugmentedObservation> Arena::assemble_obs(
    const std::vector<std::vector<double>>& game_obs,
    const chan::DeliveryReport* report) const {
  const int n = n_agents();
  std::vector<AugmentedObservation> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].game_obs = game_obs[i];
    out[i].wireless_obs.assign(n, 0.0);
    if (report) {
      for (const auto& d : (*report).inbox[i]) {
        out[i].wireless_obs[d.sender] =
            normalize_rss(d.rss_dbm, acfg_.rss_floor, acfg_.rss_ceil);
        out[i].inbox.push_back(d);
      }
    }
  }
  return out;
}

ArenaResetResult Arena::reset(Rng& env_rng) {
  auto game = world_.reset(env_rng);
  graph_ = CommGraph(n_agents());
  ArenaResetResult out;
  out.obs = assemble_obs(game.obs, nullptr);
  out.state = game.state;
  out.graph = graph_;
  return out;
}

ArenaStepResult Arena::step(const std::vector<AugmentedAction>& joint,
                            const std::vector<std::vector<double>>& messages,
                            Rng& chan_rng) {
  const int n = n_agents();
  if (static_cast<int>(joint.size()) != n ||
      static_cast<int>(messages.size()) != n)
    throw ContractError("arena: joint action / message count mismatch");
  for (int i = 0; i < n; ++i)
    if (joint[i].comm != 0 &&
        static_cast<int>(messages[i].size()) != acfg_.message_dim)
      throw ContractError("arena: message dimension mismatch");

  std::vector<int> game_actions(n);
  for (int i = 0; i < n; ++i) game_actions[i] = joint[i].game_action;
  auto game = world_.step(game_actions);

  std::vector<chan::Transmission> txs;
  for (int i = 0; i < n; ++i)
    if (joint[i].comm != 0) txs.push_back({i, messages[i]});

  auto report = chan::deliver_round(txs, world_.state().agents,
                                    world_.wireless_obstacles(), ccfg_, chan_rng);

  graph_ = CommGraph(n);
  for (int i = 0; i < n; ++i)
    for (const auto& d : report.inbox[i]) graph_.add_edge(d.sender, i);

  ArenaStepResult out;
  out.obs = assemble_obs(game.obs, &report);
  out.state = game.state;
  out.reward = game.reward;
  out.done = game.done;
  out.graph = graph_;
  out.report = std::move(report);
  return out;
}

}  // namespace clover::arena
