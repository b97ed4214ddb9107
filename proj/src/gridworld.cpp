#include "clover/gridworld.hpp"

#include <algorithm>
#include <cmath>

namespace clover::game {

void GameConfig::validate() const {
  if (grid < 3) throw ConfigError("game: grid must be >= 3");
  if (n_agents < 1 || n_agents > grid * grid)
    throw ConfigError("game: agents must be in [1, grid^2]");
  if (k_choppers < 1) throw ConfigError("game: k_choppers must be >= 1");
  if (max_steps < 1) throw ConfigError("game: max_steps must be >= 1");
  if (obs_radius < 0) throw ConfigError("game: obs_radius must be >= 0");
  if (n_obstacles < 0 || barrier_len < 0)
    throw ConfigError("game: obstacle counts must be >= 0");
  if (barrier_len > grid) throw ConfigError("game: barrier longer than grid");
  if (kind == GameKind::LJ && n_trees < 1)
    throw ConfigError("game: LJ needs at least one tree");
}

int GameConfig::obs_len() const {
  int n = 2 + 3 + 9 + n_agents;
  if (kind == GameKind::LJ) n += n_trees;
  return n;
}

int GameConfig::state_len() const {
  if (kind == GameKind::PP) return 2 * n_agents + 2 + n_agents;
  return 2 * n_agents + 3 * n_trees;
}

Gridworld::Gridworld(GameConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Gridworld::place_entities(Rng& rng) {
  const int g = cfg_.grid;
  state_ = GameState{};
  state_.obstacles = chan::ObstacleGrid(g, g);

  if (cfg_.kind == GameKind::PP) {
    if (cfg_.barrier_len > 0) {
      const bool vertical = rng.bernoulli(0.5);
      const int line = static_cast<int>(rng.uniform_int(g));
      const int start = static_cast<int>(rng.uniform_int(g - cfg_.barrier_len + 1));
      for (int k = 0; k < cfg_.barrier_len; ++k) {
        if (vertical)
          state_.obstacles.set(line, start + k, true);
        else
          state_.obstacles.set(start + k, line, true);
      }
    }
    for (int k = 0; k < cfg_.n_obstacles; ++k) {
      int guard = 0;
      while (true) {
        const int x = static_cast<int>(rng.uniform_int(g));
        const int y = static_cast<int>(rng.uniform_int(g));
        if (!state_.obstacles.is_blocked(x, y)) {
          state_.obstacles.set(x, y, true);
          break;
        }
        if (++guard > 100 * g * g)
          throw ConfigError("game: cannot place obstacles");
      }
    }
  }

  std::vector<chan::GridPos> free_cells;
  for (int y = 0; y < g; ++y)
    for (int x = 0; x < g; ++x)
      if (!state_.obstacles.is_blocked(x, y)) free_cells.push_back({x, y});

  const int needed =
      cfg_.n_agents + (cfg_.kind == GameKind::PP ? 1 : cfg_.n_trees);
  if (static_cast<int>(free_cells.size()) < needed)
    throw ConfigError("game: not enough free cells for placement");

  // draw distinct cells without replacement
  std::vector<chan::GridPos> picks;
  for (int k = 0; k < needed; ++k) {
    const size_t j = rng.uniform_int(free_cells.size());
    picks.push_back(free_cells[j]);
    free_cells.erase(free_cells.begin() + j);
  }

  state_.agents.assign(picks.begin(), picks.begin() + cfg_.n_agents);
  if (cfg_.kind == GameKind::PP) {
    state_.prey = picks[cfg_.n_agents];
    state_.arrived.assign(cfg_.n_agents, 0);
  } else {
    state_.trees.assign(picks.begin() + cfg_.n_agents, picks.end());
    state_.tree_alive.assign(cfg_.n_trees, 1);
    state_.tree_observed.assign(cfg_.n_trees, 0);
    for (int t = 0; t < cfg_.n_trees; ++t)
      for (int i = 0; i < cfg_.n_agents; ++i) {
        const int dx = std::abs(state_.agents[i].x - state_.trees[t].x);
        const int dy = std::abs(state_.agents[i].y - state_.trees[t].y);
        if (std::max(dx, dy) <= cfg_.obs_radius) state_.tree_observed[t] = 1;
      }
  }
}

ResetResult Gridworld::reset(Rng& rng) {
  place_entities(rng);
  ResetResult out;
  for (int i = 0; i < cfg_.n_agents; ++i) out.obs.push_back(observe(i));
  out.state = global_state();
  return out;
}

ResetResult Gridworld::reset_to(GameState s) {
  const int g = cfg_.grid;
  auto inside = [&](const chan::GridPos& p) {
    return p.x >= 0 && p.x < g && p.y >= 0 && p.y < g;
  };
  if (static_cast<int>(s.agents.size()) != cfg_.n_agents)
    throw ContractError("reset_to: agent count mismatch");
  for (const auto& p : s.agents)
    if (!inside(p)) throw ContractError("reset_to: agent out of bounds");
  if (s.obstacles.width == 0) s.obstacles = chan::ObstacleGrid(g, g);
  if (cfg_.kind == GameKind::PP) {
    if (!inside(s.prey)) throw ContractError("reset_to: prey out of bounds");
    if (s.arrived.empty()) s.arrived.assign(cfg_.n_agents, 0);
  } else {
    if (static_cast<int>(s.trees.size()) != cfg_.n_trees)
      throw ContractError("reset_to: tree count mismatch");
    for (const auto& p : s.trees)
      if (!inside(p)) throw ContractError("reset_to: tree out of bounds");
    if (s.tree_alive.empty()) s.tree_alive.assign(cfg_.n_trees, 1);
    if (s.tree_observed.empty()) s.tree_observed.assign(cfg_.n_trees, 0);
  }
  s.step_count = 0;
  s.done = false;
  state_ = std::move(s);
  ResetResult out;
  for (int i = 0; i < cfg_.n_agents; ++i) out.obs.push_back(observe(i));
  out.state = global_state();
  return out;
}

StepResult Gridworld::step(const std::vector<int>& joint_actions) {
  if (state_.done) throw ContractError("game: step on terminal state");
  if (static_cast<int>(joint_actions.size()) != cfg_.n_agents)
    throw ContractError("game: wrong joint action count");
  for (int a : joint_actions)
    if (a < 0 || a >= kGameActions) throw ContractError("game: invalid action id");

  static constexpr int kDx[kGameActions] = {0, 0, -1, 1, 0};
  static constexpr int kDy[kGameActions] = {-1, 1, 0, 0, 0};

  const int g = cfg_.grid;
  for (int i = 0; i < cfg_.n_agents; ++i) {
    if (cfg_.kind == GameKind::PP && state_.arrived[i]) continue;
    const int nx = state_.agents[i].x + kDx[joint_actions[i]];
    const int ny = state_.agents[i].y + kDy[joint_actions[i]];
    if (nx < 0 || nx >= g || ny < 0 || ny >= g) continue;
    if (state_.obstacles.is_blocked(nx, ny)) continue;
    state_.agents[i] = {nx, ny};
  }

  double reward = cfg_.step_penalty;
  state_.step_count += 1;

  if (cfg_.kind == GameKind::PP) {
    for (int i = 0; i < cfg_.n_agents; ++i)
      if (state_.agents[i] == state_.prey) state_.arrived[i] = 1;
    bool all = true;
    for (uint8_t f : state_.arrived) all = all && f;
    state_.done = all || state_.step_count >= cfg_.max_steps;
  } else {
    for (int t = 0; t < cfg_.n_trees; ++t) {
      if (!state_.tree_alive[t]) continue;
      int adjacent = 0;
      bool seen = false;
      for (int i = 0; i < cfg_.n_agents; ++i) {
        const int dx = std::abs(state_.agents[i].x - state_.trees[t].x);
        const int dy = std::abs(state_.agents[i].y - state_.trees[t].y);
        if (dx + dy <= 1) ++adjacent;
        if (std::max(dx, dy) <= cfg_.obs_radius) seen = true;
      }
      if (seen && !state_.tree_observed[t]) {
        state_.tree_observed[t] = 1;
        reward += cfg_.observe_reward;
      }
      if (adjacent >= cfg_.k_choppers) {
        state_.tree_alive[t] = 0;
        reward += cfg_.chop_reward;
      }
    }
    bool any = false;
    for (uint8_t f : state_.tree_alive) any = any || f;
    state_.done = !any || state_.step_count >= cfg_.max_steps;
  }

  StepResult out;
  for (int i = 0; i < cfg_.n_agents; ++i) out.obs.push_back(observe(i));
  out.state = global_state();
  out.reward = reward;
  out.done = state_.done;
  return out;
}

std::vector<double> Gridworld::observe(int agent) const {
  if (agent < 0 || agent >= cfg_.n_agents)
    throw ContractError("game: bad agent id");
  const double denom = static_cast<double>(cfg_.grid - 1);
  const chan::GridPos me = state_.agents[agent];
  std::vector<double> o;
  o.reserve(cfg_.obs_len());
  o.push_back(me.x / denom);
  o.push_back(me.y / denom);

  // target feature: prey (PP) or nearest live tree (LJ)
  chan::GridPos target{};
  bool have_target = false;
  if (cfg_.kind == GameKind::PP) {
    target = state_.prey;
    have_target = true;
  } else {
    int best = -1, best_d = 0;
    for (int t = 0; t < cfg_.n_trees; ++t) {
      if (!state_.tree_alive[t]) continue;
      const int d = std::max(std::abs(state_.trees[t].x - me.x),
                             std::abs(state_.trees[t].y - me.y));
      if (best < 0 || d < best_d) {
        best = t;
        best_d = d;
      }
    }
    if (best >= 0) {
      target = state_.trees[best];
      have_target = true;
    }
  }
  const int cheb = have_target ? std::max(std::abs(target.x - me.x),
                                          std::abs(target.y - me.y))
                               : cfg_.grid;
  if (have_target && cheb <= cfg_.obs_radius) {
    o.push_back((target.x - me.x) / denom);
    o.push_back((target.y - me.y) / denom);
    o.push_back(1.0);
  } else {
    o.push_back(0.0);
    o.push_back(0.0);
    o.push_back(0.0);
  }

  // 3x3 occupancy of movement-blocking cells; out-of-grid counts as blocked
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int x = me.x + dx, y = me.y + dy;
      const bool blocked = x < 0 || x >= cfg_.grid || y < 0 || y >= cfg_.grid ||
                           state_.obstacles.is_blocked(x, y);
      o.push_back(blocked ? 1.0 : 0.0);
    }

  for (int i = 0; i < cfg_.n_agents; ++i) o.push_back(i == agent ? 1.0 : 0.0);
  if (cfg_.kind == GameKind::LJ)
    for (uint8_t f : state_.tree_alive) o.push_back(f ? 1.0 : 0.0);
  return o;
}

std::vector<double> Gridworld::global_state() const {
  const double denom = static_cast<double>(cfg_.grid - 1);
  std::vector<double> s;
  s.reserve(cfg_.state_len());
  for (const auto& p : state_.agents) {
    s.push_back(p.x / denom);
    s.push_back(p.y / denom);
  }
  if (cfg_.kind == GameKind::PP) {
    s.push_back(state_.prey.x / denom);
    s.push_back(state_.prey.y / denom);
    for (uint8_t f : state_.arrived) s.push_back(f ? 1.0 : 0.0);
  } else {
    for (const auto& p : state_.trees) {
      s.push_back(p.x / denom);
      s.push_back(p.y / denom);
    }
    for (uint8_t f : state_.tree_alive) s.push_back(f ? 1.0 : 0.0);
    for (uint8_t f : state_.tree_observed) s.push_back(f ? 1.0 : 0.0);
  }
  return s;
}

chan::ObstacleGrid Gridworld::wireless_obstacles() const {
  if (cfg_.kind == GameKind::PP) return state_.obstacles;
  chan::ObstacleGrid grid(cfg_.grid, cfg_.grid);
  for (int t = 0; t < cfg_.n_trees; ++t)
    if (state_.tree_alive[t]) grid.set(state_.trees[t].x, state_.trees[t].y, true);
  return grid;
}

bool Gridworld::target_visible(int agent) const {
  const chan::GridPos me = state_.agents[agent];
  if (cfg_.kind == GameKind::PP) {
    const int d = std::max(std::abs(state_.prey.x - me.x),
                           std::abs(state_.prey.y - me.y));
    return d <= cfg_.obs_radius;
  }
  for (int t = 0; t < cfg_.n_trees; ++t) {
    if (!state_.tree_alive[t]) continue;
    const int d = std::max(std::abs(state_.trees[t].x - me.x),
                           std::abs(state_.trees[t].y - me.y));
    if (d <= cfg_.obs_radius) return true;
  }
  return false;
}

}  // namespace clover::game
