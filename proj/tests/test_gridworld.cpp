#include <doctest.h>

#include <set>

#include "clover/gridworld.hpp"

using namespace clover;
using namespace clover::game;

namespace {

GameConfig pp_config(int grid, int agents, int obstacles = 0) {
  GameConfig cfg;
  cfg.kind = GameKind::PP;
  cfg.grid = grid;
  cfg.n_agents = agents;
  cfg.n_obstacles = obstacles;
  return cfg;
}

GameConfig lj_config(int grid, int agents, int trees) {
  GameConfig cfg;
  cfg.kind = GameKind::LJ;
  cfg.grid = grid;
  cfg.n_agents = agents;
  cfg.n_trees = trees;
  return cfg;
}

}  // namespace

TEST_CASE("reset places distinct entities") {
  Gridworld world(pp_config(7, 3, 1));
  Rng rng(5);
  world.reset(rng);
  const GameState& s = world.state();
  std::set<std::pair<int, int>> cells;
  for (const auto& p : s.agents) cells.insert({p.x, p.y});
  cells.insert({s.prey.x, s.prey.y});
  int n_obstacles = 0;
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 7; ++x)
      if (s.obstacles.is_blocked(x, y)) {
        cells.insert({x, y});
        ++n_obstacles;
      }
  CHECK(n_obstacles == 1);
  CHECK(cells.size() == 5);  // 3 agents + prey + obstacle, all distinct
}

TEST_CASE("reset is deterministic per seed") {
  Gridworld a(pp_config(7, 3, 2)), b(pp_config(7, 3, 2));
  Rng ra(99), rb(99);
  auto oa = a.reset(ra);
  auto ob = b.reset(rb);
  CHECK(oa.state == ob.state);
  CHECK(oa.obs == ob.obs);
  for (int i = 0; i < 3; ++i) CHECK(a.state().agents[i] == b.state().agents[i]);
}

TEST_CASE("capacity errors") {
  CHECK_THROWS_AS(Gridworld(pp_config(7, 50)), ConfigError);
  Gridworld tight(pp_config(3, 8, 1));  // 9 cells, 8 agents + prey + obstacle
  Rng rng(1);
  CHECK_THROWS_AS(tight.reset(rng), ConfigError);
}

TEST_CASE("PP stepping: stay, blocking and step penalty") {
  Gridworld world(pp_config(5, 2));
  GameState s;
  s.agents = {{1, 1}, {3, 3}};
  s.prey = {4, 4};
  s.obstacles = chan::ObstacleGrid(5, 5);
  s.obstacles.set(2, 1, true);
  world.reset_to(s);

  SUBCASE("stay leaves positions unchanged at the step penalty") {
    auto out = world.step({4, 4});
    CHECK(world.state().agents[0] == chan::GridPos{1, 1});
    CHECK(world.state().agents[1] == chan::GridPos{3, 3});
    CHECK(out.reward == doctest::Approx(-0.1));
    CHECK_FALSE(out.done);
  }
  SUBCASE("moves into obstacles are no-ops") {
    world.step({3, 4});  // agent 0 right into (2,1): blocked
    CHECK(world.state().agents[0] == chan::GridPos{1, 1});
  }
  SUBCASE("moves off the grid are no-ops") {
    world.step({2, 3});  // agent 0 left to (0,1)
    CHECK(world.state().agents[0] == chan::GridPos{0, 1});
    world.step({2, 3});  // left again: wall
    CHECK(world.state().agents[0] == chan::GridPos{0, 1});
  }
  SUBCASE("invalid action id is rejected") {
    CHECK_THROWS_AS(world.step({5, 4}), ContractError);
    CHECK_THROWS_AS(world.step({-1, 4}), ContractError);
  }
}

TEST_CASE("PP episode return is exactly -0.1 times the termination step") {
  GameConfig cfg = pp_config(5, 2);
  cfg.max_steps = 60;
  Gridworld world(cfg);
  Rng rng(11), policy(12);
  for (int ep = 0; ep < 20; ++ep) {
    world.reset(rng);
    double ret = 0.0;
    int steps = 0;
    bool done = false;
    while (!done) {
      std::vector<int> acts;
      for (int i = 0; i < 2; ++i)
        acts.push_back(static_cast<int>(policy.uniform_int(kGameActions)));
      auto out = world.step(acts);
      ret += out.reward;
      ++steps;
      done = out.done;
    }
    CHECK(ret == doctest::Approx(-0.1 * steps).epsilon(1e-12));
    CHECK(steps <= cfg.max_steps);
  }
}

TEST_CASE("PP arrival: arrived predators freeze, episode ends when all arrive") {
  Gridworld world(pp_config(5, 2));
  GameState s;
  s.agents = {{3, 4}, {4, 0}};
  s.prey = {4, 4};
  world.reset_to(s);
  auto out = world.step({3, 4});  // agent 0 steps right onto the prey
  CHECK(world.state().arrived[0] == 1);
  CHECK_FALSE(out.done);
  world.step({2, 4});  // arrived agent's move is a no-op
  CHECK(world.state().agents[0] == chan::GridPos{4, 4});
  // agent 1 walks down the last column to the prey
  bool done = false;
  int guard = 0;
  while (!done) {
    auto r = world.step({4, 1});
    done = r.done;
    REQUIRE(++guard < 10);
  }
  CHECK(world.state().arrived[1] == 1);
}

TEST_CASE("LJ chopping and felled trees staying felled") {
  GameConfig cfg = lj_config(6, 3, 2);
  cfg.k_choppers = 2;
  Gridworld world(cfg);
  GameState s;
  s.agents = {{1, 2}, {3, 2}, {5, 5}};
  s.trees = {{2, 2}, {0, 5}};
  s.tree_observed = {1, 1};  // no observation bonus in this scenario
  world.reset_to(s);

  // two agents already adjacent to tree 0: felled on the first step
  auto out = world.step({4, 4, 4});
  CHECK(world.state().tree_alive[0] == 0);
  CHECK(out.reward == doctest::Approx(-0.1 + 0.5));
  CHECK_FALSE(out.done);

  out = world.step({4, 4, 4});
  CHECK(out.reward == doctest::Approx(-0.1));
  CHECK(world.state().tree_alive[0] == 0);
}

TEST_CASE("LJ observation bonus granted once per tree") {
  GameConfig cfg = lj_config(6, 2, 1);
  cfg.k_choppers = 2;
  Gridworld world(cfg);
  GameState s;
  s.agents = {{4, 0}, {0, 5}};
  s.trees = {{2, 0}};
  world.reset_to(s);
  CHECK(world.state().tree_observed[0] == 0);

  auto out = world.step({2, 4});  // agent 0 to (3,0): tree enters the radius
  CHECK(world.state().tree_observed[0] == 1);
  CHECK(out.reward == doctest::Approx(-0.1 + 0.05));
  out = world.step({4, 4});
  CHECK(out.reward == doctest::Approx(-0.1));
}

TEST_CASE("LJ chop reward totals 0.5 per tree when finished early") {
  GameConfig cfg = lj_config(5, 4, 2);
  cfg.k_choppers = 2;
  Gridworld world(cfg);
  GameState s;
  s.agents = {{1, 1}, {1, 3}, {3, 1}, {3, 3}};
  s.trees = {{1, 2}, {3, 2}};
  s.tree_observed = {1, 1};
  world.reset_to(s);
  double chop_total = 0.0;
  int steps = 0;
  bool done = false;
  while (!done) {
    auto out = world.step({4, 4, 4, 4});
    chop_total += out.reward + 0.1;  // strip the step penalty
    done = out.done;
    ++steps;
  }
  CHECK(steps < cfg.max_steps);
  CHECK(chop_total == doctest::Approx(0.5 * 2));
}

TEST_CASE("observation layout") {
  GameConfig cfg = pp_config(5, 2);
  cfg.obs_radius = 1;
  Gridworld world(cfg);
  GameState s;
  s.agents = {{0, 0}, {4, 4}};
  s.prey = {4, 3};
  world.reset_to(s);

  auto o0 = world.observe(0);
  auto o1 = world.observe(1);
  REQUIRE(static_cast<int>(o0.size()) == cfg.obs_len());
  REQUIRE(o0.size() == o1.size());

  // agent 0: prey far outside radius
  CHECK(o0[2] == 0.0);
  CHECK(o0[3] == 0.0);
  CHECK(o0[4] == 0.0);
  // agent 1 at (4,4), prey at (4,3): visible, offset (0,-1)/4
  CHECK(o1[2] == doctest::Approx(0.0));
  CHECK(o1[3] == doctest::Approx(-0.25));
  CHECK(o1[4] == 1.0);
  // own position normalized
  CHECK(o1[0] == doctest::Approx(1.0));
  CHECK(o1[1] == doctest::Approx(1.0));
  // 3x3 occupancy: corner agent sees out-of-grid as blocked (dy=-1 row)
  CHECK(o0[5] == 1.0);
  CHECK(o0[6] == 1.0);
  CHECK(o0[7] == 1.0);
  // agent id one-hot
  CHECK(o0[14] == 1.0);
  CHECK(o0[15] == 0.0);
  CHECK(o1[14] == 0.0);
  CHECK(o1[15] == 1.0);

  SUBCASE("agent on the prey cell sees offset zero with flag one") {
    GameState s2;
    s2.agents = {{4, 3}, {0, 0}};
    s2.prey = {4, 3};
    world.reset_to(s2);
    auto o = world.observe(0);
    CHECK(o[2] == 0.0);
    CHECK(o[3] == 0.0);
    CHECK(o[4] == 1.0);
  }
}

TEST_CASE("global state layout is fixed length") {
  GameConfig cfg = pp_config(5, 3);
  Gridworld world(cfg);
  Rng rng(2);
  auto out = world.reset(rng);
  CHECK(static_cast<int>(out.state.size()) == cfg.state_len());
  auto next = world.step({4, 4, 4});
  CHECK(next.state.size() == out.state.size());

  GameConfig lj = lj_config(6, 3, 2);
  Gridworld wl(lj);
  auto lo = wl.reset(rng);
  CHECK(static_cast<int>(lo.state.size()) == lj.state_len());
}

TEST_CASE("step on a terminal state is rejected") {
  GameConfig cfg = pp_config(5, 1);
  cfg.max_steps = 1;
  Gridworld world(cfg);
  Rng rng(3);
  world.reset(rng);
  world.step({4});
  CHECK_THROWS_AS(world.step({4}), ContractError);
}

TEST_CASE("barrier placement blocks a straight wall") {
  GameConfig cfg = pp_config(10, 4);
  cfg.barrier_len = 9;
  Gridworld world(cfg);
  Rng rng(21);
  world.reset(rng);
  int blocked = 0;
  std::set<int> xs, ys;
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x)
      if (world.state().obstacles.is_blocked(x, y)) {
        ++blocked;
        xs.insert(x);
        ys.insert(y);
      }
  CHECK(blocked == 9);
  CHECK((xs.size() == 1 || ys.size() == 1));  // straight line
}

TEST_CASE("wireless obstacles: PP walls vs LJ live trees") {
  Gridworld pp(pp_config(5, 1, 2));
  Rng rng(8);
  pp.reset(rng);
  int walls = 0;
  auto wg = pp.wireless_obstacles();
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) walls += wg.is_blocked(x, y) ? 1 : 0;
  CHECK(walls == 2);

  GameConfig cfg = lj_config(5, 2, 1);
  Gridworld lj(cfg);
  GameState s;
  s.agents = {{0, 2}, {2, 2}};
  s.trees = {{1, 2}};
  s.tree_observed = {1};
  lj.reset_to(s);
  CHECK(lj.wireless_obstacles().is_blocked(1, 2));
  lj.step({4, 4});  // both agents adjacent: tree felled
  CHECK_FALSE(lj.wireless_obstacles().is_blocked(1, 2));
}
