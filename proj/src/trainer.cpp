#include "clover/trainer.hpp"

#include <algorithm>
#include <cmath>

namespace clover::train {

void TrainerConfig::validate() const {
  if (gamma <= 0.0 || gamma >= 1.0) throw ConfigError("trainer: gamma must be in (0,1)");
  if (lr <= 0.0) throw ConfigError("trainer: lr must be > 0");
  if (batch_episodes < 1) throw ConfigError("trainer: batch_episodes must be >= 1");
  if (buffer_capacity < 1) throw ConfigError("trainer: buffer_capacity must be >= 1");
  if (target_sync_interval < 1)
    throw ConfigError("trainer: target_sync_interval must be >= 1");
  if (eps_decay_steps < 1) throw ConfigError("trainer: eps_decay_steps must be >= 1");
  if (eps_start < eps_end) throw ConfigError("trainer: eps_start below eps_end");
  if (total_env_steps < 0) throw ConfigError("trainer: total_env_steps must be >= 0");
}

double TrainerConfig::epsilon_at(int64_t env_steps) const {
  const double f = std::min(1.0, static_cast<double>(env_steps) /
                                     static_cast<double>(eps_decay_steps));
  return eps_start + (eps_end - eps_start) * f;
}

void init_model_params(ad::ParamStore& store, const ModelConfig& mc, Rng& rng) {
  net::init_agent_params(store, mc.agent, rng);
  switch (mc.kind) {
    case mix::MixerKind::Clover:
      mix::init_clover_params(store, mc.mixer, rng);
      break;
    case mix::MixerKind::Qmix:
      mix::init_qmix_params(store, mc.mixer, rng);
      break;
    case mix::MixerKind::Vdn:
      break;
  }
  store.sync_target();
}

std::pair<int, int> greedy_action(const Mat& q, bool comm_enabled) {
  if (comm_enabled) return net::argmax_entry(q);
  int best = 0;
  for (int r = 1; r < q.rows; ++r)
    if (q.at(r, 0) > q.at(best, 0)) best = r;
  return {best, 0};
}

arena::AugmentedAction select_augmented(const Mat& q, double epsilon,
                                        bool comm_enabled, Rng& rng) {
  if (comm_enabled) return net::select_action(q, epsilon, rng);
  if (rng.uniform() < epsilon)
    return {static_cast<int>(rng.uniform_int(q.rows)), 0};
  auto [at, ac] = greedy_action(q, false);
  return {at, ac};
}

namespace {

ad::NodeId q_entry(ad::Tape& t, ad::NodeId q_mat, int a_game, int a_comm) {
  const Mat& v = t.value(q_mat);
  if (a_game < 0 || a_game >= v.rows || a_comm < 0 || a_comm >= v.cols)
    throw ContractError("q_entry: action out of range");
  return t.slice_rows(t.reshape(q_mat, v.rows * v.cols, 1),
                      a_game * v.cols + a_comm, 1);
}

}  // namespace

EpisodeTrajectory collect_episode(arena::Arena& arena, ad::ParamStore& store,
                                  const ModelConfig& mc, double epsilon,
                                  Rng& env_rng, Rng& chan_rng, Rng& explore_rng) {
  const int n = arena.n_agents();
  auto cur = arena.reset(env_rng);
  std::vector<Mat> hidden(n, Mat(mc.agent.gru_hidden, 1));

  EpisodeTrajectory traj;
  bool done = false;
  while (!done) {
    StepRecord rec;
    rec.graph = arena.graph();
    rec.state = cur.state;
    rec.reward = 0.0;
    for (int i = 0; i < n; ++i) {
      rec.game_obs.push_back(cur.obs[i].game_obs);
      rec.wireless_obs.push_back(cur.obs[i].wireless_obs);
      rec.target_visible.push_back(arena.world().target_visible(i) ? 1 : 0);
    }

    // per-step forward pass on a throwaway tape
    ad::Tape t;
    ad::Binder p(t, store, false);
    std::vector<std::vector<double>> messages(n);
    std::vector<arena::AugmentedAction> joint(n);
    for (int i = 0; i < n; ++i) {
      ad::NodeId og = t.constant(Mat::colvec(cur.obs[i].game_obs));
      ad::NodeId ow = t.constant(Mat::colvec(cur.obs[i].wireless_obs));
      std::vector<ad::NodeId> inbox;
      for (const auto& d : cur.obs[i].inbox)
        inbox.push_back(t.constant(Mat::colvec(d.message)));
      ad::NodeId e = net::fuse(t, p, mc.agent, og, ow);
      ad::NodeId phi = net::encode_inbox(t, p, mc.agent, inbox);
      ad::NodeId hp = t.constant(hidden[i]);
      auto fwd = net::q_forward(t, p, mc.agent, e, phi, hp);
      hidden[i] = t.value(fwd.h);
      messages[i] = t.value(fwd.m).a;
      joint[i] = select_augmented(t.value(fwd.q), epsilon, mc.comm_enabled,
                                  explore_rng);
      rec.sent_messages.push_back(messages[i]);
      rec.q_executed.push_back(
          t.value(fwd.q).at(joint[i].game_action, joint[i].comm));
    }
    rec.actions = joint;

    auto next = arena.step(joint, messages, chan_rng);
    rec.reward = next.reward;
    rec.done = next.done;
    done = next.done;
    traj.steps.push_back(std::move(rec));
    cur.obs = std::move(next.obs);
    cur.state = std::move(next.state);
  }
  return traj;
}

ReplayResult replay_forward(ad::Tape& t, ad::Binder& p,
                            const EpisodeTrajectory& traj, const ModelConfig& mc,
                            ActionSelect select) {
  const int n = traj.n_agents();
  if (n == 0) throw ContractError("replay_forward: empty trajectory");
  ReplayResult out;
  std::vector<ad::NodeId> h(n, t.constant(Mat(mc.agent.gru_hidden, 1)));
  std::vector<ad::NodeId> prev_msgs;

  for (size_t step = 0; step < traj.steps.size(); ++step) {
    const StepRecord& rec = traj.steps[step];
    if (rec.graph.n != n)
      throw ContractError("replay_forward: graph size inconsistent with agents");
    if (step == 0 && rec.graph.edge_count() != 0)
      throw ContractError("replay_forward: nonzero mask before first delivery");

    ad::NodeId s_node = t.constant(Mat::colvec(rec.state));
    std::vector<ad::NodeId> q_sel(n), msgs(n), s_hat(n), q_mats(n);
    for (int i = 0; i < n; ++i) {
      ad::NodeId og = t.constant(Mat::colvec(rec.game_obs[i]));
      ad::NodeId ow = t.constant(Mat::colvec(rec.wireless_obs[i]));
      std::vector<ad::NodeId> inbox;
      for (int j : rec.graph.in_neighbors[i]) {
        if (j < 0 || j >= n)
          throw ContractError("replay_forward: mask sender out of range");
        inbox.push_back(prev_msgs[j]);
      }
      ad::NodeId e = net::fuse(t, p, mc.agent, og, ow);
      ad::NodeId phi = net::encode_inbox(t, p, mc.agent, inbox);
      auto fwd = net::q_forward(t, p, mc.agent, e, phi, h[i]);
      h[i] = fwd.h;
      msgs[i] = fwd.m;
      q_mats[i] = fwd.q;
      int at, ac;
      if (select == ActionSelect::Executed) {
        at = rec.actions[i].game_action;
        ac = rec.actions[i].comm;
      } else {
        std::tie(at, ac) = greedy_action(t.value(fwd.q), mc.comm_enabled);
      }
      q_sel[i] = q_entry(t, fwd.q, at, ac);
      if (mc.kind == mix::MixerKind::Clover)
        s_hat[i] = t.concat_rows({s_node, og, ow});
    }

    ad::NodeId qtot = 0;
    switch (mc.kind) {
      case mix::MixerKind::Clover:
        qtot = mix::mix_clover(t, p, mc.mixer, q_sel, s_hat, rec.graph);
        break;
      case mix::MixerKind::Vdn:
        qtot = mix::mix_vdn(t, q_sel);
        break;
      case mix::MixerKind::Qmix:
        qtot = mix::mix_qmix(t, p, mc.mixer, q_sel, s_node);
        break;
    }
    out.qtot.push_back(qtot);
    out.q_mats.push_back(q_mats);
    out.q_chosen.push_back(q_sel);
    out.messages.push_back(msgs);
    prev_msgs = msgs;
  }
  return out;
}

ad::NodeId td_loss(ad::Tape& t, ad::Binder& online, const EpisodeTrajectory& traj,
                   ad::ParamStore& store, const ModelConfig& mc, double gamma) {
  const int len = traj.length();
  if (len < 1) throw ContractError("td_loss: empty trajectory");

  // target pass on its own tape; only the numeric y values survive
  std::vector<double> y(len);
  {
    ad::Tape tt;
    ad::Binder tp(tt, store, true);
    ReplayResult tgt = replay_forward(tt, tp, traj, mc, ActionSelect::Argmax);
    for (int k = 0; k < len; ++k) {
      y[k] = traj.steps[k].reward;
      if (k + 1 < len) y[k] += gamma * tt.value(tgt.qtot[k + 1]).a[0];
    }
  }

  ReplayResult on = replay_forward(t, online, traj, mc, ActionSelect::Executed);
  std::vector<ad::NodeId> sq;
  sq.reserve(len);
  for (int k = 0; k < len; ++k)
    sq.push_back(t.square(t.sub(t.constant_scalar(y[k]), on.qtot[k])));
  return sq.size() == 1 ? sq[0] : t.sum_set(sq);
}

namespace {

class SlidingMean {
 public:
  explicit SlidingMean(size_t window) : window_(window) {}
  void push(double v) {
    buf_.push_back(v);
    sum_ += v;
    if (buf_.size() > window_) {
      sum_ -= buf_.front();
      buf_.pop_front();
    }
  }
  double mean() const { return buf_.empty() ? 0.0 : sum_ / buf_.size(); }

 private:
  size_t window_;
  std::deque<double> buf_;
  double sum_ = 0.0;
};

}  // namespace

void train_run(arena::Arena& arena, ad::ParamStore& store, const ModelConfig& mc,
               const TrainerConfig& tc, const RngPool& rngs, uint64_t seed,
               const MetricsCallback& on_row) {
  tc.validate();
  Rng env_rng = rngs.stream("env");
  Rng chan_rng = rngs.stream("channel");
  Rng explore_rng = rngs.stream("explore");
  Rng replay_rng = rngs.stream("replay");

  std::deque<EpisodeTrajectory> buffer;
  ad::AdamConfig adam;
  adam.lr = tc.lr;
  store.sync_target();

  int64_t env_steps = 0;
  int64_t episodes = 0;
  SlidingMean steps_mean(100), return_mean(100), comm_mean(100);

  while (env_steps < tc.total_env_steps) {
    const double eps = tc.epsilon_at(env_steps);
    EpisodeTrajectory traj =
        collect_episode(arena, store, mc, eps, env_rng, chan_rng, explore_rng);
    env_steps += traj.length();
    episodes += 1;

    double ep_return = 0.0, comm_sum = 0.0;
    for (const auto& s : traj.steps) {
      ep_return += s.reward;
      for (const auto& a : s.actions) comm_sum += a.comm;
    }
    steps_mean.push(traj.length());
    return_mean.push(ep_return);
    comm_mean.push(comm_sum / (traj.length() * traj.n_agents()));

    buffer.push_back(std::move(traj));
    if (static_cast<int>(buffer.size()) > tc.buffer_capacity) buffer.pop_front();

    double loss_value = 0.0;
    {
      ad::Tape t;
      ad::Binder online(t, store, false);
      std::vector<ad::NodeId> losses;
      for (int b = 0; b < tc.batch_episodes; ++b) {
        const size_t idx = replay_rng.uniform_int(buffer.size());
        losses.push_back(td_loss(t, online, buffer[idx], store, mc, tc.gamma));
      }
      ad::NodeId loss = t.scale(losses.size() == 1 ? losses[0] : t.sum_set(losses),
                                1.0 / losses.size());
      loss_value = t.value(loss).a[0];
      t.backward(loss);
      online.harvest();
    }
    store.clip_grads(tc.grad_clip);
    store.adam_step(adam);
    if (episodes % tc.target_sync_interval == 0) store.sync_target();

    if (on_row) {
      MetricsRow row;
      row.env_steps = env_steps;
      row.episodes = episodes;
      row.seed = seed;
      row.mean_steps_to_termination = steps_mean.mean();
      row.mean_return = return_mean.mean();
      row.mean_comm_prob = comm_mean.mean();
      row.epsilon = eps;
      row.loss = loss_value;
      on_row(row);
    }
  }
}

}  // namespace clover::train
