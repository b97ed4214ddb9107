#include "clover/agentnet.hpp"

namespace clover::net {

void init_agent_params(ad::ParamStore& store, const AgentNetConfig& cfg, Rng& rng) {
  auto linear = [&](const std::string& name, int out, int in) {
    store.create_weight(name + ".w", out, in, rng);
    store.create(name + ".b", out, 1);
  };
  linear("agent.fuse.game", cfg.fuse_width, cfg.obs_game_len);
  linear("agent.fuse.wifi", cfg.fuse_width, cfg.obs_wireless_len);
  linear("agent.fuse.merge", cfg.fuse_width, 2 * cfg.fuse_width);
  linear("agent.enc.l1", cfg.encoder_hidden, cfg.message_dim);
  linear("agent.enc.l2", cfg.encoder_out, cfg.encoder_hidden);
  const int x = cfg.fuse_width + cfg.encoder_out;
  for (const char* g : {"r", "z", "n"}) {
    linear(std::string("agent.gru.") + g + ".x", cfg.gru_hidden, x);
    store.create_weight(std::string("agent.gru.") + g + ".h.w", cfg.gru_hidden,
                        cfg.gru_hidden, rng);
  }
  linear("agent.q", cfg.n_game_actions * 2, cfg.gru_hidden);
  linear("agent.msg.l1", cfg.msg_hidden, cfg.gru_hidden);
  linear("agent.msg.l2", cfg.message_dim, cfg.msg_hidden);
}

namespace {

ad::NodeId affine(ad::Tape& t, ad::Binder& p, const std::string& name, ad::NodeId x) {
  return t.add(t.matmul(p(name + ".w"), x), p(name + ".b"));
}

}  // namespace

ad::NodeId fuse(ad::Tape& t, ad::Binder& p, const AgentNetConfig& cfg,
                ad::NodeId o_game, ad::NodeId o_wireless) {
  if (t.value(o_game).rows != cfg.obs_game_len || t.value(o_game).cols != 1)
    throw ContractError("fuse: game observation length mismatch");
  if (t.value(o_wireless).rows != cfg.obs_wireless_len ||
      t.value(o_wireless).cols != 1)
    throw ContractError("fuse: wireless observation length mismatch");
  ad::NodeId eg = t.elu(affine(t, p, "agent.fuse.game", o_game));
  ad::NodeId ew = t.elu(affine(t, p, "agent.fuse.wifi", o_wireless));
  return t.elu(affine(t, p, "agent.fuse.merge", t.concat_rows({eg, ew})));
}

ad::NodeId encode_inbox(ad::Tape& t, ad::Binder& p, const AgentNetConfig& cfg,
                        const std::vector<ad::NodeId>& messages) {
  if (messages.empty()) return t.constant(Mat(cfg.encoder_out, 1));
  std::vector<ad::NodeId> embedded;
  embedded.reserve(messages.size());
  for (ad::NodeId m : messages) {
    if (t.value(m).rows != cfg.message_dim || t.value(m).cols != 1)
      throw ContractError("encode_inbox: message dimension mismatch");
    embedded.push_back(
        affine(t, p, "agent.enc.l2", t.relu(affine(t, p, "agent.enc.l1", m))));
  }
  return embedded.size() == 1 ? embedded[0] : t.sum_set(embedded);
}

QForwardResult q_forward(ad::Tape& t, ad::Binder& p, const AgentNetConfig& cfg,
                         ad::NodeId e, ad::NodeId phi, ad::NodeId h_prev) {
  if (t.value(h_prev).rows != cfg.gru_hidden || t.value(h_prev).cols != 1)
    throw ContractError("q_forward: hidden state width mismatch");
  ad::NodeId x = t.concat_rows({e, phi});
  if (t.value(x).rows != cfg.fuse_width + cfg.encoder_out)
    throw ContractError("q_forward: input width mismatch");

  auto gate = [&](const char* name) {
    return t.sigmoid(t.add(affine(t, p, std::string("agent.gru.") + name + ".x", x),
                           t.matmul(p(std::string("agent.gru.") + name + ".h.w"),
                                    h_prev)));
  };
  ad::NodeId r = gate("r");
  ad::NodeId z = gate("z");
  ad::NodeId n = t.tanh(
      t.add(affine(t, p, "agent.gru.n.x", x),
            t.matmul(p("agent.gru.n.h.w"), t.mul(r, h_prev))));
  ad::NodeId ones = t.constant(Mat::full(cfg.gru_hidden, 1, 1.0));
  ad::NodeId h = t.add(t.mul(z, h_prev), t.mul(t.sub(ones, z), n));

  ad::NodeId q = t.reshape(affine(t, p, "agent.q", h), cfg.n_game_actions, 2);
  ad::NodeId m = t.tanh(
      affine(t, p, "agent.msg.l2", t.elu(affine(t, p, "agent.msg.l1", h))));
  return {h, q, m};
}

std::pair<int, int> argmax_entry(const Mat& q) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(q.size()); ++i)
    if (q.a[i] > q.a[best]) best = i;
  return {best / q.cols, best % q.cols};
}

arena::AugmentedAction select_action(const Mat& q, double epsilon, Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw ContractError("select_action: epsilon out of range");
  if (rng.uniform() < epsilon) {
    const int idx = static_cast<int>(rng.uniform_int(q.size()));
    return {idx / q.cols, idx % q.cols};
  }
  auto [at, ac] = argmax_entry(q);
  return {at, ac};
}

}  // namespace clover::net
