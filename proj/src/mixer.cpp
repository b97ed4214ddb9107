#include "clover/mixer.hpp"

namespace clover::mix {

MixerKind mixer_kind_from_string(const std::string& s) {
  if (s == "clover") return MixerKind::Clover;
  if (s == "vdn") return MixerKind::Vdn;
  if (s == "qmix") return MixerKind::Qmix;
  throw ConfigError("unknown mixer: " + s);
}

std::string to_string(MixerKind k) {
  switch (k) {
    case MixerKind::Clover: return "clover";
    case MixerKind::Vdn: return "vdn";
    case MixerKind::Qmix: return "qmix";
  }
  return "?";
}

namespace {

void init_linear(ad::ParamStore& store, const std::string& name, int out, int in,
                 Rng& rng) {
  store.create_weight(name + ".w", out, in, rng);
  store.create(name + ".b", out, 1);
}

ad::NodeId affine(ad::Tape& t, ad::Binder& p, const std::string& name, ad::NodeId x) {
  return t.add(t.matmul(p(name + ".w"), x), p(name + ".b"));
}

}  // namespace

void init_clover_params(ad::ParamStore& store, const MixerConfig& cfg, Rng& rng) {
  for (int l = 1; l <= cfg.layers; ++l) {
    const int out_a = (l == 1 ? cfg.d : cfg.d * cfg.d);
    const std::string la = "mix.hyperA.l" + std::to_string(l);
    const std::string lb = "mix.hyperB.l" + std::to_string(l);
    init_linear(store, la + ".l1", cfg.hyper_hidden, cfg.cond_dim, rng);
    init_linear(store, la + ".l2", out_a, cfg.hyper_hidden, rng);
    init_linear(store, lb + ".l1", cfg.hyper_hidden, cfg.cond_dim, rng);
    init_linear(store, lb + ".l2", cfg.d, cfg.hyper_hidden, rng);
  }
  init_linear(store, "mix.head.l1", cfg.head_hidden, cfg.d, rng);
  init_linear(store, "mix.head.l2", 1, cfg.head_hidden, rng);
}

void init_qmix_params(ad::ParamStore& store, const MixerConfig& cfg, Rng& rng) {
  const int h = cfg.head_hidden;
  init_linear(store, "qmix.w1", h * cfg.n_agents, cfg.state_dim, rng);
  init_linear(store, "qmix.b1", h, cfg.state_dim, rng);
  init_linear(store, "qmix.w2", h, cfg.state_dim, rng);
  init_linear(store, "qmix.b2.l1", h, cfg.state_dim, rng);
  init_linear(store, "qmix.b2.l2", 1, h, rng);
}

std::pair<ad::NodeId, ad::NodeId> pehypernet(ad::Tape& t, ad::Binder& p,
                                             const MixerConfig& cfg,
                                             ad::NodeId s_hat, int layer) {
  if (t.value(s_hat).rows != cfg.cond_dim || t.value(s_hat).cols != 1)
    throw ContractError("pehypernet: conditioning input width mismatch");
  const std::string la = "mix.hyperA.l" + std::to_string(layer);
  const std::string lb = "mix.hyperB.l" + std::to_string(layer);
  ad::NodeId wa =
      t.abs(affine(t, p, la + ".l2", t.relu(affine(t, p, la + ".l1", s_hat))));
  if (layer > 1) wa = t.reshape(wa, cfg.d, cfg.d);
  ad::NodeId xb =
      t.abs(affine(t, p, lb + ".l2", t.relu(affine(t, p, lb + ".l1", s_hat))));
  return {wa, xb};
}

std::vector<ad::NodeId> gnn_layer(
    ad::Tape& t, const std::vector<ad::NodeId>& z_prev,
    const arena::CommGraph& graph,
    const std::vector<std::pair<ad::NodeId, ad::NodeId>>& weights) {
  const int n = static_cast<int>(z_prev.size());
  if (graph.n != n || static_cast<int>(weights.size()) != n)
    throw ContractError("gnn_layer: size mismatch");
  std::vector<ad::NodeId> z(n);
  for (int i = 0; i < n; ++i) {
    ad::NodeId self = t.matmul(weights[i].first, z_prev[i]);
    const auto& nb = graph.in_neighbors[i];
    if (nb.empty()) {
      z[i] = t.elu(self);
      continue;
    }
    std::vector<ad::NodeId> zs;
    zs.reserve(nb.size());
    for (int j : nb) zs.push_back(z_prev[j]);
    ad::NodeId mean = t.mean_set(zs);
    ad::NodeId agg = t.value(mean).rows == 1 ? t.matmul(weights[i].second, mean)
                                             : t.mul(weights[i].second, mean);
    z[i] = t.elu(t.add(self, agg));
  }
  return z;
}

ad::NodeId mix_clover(ad::Tape& t, ad::Binder& p, const MixerConfig& cfg,
                      const std::vector<ad::NodeId>& q,
                      const std::vector<ad::NodeId>& s_hat,
                      const arena::CommGraph& graph) {
  const int n = static_cast<int>(q.size());
  if (n == 0 || graph.n != n || static_cast<int>(s_hat.size()) != n)
    throw ContractError("mix_clover: input sizes inconsistent");
  std::vector<ad::NodeId> z(q);
  for (int l = 1; l <= cfg.layers; ++l) {
    std::vector<std::pair<ad::NodeId, ad::NodeId>> w;
    w.reserve(n);
    for (int i = 0; i < n; ++i) w.push_back(pehypernet(t, p, cfg, s_hat[i], l));
    z = gnn_layer(t, z, graph, w);
  }
  ad::NodeId v = n == 1 ? z[0] : t.sum_set(z);
  ad::NodeId hidden = t.elu(
      t.add(t.matmul(t.abs(p("mix.head.l1.w")), v), p("mix.head.l1.b")));
  return t.add(t.matmul(t.abs(p("mix.head.l2.w")), hidden), p("mix.head.l2.b"));
}

ad::NodeId mix_vdn(ad::Tape& t, const std::vector<ad::NodeId>& q) {
  if (q.empty()) throw ContractError("mix_vdn: empty input");
  return q.size() == 1 ? q[0] : t.sum_set(q);
}

ad::NodeId mix_qmix(ad::Tape& t, ad::Binder& p, const MixerConfig& cfg,
                    const std::vector<ad::NodeId>& q, ad::NodeId s) {
  const int n = static_cast<int>(q.size());
  if (n != cfg.n_agents) throw ContractError("mix_qmix: agent count mismatch");
  if (t.value(s).rows != cfg.state_dim || t.value(s).cols != 1)
    throw ContractError("mix_qmix: state width mismatch");
  const int h = cfg.head_hidden;
  ad::NodeId qvec = n == 1 ? q[0] : t.concat_rows(q);
  ad::NodeId w1 = t.reshape(t.abs(affine(t, p, "qmix.w1", s)), h, n);
  ad::NodeId b1 = affine(t, p, "qmix.b1", s);
  ad::NodeId w2 = t.reshape(t.abs(affine(t, p, "qmix.w2", s)), 1, h);
  ad::NodeId b2 =
      affine(t, p, "qmix.b2.l2", t.elu(affine(t, p, "qmix.b2.l1", s)));
  ad::NodeId hidden = t.elu(t.add(t.matmul(w1, qvec), b1));
  return t.add(t.matmul(w2, hidden), b2);
}

}  // namespace clover::mix
