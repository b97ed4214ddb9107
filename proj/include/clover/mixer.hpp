#pragma once

#include <string>
#include <utility>
#include <vector>

#include "clover/arena.hpp"
#include "clover/params.hpp"
#include "clover/tape.hpp"

namespace clover::mix {

enum class MixerKind { Clover, Vdn, Qmix };

MixerKind mixer_kind_from_string(const std::string& s);
std::string to_string(MixerKind k);

struct MixerConfig {
  int cond_dim = 0;    // width of s_hat_i = s || o_i (clover hypernets)
  int state_dim = 0;   // width of s (qmix hypernets)
  int n_agents = 0;
  int d = 64;          // GNN width
  int layers = 2;      // message-passing rounds
  int hyper_hidden = 64;
  int head_hidden = 32;  // second-stage MLP hidden width; also qmix mixing width
};

void init_clover_params(ad::ParamStore& store, const MixerConfig& cfg, Rng& rng);
void init_qmix_params(ad::ParamStore& store, const MixerConfig& cfg, Rng& rng);

// Per-agent weight generation for one GNN layer (1-based): W_i = abs(psi_A(s_hat)),
// xi_i = abs(psi_B(s_hat)). Layer 1 emits W as d x 1, deeper layers d x d.
std::pair<ad::NodeId, ad::NodeId> pehypernet(ad::Tape& tape, ad::Binder& params,
                                             const MixerConfig& cfg,
                                             ad::NodeId s_hat, int layer);

// z_i = ELU(W_i z_i + xi_i * mean of in-neighbor z); the aggregation term
// vanishes for isolated nodes. Scalar inputs (layer 1) scale xi by the mean;
// vector inputs use the elementwise product.
std::vector<ad::NodeId> gnn_layer(ad::Tape& tape,
                                  const std::vector<ad::NodeId>& z_prev,
                                  const arena::CommGraph& graph,
                                  const std::vector<std::pair<ad::NodeId, ad::NodeId>>& weights);

// Graph-conditioned mixer: L hypernet-weighted GNN layers over the realized
// communication graph, sum pooling, and a non-negative two-layer readout.
ad::NodeId mix_clover(ad::Tape& tape, ad::Binder& params, const MixerConfig& cfg,
                      const std::vector<ad::NodeId>& q,
                      const std::vector<ad::NodeId>& s_hat,
                      const arena::CommGraph& graph);

ad::NodeId mix_vdn(ad::Tape& tape, const std::vector<ad::NodeId>& q);

// Monotone hypernetwork mixer conditioned on the flat global state only.
ad::NodeId mix_qmix(ad::Tape& tape, ad::Binder& params, const MixerConfig& cfg,
                    const std::vector<ad::NodeId>& q, ad::NodeId s);

}  // namespace clover::mix
