#pragma once

#include <utility>
#include <vector>

#include "clover/arena.hpp"
#include "clover/params.hpp"
#include "clover/rng.hpp"
#include "clover/tape.hpp"

namespace clover::net {

// Shared per-agent network: observation fuser, multiset message encoder,
// GRU core with Q and message heads.
struct AgentNetConfig {
  int obs_game_len = 0;
  int obs_wireless_len = 0;
  int n_game_actions = game::kGameActions;
  int message_dim = 8;
  int fuse_width = 128;      // branch and merge output width
  int encoder_hidden = 128;
  int encoder_out = 128;
  int gru_hidden = 128;
  int msg_hidden = 128;
};

// Creates all "agent.*" parameters (shared across agents).
void init_agent_params(ad::ParamStore& store, const AgentNetConfig& cfg, Rng& rng);

// e = FC(FC(o_T) || FC(o_C)), each FC linear + ELU.
ad::NodeId fuse(ad::Tape& tape, ad::Binder& params, const AgentNetConfig& cfg,
                ad::NodeId o_game, ad::NodeId o_wireless);

// phi = sum over inbox of MLP(m); empty inbox gives the zero vector.
// Callers pass messages in canonical (sender-ascending) order so the sum
// is bit-stable under permutation of the multiset.
ad::NodeId encode_inbox(ad::Tape& tape, ad::Binder& params, const AgentNetConfig& cfg,
                        const std::vector<ad::NodeId>& messages);

struct QForwardResult {
  ad::NodeId h;  // gru_hidden x 1
  ad::NodeId q;  // n_game_actions x 2
  ad::NodeId m;  // message_dim x 1, tanh range
};

QForwardResult q_forward(ad::Tape& tape, ad::Binder& params, const AgentNetConfig& cfg,
                         ad::NodeId e, ad::NodeId phi, ad::NodeId h_prev);

// argmax over all entries, ties to the lowest flat (row-major) index
std::pair<int, int> argmax_entry(const Mat& q);

arena::AugmentedAction select_action(const Mat& q, double epsilon, Rng& rng);

}  // namespace clover::net
