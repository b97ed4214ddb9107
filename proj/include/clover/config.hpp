#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "clover/arena.hpp"
#include "clover/channel.hpp"
#include "clover/gridworld.hpp"
#include "clover/mixer.hpp"
#include "clover/trainer.hpp"

namespace clover::harness {

// Flat "key = value" config with '#' comments and dotted namespaces.
// Unknown keys are rejected with the offending key and line number.
struct ExperimentConfig {
  game::GameConfig game;
  chan::ChannelParams channel;
  arena::ArenaConfig arena;
  train::TrainerConfig trainer;
  mix::MixerKind mixer = mix::MixerKind::Clover;
  int mixer_d = 64;
  int mixer_layers = 2;
  int mixer_hyper_hidden = 64;
  int mixer_head_hidden = 32;
  bool comm_enabled = true;
  std::vector<uint64_t> seeds = {1};

  static ExperimentConfig parse_file(const std::string& path);
  static ExperimentConfig parse(std::istream& is, const std::string& source_name);

  void apply(const std::string& key, const std::string& value,
             const std::string& where);
  // canonical dump; parsing it back reproduces the config
  std::string serialize() const;
  void validate() const;
};

}  // namespace clover::harness
