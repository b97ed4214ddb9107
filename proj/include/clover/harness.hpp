#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "clover/config.hpp"

namespace clover::harness {

train::ModelConfig make_model_config(const ExperimentConfig& cfg);
arena::Arena make_arena(const ExperimentConfig& cfg);

// Builds the model parameters for cfg from the "init" stream of seed.
void init_params_for(const ExperimentConfig& cfg, uint64_t seed,
                     ad::ParamStore& store);

// Checkpoint container: resolved config block followed by the parameter
// table (see ParamStore::save).
void save_checkpoint(const std::string& path, const ExperimentConfig& cfg,
                     const ad::ParamStore& store);
ExperimentConfig load_checkpoint(const std::string& path, ad::ParamStore& store);

// One training run per seed under out_dir/seed_<n>/: metrics.csv (fixed
// MetricsRow schema) plus a final checkpoint.
void run_single_seed(const ExperimentConfig& cfg, uint64_t seed,
                     const std::string& out_dir);
void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

struct EvalReport {
  int episodes = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double mean_steps = 0.0;
  double mean_comm_prob = 0.0;
  std::vector<double> returns;           // per episode
  std::vector<int> termination_steps;    // per episode
  std::vector<double> per_step_comm;     // mean a_C by step index
};

// Greedy (eps = 0) rollouts of a frozen policy. When forced_silent is set the
// communication action is pinned to 0. Optionally writes the raw message log
// (episode, step, agent, a_c, event, message vector) and per-episode rows.
EvalReport eval_policy(const ExperimentConfig& cfg, ad::ParamStore& store,
                       int n_episodes, bool forced_silent, uint64_t seed,
                       std::ostream* messages_csv, std::ostream* episodes_csv,
                       std::ostream* comm_curve_csv);

struct ConsistencyResult {
  Mat cosine;  // pairwise cosine matrix over the sampled messages
  double intra_mean = 0.0;
  double inter_mean = 0.0;
  int zero_norm_count = 0;
  std::vector<int> labels;
};

// cosine(u, v) = u.v / (|u||v|); zero-norm vectors compare as 0 and are
// counted in zero_norm_count.
ConsistencyResult speaker_consistency(const std::vector<std::vector<double>>& messages,
                                      const std::vector<int>& labels);

// Reads a message log CSV, groups rows by event tag (tagged vs untagged),
// samples the first per_group messages of each, and reports the matrix.
ConsistencyResult analyze_messages(const std::string& messages_csv_path,
                                   int per_group, std::ostream& matrix_csv);

struct CalibrationResult {
  double corner_prr = 0.0;
  int corner_transmissions = 0;
  bool in_band = false;  // delivered fraction within [0.40, 0.95]
};

// Monte-Carlo PRR sweep over distance and obstacle count. PRR is the decoded
// fraction of transmitted packets (contention drops are excluded from the
// denominator). CSV columns: distance_cells, obstacles, prr, trials.
CalibrationResult calibrate_channel(const ExperimentConfig& cfg, int trials,
                                    std::ostream& csv);

}  // namespace clover::harness
