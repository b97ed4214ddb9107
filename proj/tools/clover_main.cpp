// clover: train and evaluate cooperative agents that learn to communicate
// over a simulated wireless channel.
//
// subcommands: train, eval, analyze, calibrate
// exit codes: 0 ok, 1 configuration error, 2 runtime error

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "clover/harness.hpp"

namespace fs = std::filesystem;
using namespace clover;

namespace {

int cmd_train(const std::string& config_path, int64_t seed_override,
              const std::string& out_dir, const std::string& algo, bool no_comm,
              int slots) {
  harness::ExperimentConfig cfg = harness::ExperimentConfig::parse_file(config_path);
  if (!algo.empty()) cfg.mixer = mix::mixer_kind_from_string(algo);
  if (no_comm) cfg.comm_enabled = false;
  if (slots > 0) cfg.channel.s = slots;
  if (seed_override >= 0) cfg.seeds = {static_cast<uint64_t>(seed_override)};
  cfg.validate();
  harness::run_experiment(cfg, out_dir);
  for (uint64_t s : cfg.seeds)
    std::cout << "seed " << s << ": wrote " << out_dir << "/seed_" << s
              << "/{metrics.csv,checkpoint.txt}\n";
  return 0;
}

int cmd_eval(const std::string& ckpt, int episodes, bool forced_silent,
             const std::string& out_dir, uint64_t seed) {
  ad::ParamStore store;
  harness::ExperimentConfig cfg = harness::load_checkpoint(ckpt, store);
  fs::create_directories(out_dir);
  std::ofstream messages(fs::path(out_dir) / "messages.csv");
  std::ofstream per_episode(fs::path(out_dir) / "eval_report.csv");
  std::ofstream curve(fs::path(out_dir) / "comm_curve.csv");
  harness::EvalReport rep = harness::eval_policy(
      cfg, store, episodes, forced_silent, seed, &messages, &per_episode, &curve);
  std::printf("episodes            %d\n", rep.episodes);
  std::printf("mean_return         %.6g +/- %.6g\n", rep.mean_return, rep.std_return);
  std::printf("mean_steps          %.6g\n", rep.mean_steps);
  std::printf("mean_comm_prob      %.6g\n", rep.mean_comm_prob);
  std::printf("forced_silent       %s\n", forced_silent ? "true" : "false");
  std::cout << "wrote " << out_dir << "/{messages.csv,eval_report.csv,comm_curve.csv}\n";
  return 0;
}

int cmd_analyze(const std::string& messages, const std::string& out_path,
                int per_group) {
  std::ofstream matrix(out_path);
  if (!matrix) throw ContractError("cannot write " + out_path);
  harness::ConsistencyResult res =
      harness::analyze_messages(messages, per_group, matrix);
  std::printf("messages            %d\n", res.cosine.rows);
  std::printf("intra_group_mean    %.6g\n", res.intra_mean);
  std::printf("inter_group_mean    %.6g\n", res.inter_mean);
  if (res.zero_norm_count)
    std::printf("warning: %d zero-norm message(s) compared as 0\n",
                res.zero_norm_count);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_calibrate(const std::string& config_path, const std::string& out_path,
                  int trials) {
  harness::ExperimentConfig cfg = harness::ExperimentConfig::parse_file(config_path);
  std::ofstream csv(out_path);
  if (!csv) throw ContractError("cannot write " + out_path);
  harness::CalibrationResult res = harness::calibrate_channel(cfg, trials, csv);
  std::printf("corner_to_corner_prr %.4f (over %d transmissions)\n", res.corner_prr,
              res.corner_transmissions);
  if (res.in_band)
    std::printf("delivered fraction within [0.40, 0.95]: ok\n");
  else
    std::printf("FLAG: delivered fraction outside [0.40, 0.95]\n");
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cooperative multi-agent Q-learning over a simulated wireless channel"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "runs", algo, ckpt, messages_path;
  std::string analyze_out = "cosine_matrix.csv", calibrate_out = "calibration.csv";
  int64_t seed_override = -1;
  uint64_t eval_seed = 12345;
  int episodes = 100, slots = 0, per_group = 10, trials = 10000;
  bool no_comm = false, forced_silent = false;
  std::string eval_out = "eval_out";

  auto* train = app.add_subcommand("train", "run training, one output dir per seed");
  train->add_option("--config", config_path, "experiment config file")->required();
  train->add_option("--seed", seed_override, "override the config seed list");
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--algo", algo, "mixer: clover, vdn or qmix");
  train->add_flag("--no-comm", no_comm, "disable communication actions");
  train->add_option("--slots", slots, "override p-CSMA slots per epoch");

  auto* eval = app.add_subcommand("eval", "greedy rollouts of a trained checkpoint");
  eval->add_option("--ckpt", ckpt, "checkpoint file")->required();
  eval->add_option("--episodes", episodes, "number of evaluation episodes");
  eval->add_flag("--forced-silent", forced_silent, "pin a_C = 0 during rollout");
  eval->add_option("--out", eval_out, "output directory");
  eval->add_option("--seed", eval_seed, "evaluation rng seed");

  auto* analyze = app.add_subcommand("analyze", "message cosine-similarity analysis");
  analyze->add_option("--messages", messages_path, "messages.csv from eval")->required();
  analyze->add_option("--out", analyze_out, "matrix CSV output path");
  analyze->add_option("--per-group", per_group, "messages sampled per group");

  auto* calibrate = app.add_subcommand("calibrate", "channel PRR sweep");
  calibrate->add_option("--config", config_path, "experiment config file")->required();
  calibrate->add_option("--out", calibrate_out, "sweep CSV output path");
  calibrate->add_option("--trials", trials, "Monte-Carlo rounds per point");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(train))
      return cmd_train(config_path, seed_override, out_dir, algo, no_comm, slots);
    if (app.got_subcommand(eval))
      return cmd_eval(ckpt, episodes, forced_silent, eval_out, eval_seed);
    if (app.got_subcommand(analyze))
      return cmd_analyze(messages_path, analyze_out, per_group);
    if (app.got_subcommand(calibrate))
      return cmd_calibrate(config_path, calibrate_out, trials);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
