#include "clover/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace clover::harness {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.8g", x);
  return buf;
}

}  // namespace

train::ModelConfig make_model_config(const ExperimentConfig& cfg) {
  train::ModelConfig mc;
  mc.agent.obs_game_len = cfg.game.obs_len();
  mc.agent.obs_wireless_len = cfg.game.n_agents;
  mc.agent.n_game_actions = game::kGameActions;
  mc.agent.message_dim = cfg.arena.message_dim;
  mc.mixer.cond_dim = cfg.game.state_len() + cfg.game.obs_len() + cfg.game.n_agents;
  mc.mixer.state_dim = cfg.game.state_len();
  mc.mixer.n_agents = cfg.game.n_agents;
  mc.mixer.d = cfg.mixer_d;
  mc.mixer.layers = cfg.mixer_layers;
  mc.mixer.hyper_hidden = cfg.mixer_hyper_hidden;
  mc.mixer.head_hidden = cfg.mixer_head_hidden;
  mc.kind = cfg.mixer;
  mc.comm_enabled = cfg.comm_enabled;
  return mc;
}

arena::Arena make_arena(const ExperimentConfig& cfg) {
  return arena::Arena(cfg.game, cfg.channel, cfg.arena);
}

void init_params_for(const ExperimentConfig& cfg, uint64_t seed,
                     ad::ParamStore& store) {
  RngPool pool{seed};
  Rng init_rng = pool.stream("init");
  train::init_model_params(store, make_model_config(cfg), init_rng);
}

void save_checkpoint(const std::string& path, const ExperimentConfig& cfg,
                     const ad::ParamStore& store) {
  std::ofstream f(path);
  if (!f) throw ContractError("cannot write checkpoint: " + path);
  f << "cloverlab-checkpoint v1\n";
  f << "config_begin\n" << cfg.serialize() << "config_end\n";
  store.save(f);
}

ExperimentConfig load_checkpoint(const std::string& path, ad::ParamStore& store) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "cloverlab-checkpoint v1")
    throw ConfigError("checkpoint: bad magic in " + path);
  if (!std::getline(f, line) || line != "config_begin")
    throw ConfigError("checkpoint: missing config block in " + path);
  std::stringstream cfg_text;
  while (std::getline(f, line) && line != "config_end") cfg_text << line << "\n";
  if (line != "config_end")
    throw ConfigError("checkpoint: unterminated config block in " + path);
  ExperimentConfig cfg = ExperimentConfig::parse(cfg_text, path + "(config)");
  store.load(f);
  return cfg;
}

namespace {

void write_metrics_header(std::ostream& os) {
  os << "env_steps,episodes,seed,mean_steps_to_termination,mean_return,"
        "mean_comm_prob,epsilon,loss\n";
}

void write_metrics_row(std::ostream& os, const train::MetricsRow& r) {
  os << r.env_steps << ',' << r.episodes << ',' << r.seed << ','
     << fmt(r.mean_steps_to_termination) << ',' << fmt(r.mean_return) << ','
     << fmt(r.mean_comm_prob) << ',' << fmt(r.epsilon) << ',' << fmt(r.loss)
     << '\n';
}

}  // namespace

void run_single_seed(const ExperimentConfig& cfg, uint64_t seed,
                     const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(out_dir) / ("seed_" + std::to_string(seed));
  fs::create_directories(dir);

  arena::Arena arena = make_arena(cfg);
  ad::ParamStore store;
  init_params_for(cfg, seed, store);
  train::ModelConfig mc = make_model_config(cfg);

  std::ofstream csv(dir / "metrics.csv");
  if (!csv) throw ContractError("cannot write metrics.csv under " + dir.string());
  write_metrics_header(csv);

  RngPool pool{seed};
  train::train_run(arena, store, mc, cfg.trainer, pool, seed,
                   [&](const train::MetricsRow& row) { write_metrics_row(csv, row); });
  csv.close();
  save_checkpoint((dir / "checkpoint.txt").string(), cfg, store);
}

void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  for (uint64_t seed : cfg.seeds) run_single_seed(cfg, seed, out_dir);
}

EvalReport eval_policy(const ExperimentConfig& cfg, ad::ParamStore& store,
                       int n_episodes, bool forced_silent, uint64_t seed,
                       std::ostream* messages_csv, std::ostream* episodes_csv,
                       std::ostream* comm_curve_csv) {
  if (n_episodes < 1) throw ConfigError("eval: episodes must be >= 1");
  train::ModelConfig mc = make_model_config(cfg);
  if (forced_silent) mc.comm_enabled = false;

  RngPool pool{seed};
  Rng env_rng = pool.stream("eval-env");
  Rng chan_rng = pool.stream("eval-channel");
  Rng explore_rng = pool.stream("eval-explore");

  arena::Arena arena = make_arena(cfg);
  const char* event_name =
      cfg.game.kind == game::GameKind::PP ? "prey_observed" : "tree_observed";

  if (messages_csv) {
    *messages_csv << "episode,step,agent,a_c,event";
    for (int k = 0; k < cfg.arena.message_dim; ++k) *messages_csv << ",m" << k;
    *messages_csv << "\n";
  }
  if (episodes_csv) *episodes_csv << "episode,steps,return,mean_comm\n";

  EvalReport rep;
  rep.episodes = n_episodes;
  std::vector<double> comm_sum_by_step;
  std::vector<int> count_by_step;

  for (int ep = 0; ep < n_episodes; ++ep) {
    train::EpisodeTrajectory traj = train::collect_episode(
        arena, store, mc, 0.0, env_rng, chan_rng, explore_rng);
    double ret = 0.0, comm = 0.0;
    for (size_t s = 0; s < traj.steps.size(); ++s) {
      const auto& rec = traj.steps[s];
      ret += rec.reward;
      if (comm_sum_by_step.size() <= s) {
        comm_sum_by_step.push_back(0.0);
        count_by_step.push_back(0);
      }
      count_by_step[s] += 1;
      double step_comm = 0.0;
      for (const auto& a : rec.actions) step_comm += a.comm;
      step_comm /= rec.actions.size();
      comm_sum_by_step[s] += step_comm;
      comm += step_comm;
      if (messages_csv) {
        for (size_t i = 0; i < rec.actions.size(); ++i) {
          *messages_csv << ep << ',' << s << ',' << i << ','
                        << rec.actions[i].comm << ','
                        << (rec.target_visible[i] ? event_name : "none");
          for (double v : rec.sent_messages[i]) *messages_csv << ',' << fmt(v);
          *messages_csv << "\n";
        }
      }
    }
    comm /= traj.length();
    rep.returns.push_back(ret);
    rep.termination_steps.push_back(traj.length());
    if (episodes_csv)
      *episodes_csv << ep << ',' << traj.length() << ',' << fmt(ret) << ','
                    << fmt(comm) << "\n";
  }

  double sum = 0.0, sum2 = 0.0, steps_sum = 0.0;
  for (int e = 0; e < n_episodes; ++e) {
    sum += rep.returns[e];
    sum2 += rep.returns[e] * rep.returns[e];
    steps_sum += rep.termination_steps[e];
  }
  rep.mean_return = sum / n_episodes;
  rep.std_return = n_episodes > 1
                       ? std::sqrt(std::max(0.0, (sum2 - sum * sum / n_episodes) /
                                                     (n_episodes - 1)))
                       : 0.0;
  rep.mean_steps = steps_sum / n_episodes;
  double comm_total = 0.0;
  int comm_count = 0;
  for (size_t s = 0; s < comm_sum_by_step.size(); ++s) {
    rep.per_step_comm.push_back(comm_sum_by_step[s] / count_by_step[s]);
    comm_total += comm_sum_by_step[s];
    comm_count += count_by_step[s];
  }
  rep.mean_comm_prob = comm_count ? comm_total / comm_count : 0.0;
  if (comm_curve_csv) {
    *comm_curve_csv << "step,mean_comm,episodes_alive\n";
    for (size_t s = 0; s < rep.per_step_comm.size(); ++s)
      *comm_curve_csv << s << ',' << fmt(rep.per_step_comm[s]) << ','
                      << count_by_step[s] << "\n";
  }
  return rep;
}

ConsistencyResult speaker_consistency(
    const std::vector<std::vector<double>>& messages,
    const std::vector<int>& labels) {
  const int n = static_cast<int>(messages.size());
  if (n != static_cast<int>(labels.size()))
    throw ContractError("speaker_consistency: label count mismatch");
  if (n < 2) throw ContractError("speaker_consistency: need at least 2 messages");

  ConsistencyResult out;
  out.labels = labels;
  out.cosine = Mat(n, n);
  std::vector<double> norms(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (double v : messages[i]) s += v * v;
    norms[i] = std::sqrt(s);
    if (norms[i] == 0.0) out.zero_norm_count += 1;
  }
  double intra = 0.0, inter = 0.0;
  int n_intra = 0, n_inter = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double c = 0.0;
      if (i == j) {
        c = norms[i] == 0.0 ? 0.0 : 1.0;
      } else if (norms[i] > 0.0 && norms[j] > 0.0) {
        double dot = 0.0;
        for (size_t k = 0; k < messages[i].size(); ++k)
          dot += messages[i][k] * messages[j][k];
        c = dot / (norms[i] * norms[j]);
      }
      out.cosine.at(i, j) = c;
      if (i < j) {
        if (labels[i] == labels[j]) {
          intra += c;
          ++n_intra;
        } else {
          inter += c;
          ++n_inter;
        }
      }
    }
  out.intra_mean = n_intra ? intra / n_intra : 0.0;
  out.inter_mean = n_inter ? inter / n_inter : 0.0;
  return out;
}

ConsistencyResult analyze_messages(const std::string& messages_csv_path,
                                   int per_group, std::ostream& matrix_csv) {
  std::ifstream f(messages_csv_path);
  if (!f) throw ConfigError("cannot open message log: " + messages_csv_path);
  std::string line;
  if (!std::getline(f, line))
    throw ConfigError("message log is empty: " + messages_csv_path);

  std::vector<std::vector<double>> tagged, untagged;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cells;
    while (std::getline(ss, tok, ',')) cells.push_back(tok);
    if (cells.size() < 6) continue;
    std::vector<double> m;
    for (size_t k = 5; k < cells.size(); ++k) m.push_back(std::stod(cells[k]));
    auto& bucket = cells[4] == "none" ? untagged : tagged;
    if (static_cast<int>(bucket.size()) < per_group) bucket.push_back(m);
  }
  if (static_cast<int>(tagged.size()) < 2 || static_cast<int>(untagged.size()) < 2)
    throw ContractError("analyze: need at least 2 messages per group");

  std::vector<std::vector<double>> messages;
  std::vector<int> labels;
  for (auto& m : tagged) {
    messages.push_back(std::move(m));
    labels.push_back(1);
  }
  for (auto& m : untagged) {
    messages.push_back(std::move(m));
    labels.push_back(0);
  }
  ConsistencyResult res = speaker_consistency(messages, labels);
  for (int i = 0; i < res.cosine.rows; ++i) {
    for (int j = 0; j < res.cosine.cols; ++j)
      matrix_csv << fmt(res.cosine.at(i, j)) << (j + 1 < res.cosine.cols ? "," : "");
    matrix_csv << "\n";
  }
  return res;
}

CalibrationResult calibrate_channel(const ExperimentConfig& cfg, int trials,
                                    std::ostream& csv) {
  const chan::ChannelParams& cp = cfg.channel;
  RngPool pool{cfg.seeds.empty() ? 0 : cfg.seeds[0]};
  Rng rng = pool.stream("calibrate");

  csv << "distance_cells,obstacles,prr,trials\n";
  auto run_point = [&](chan::GridPos a, chan::GridPos b,
                       const chan::ObstacleGrid& grid) {
    int transmitted = 0, decoded = 0;
    std::vector<chan::GridPos> pos = {a, b};
    for (int t = 0; t < trials; ++t) {
      auto rep = chan::deliver_round({{0, {1.0}}}, pos, grid, cp, rng);
      if (rep.sender_outcome[0].transmitted) {
        ++transmitted;
        if (!rep.inbox[1].empty()) ++decoded;
      }
    }
    return std::pair<int, int>(decoded, transmitted);
  };

  const int g = cfg.game.grid;
  for (int obstacles = 0; obstacles <= 2; ++obstacles) {
    for (int d = 1; d < g; ++d) {
      if (d - 1 < obstacles) continue;  // not enough interior cells
      chan::ObstacleGrid grid(d + 1, 1);
      for (int k = 1; k <= obstacles; ++k) grid.set(k, 0, true);
      auto [decoded, transmitted] = run_point({0, 0}, {d, 0}, grid);
      const double prr = transmitted ? static_cast<double>(decoded) / transmitted : 0.0;
      csv << d << ',' << obstacles << ',' << fmt(prr) << ',' << transmitted << "\n";
    }
  }

  CalibrationResult out;
  chan::ObstacleGrid empty(g, g);
  auto [decoded, transmitted] = run_point({0, 0}, {g - 1, g - 1}, empty);
  out.corner_prr = transmitted ? static_cast<double>(decoded) / transmitted : 0.0;
  out.corner_transmissions = transmitted;
  out.in_band = out.corner_prr >= 0.40 && out.corner_prr <= 0.95;
  return out;
}

}  // namespace clover::harness
