#include "clover/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace clover::harness {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int to_int(const std::string& v, const std::string& where) {
  try {
    size_t pos = 0;
    int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError(where + ": expected integer, got '" + v + "'");
  }
}

int64_t to_int64(const std::string& v, const std::string& where) {
  try {
    size_t pos = 0;
    int64_t x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError(where + ": expected integer, got '" + v + "'");
  }
}

double to_double(const std::string& v, const std::string& where) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    throw ConfigError(where + ": expected number, got '" + v + "'");
  }
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where + ": expected boolean, got '" + v + "'");
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void ExperimentConfig::apply(const std::string& key, const std::string& value,
                             const std::string& where) {
  if (key == "game") {
    if (value == "pp")
      game.kind = game::GameKind::PP;
    else if (value == "lj")
      game.kind = game::GameKind::LJ;
    else
      throw ConfigError(where + ": game must be pp or lj, got '" + value + "'");
  } else if (key == "game.grid") game.grid = to_int(value, where);
  else if (key == "game.agents") game.n_agents = to_int(value, where);
  else if (key == "game.obstacles") game.n_obstacles = to_int(value, where);
  else if (key == "game.barrier_len") game.barrier_len = to_int(value, where);
  else if (key == "game.trees") game.n_trees = to_int(value, where);
  else if (key == "game.k_choppers") game.k_choppers = to_int(value, where);
  else if (key == "game.max_steps") game.max_steps = to_int(value, where);
  else if (key == "game.obs_radius") game.obs_radius = to_int(value, where);
  else if (key == "channel.p_t") channel.p_t = to_double(value, where);
  else if (key == "channel.k_ref") channel.k_ref = to_double(value, where);
  else if (key == "channel.eta") channel.eta = to_double(value, where);
  else if (key == "channel.d0") channel.d0 = to_double(value, where);
  else if (key == "channel.sigma_psi") channel.sigma_psi = to_double(value, where);
  else if (key == "channel.delta0") channel.delta0 = to_double(value, where);
  else if (key == "channel.n0") channel.n0 = to_double(value, where);
  else if (key == "channel.theta_f") channel.theta_f = to_double(value, where);
  else if (key == "channel.theta_r") channel.theta_r = to_double(value, where);
  else if (key == "channel.p") channel.p = to_double(value, where);
  else if (key == "channel.w") channel.w = to_int(value, where);
  else if (key == "channel.slots") channel.s = to_int(value, where);
  else if (key == "channel.cell_size") channel.cell_size = to_double(value, where);
  else if (key == "message_dim") arena.message_dim = to_int(value, where);
  else if (key == "rss_floor") arena.rss_floor = to_double(value, where);
  else if (key == "rss_ceil") arena.rss_ceil = to_double(value, where);
  else if (key == "trainer.gamma") trainer.gamma = to_double(value, where);
  else if (key == "trainer.lr") trainer.lr = to_double(value, where);
  else if (key == "trainer.batch_episodes") trainer.batch_episodes = to_int(value, where);
  else if (key == "trainer.buffer_capacity") trainer.buffer_capacity = to_int(value, where);
  else if (key == "trainer.target_sync_interval") trainer.target_sync_interval = to_int(value, where);
  else if (key == "trainer.eps_start") trainer.eps_start = to_double(value, where);
  else if (key == "trainer.eps_end") trainer.eps_end = to_double(value, where);
  else if (key == "trainer.eps_decay_steps") trainer.eps_decay_steps = to_int64(value, where);
  else if (key == "trainer.total_env_steps") trainer.total_env_steps = to_int64(value, where);
  else if (key == "trainer.grad_clip") trainer.grad_clip = to_double(value, where);
  else if (key == "mixer") mixer = mix::mixer_kind_from_string(value);
  else if (key == "mixer.d") mixer_d = to_int(value, where);
  else if (key == "mixer.layers") mixer_layers = to_int(value, where);
  else if (key == "mixer.hyper_hidden") mixer_hyper_hidden = to_int(value, where);
  else if (key == "mixer.head_hidden") mixer_head_hidden = to_int(value, where);
  else if (key == "comm_enabled") comm_enabled = to_bool(value, where);
  else if (key == "seeds") {
    seeds.clear();
    std::stringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      seeds.push_back(static_cast<uint64_t>(to_int64(tok, where)));
    }
    if (seeds.empty()) throw ConfigError(where + ": seeds list is empty");
  } else {
    throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(std::istream& is,
                                         const std::string& source_name) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  return parse(f, path);
}

void ExperimentConfig::validate() const {
  game.validate();
  channel.validate();
  trainer.validate();
  if (arena.message_dim < 1) throw ConfigError("message_dim must be >= 1");
  if (arena.rss_ceil <= arena.rss_floor)
    throw ConfigError("rss_ceil must exceed rss_floor");
  if (mixer_d < 1 || mixer_layers < 1 || mixer_hyper_hidden < 1 ||
      mixer_head_hidden < 1)
    throw ConfigError("mixer dimensions must be >= 1");
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream os;
  os << "game = " << (game.kind == game::GameKind::PP ? "pp" : "lj") << "\n";
  os << "game.grid = " << game.grid << "\n";
  os << "game.agents = " << game.n_agents << "\n";
  os << "game.obstacles = " << game.n_obstacles << "\n";
  os << "game.barrier_len = " << game.barrier_len << "\n";
  os << "game.trees = " << game.n_trees << "\n";
  os << "game.k_choppers = " << game.k_choppers << "\n";
  os << "game.max_steps = " << game.max_steps << "\n";
  os << "game.obs_radius = " << game.obs_radius << "\n";
  os << "channel.p_t = " << fmt(channel.p_t) << "\n";
  os << "channel.k_ref = " << fmt(channel.k_ref) << "\n";
  os << "channel.eta = " << fmt(channel.eta) << "\n";
  os << "channel.d0 = " << fmt(channel.d0) << "\n";
  os << "channel.sigma_psi = " << fmt(channel.sigma_psi) << "\n";
  os << "channel.delta0 = " << fmt(channel.delta0) << "\n";
  os << "channel.n0 = " << fmt(channel.n0) << "\n";
  os << "channel.theta_f = " << fmt(channel.theta_f) << "\n";
  os << "channel.theta_r = " << fmt(channel.theta_r) << "\n";
  os << "channel.p = " << fmt(channel.p) << "\n";
  os << "channel.w = " << channel.w << "\n";
  os << "channel.slots = " << channel.s << "\n";
  os << "channel.cell_size = " << fmt(channel.cell_size) << "\n";
  os << "message_dim = " << arena.message_dim << "\n";
  os << "rss_floor = " << fmt(arena.rss_floor) << "\n";
  os << "rss_ceil = " << fmt(arena.rss_ceil) << "\n";
  os << "trainer.gamma = " << fmt(trainer.gamma) << "\n";
  os << "trainer.lr = " << fmt(trainer.lr) << "\n";
  os << "trainer.batch_episodes = " << trainer.batch_episodes << "\n";
  os << "trainer.buffer_capacity = " << trainer.buffer_capacity << "\n";
  os << "trainer.target_sync_interval = " << trainer.target_sync_interval << "\n";
  os << "trainer.eps_start = " << fmt(trainer.eps_start) << "\n";
  os << "trainer.eps_end = " << fmt(trainer.eps_end) << "\n";
  os << "trainer.eps_decay_steps = " << trainer.eps_decay_steps << "\n";
  os << "trainer.total_env_steps = " << trainer.total_env_steps << "\n";
  os << "trainer.grad_clip = " << fmt(trainer.grad_clip) << "\n";
  os << "mixer = " << mix::to_string(mixer) << "\n";
  os << "mixer.d = " << mixer_d << "\n";
  os << "mixer.layers = " << mixer_layers << "\n";
  os << "mixer.hyper_hidden = " << mixer_hyper_hidden << "\n";
  os << "mixer.head_hidden = " << mixer_head_hidden << "\n";
  os << "comm_enabled = " << (comm_enabled ? "true" : "false") << "\n";
  os << "seeds = ";
  for (size_t i = 0; i < seeds.size(); ++i)
    os << seeds[i] << (i + 1 < seeds.size() ? "," : "");
  os << "\n";
  return os.str();
}

}  // namespace clover::harness
