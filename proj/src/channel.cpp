#include "clover/channel.hpp"

#include <algorithm>

namespace clover::chan {

void ChannelParams::validate() const {
  if (d0 <= 0.0) throw ConfigError("channel: d0 must be > 0");
  if (p <= 0.0 || p > 1.0) throw ConfigError("channel: p must be in (0, 1]");
  if (w < 1) throw ConfigError("channel: w must be >= 1");
  if (s < 1) throw ConfigError("channel: s must be >= 1");
  if (sigma_psi < 0.0) throw ConfigError("channel: sigma_psi must be >= 0");
  if (delta0 < 0.0) throw ConfigError("channel: delta0 must be >= 0");
  if (theta_f <= n0) throw ConfigError("channel: theta_f must exceed the noise floor");
  if (cell_size <= 0.0) throw ConfigError("channel: cell_size must be > 0");
}

namespace {

// Open-segment vs closed unit square overlap (slab test).
bool segment_hits_box(double x0, double y0, double x1, double y1, double bx,
                      double by) {
  double tmin = 0.0, tmax = 1.0;
  const double p0[2] = {x0, y0};
  const double d[2] = {x1 - x0, y1 - y0};
  const double lo[2] = {bx, by};
  const double hi[2] = {bx + 1.0, by + 1.0};
  for (int k = 0; k < 2; ++k) {
    if (std::fabs(d[k]) < 1e-12) {
      if (p0[k] < lo[k] || p0[k] > hi[k]) return false;
    } else {
      double t1 = (lo[k] - p0[k]) / d[k];
      double t2 = (hi[k] - p0[k]) / d[k];
      if (t1 > t2) std::swap(t1, t2);
      tmin = std::max(tmin, t1);
      tmax = std::min(tmax, t2);
      if (tmin > tmax) return false;
    }
  }
  return tmax > 0.0 && tmin < 1.0;
}

}  // namespace

int obstacles_crossed(const ObstacleGrid& grid, GridPos a, GridPos b) {
  if (grid.width == 0 || grid.height == 0 || a == b) return 0;
  const double x0 = a.x + 0.5, y0 = a.y + 0.5;
  const double x1 = b.x + 0.5, y1 = b.y + 0.5;
  const int cx0 = std::min(a.x, b.x), cx1 = std::max(a.x, b.x);
  const int cy0 = std::min(a.y, b.y), cy1 = std::max(a.y, b.y);
  int count = 0;
  for (int cy = cy0; cy <= cy1; ++cy) {
    for (int cx = cx0; cx <= cx1; ++cx) {
      if ((cx == a.x && cy == a.y) || (cx == b.x && cy == b.y)) continue;
      if (!grid.is_blocked(cx, cy)) continue;
      if (segment_hits_box(x0, y0, x1, y1, cx, cy)) ++count;
    }
  }
  return count;
}

double cell_distance_m(const ChannelParams& cp, GridPos a, GridPos b) {
  const double dx = static_cast<double>(a.x - b.x);
  const double dy = static_cast<double>(a.y - b.y);
  return cp.cell_size * std::hypot(dx, dy);
}

double received_power(const ChannelParams& cp, double distance_m,
                      int obstacles_crossed, Rng& rng) {
  const double d = std::max(distance_m, cp.d0);
  double pr = cp.p_t - cp.k_ref - 10.0 * cp.eta * std::log10(d / cp.d0) -
              obstacles_crossed * cp.delta0;
  if (cp.sigma_psi > 0.0) pr += cp.sigma_psi * rng.normal();
  return pr;
}

DecodeOutcome decode(double signal_dbm, const std::vector<double>& interference_dbm,
                     const ChannelParams& cp) {
  double interference_mw = 0.0;
  for (double x : interference_dbm) interference_mw += dbm_to_mw(x);
  const double theta_r_lin = std::pow(10.0, cp.theta_r / 10.0);
  if (dbm_to_mw(signal_dbm) >= theta_r_lin * (interference_mw + dbm_to_mw(cp.n0)))
    return DecodeOutcome::Decoded;
  if (signal_dbm >= cp.theta_f) return DecodeOutcome::DetectedNotDecoded;
  return DecodeOutcome::Missed;
}

std::vector<SlotAssignment> contend_slots(const std::vector<int>& intents,
                                          const std::vector<GridPos>& positions,
                                          const ObstacleGrid& obstacles,
                                          const ChannelParams& cp, Rng& rng) {
  const int n_agents = static_cast<int>(positions.size());
  std::vector<SlotAssignment> out(n_agents);
  if (intents.empty()) return out;

  std::vector<int> senders(intents);
  std::sort(senders.begin(), senders.end());
  for (int id : senders)
    if (id < 0 || id >= n_agents) throw ContractError("contend_slots: bad sender id");

  const double busy_mw = dbm_to_mw(cp.theta_f);
  std::vector<int> counter(senders.size());
  for (size_t i = 0; i < senders.size(); ++i)
    counter[i] = static_cast<int>(rng.uniform_int(cp.w));

  for (int slot = 0; slot < cp.s; ++slot) {
    std::vector<int> committed;  // sender ids committed to this slot, ascending
    std::vector<bool> acted(senders.size(), false);
    for (size_t i = 0; i < senders.size(); ++i) {
      const int id = senders[i];
      if (out[id].transmitted || counter[i] != 0) continue;
      acted[i] = true;
      double sensed_mw = 0.0;
      for (int tx : committed)
        sensed_mw += dbm_to_mw(received_power(
            cp, cell_distance_m(cp, positions[tx], positions[id]),
            obstacles_crossed(obstacles, positions[tx], positions[id]), rng));
      if (sensed_mw >= busy_mw) {
        counter[i] = static_cast<int>(rng.uniform_int(cp.w));
      } else if (rng.bernoulli(cp.p)) {
        out[id].transmitted = true;
        out[id].slot = slot;
        committed.push_back(id);
      } else {
        counter[i] = static_cast<int>(rng.uniform_int(cp.w));
      }
    }
    for (size_t i = 0; i < senders.size(); ++i)
      if (!out[senders[i]].transmitted && !acted[i] && counter[i] > 0) --counter[i];
  }
  return out;
}

DeliveryReport deliver_round(const std::vector<Transmission>& transmissions,
                             const std::vector<GridPos>& positions,
                             const ObstacleGrid& obstacles, const ChannelParams& cp,
                             Rng& rng) {
  const int n_agents = static_cast<int>(positions.size());
  DeliveryReport report;
  report.inbox.resize(n_agents);
  report.sender_outcome.resize(n_agents);
  if (transmissions.empty()) return report;

  std::vector<const Transmission*> by_sender(n_agents, nullptr);
  std::vector<int> intents;
  for (const auto& tx : transmissions) {
    if (tx.sender < 0 || tx.sender >= n_agents)
      throw ContractError("deliver_round: bad sender id");
    if (by_sender[tx.sender]) throw ContractError("deliver_round: duplicate sender");
    by_sender[tx.sender] = &tx;
    intents.push_back(tx.sender);
  }
  std::sort(intents.begin(), intents.end());

  report.sender_outcome = contend_slots(intents, positions, obstacles, cp, rng);

  std::vector<int> committed;
  for (int id : intents)
    if (report.sender_outcome[id].transmitted) committed.push_back(id);
  if (committed.empty()) return report;

  // One shadowing realization per (transmitter, receiver) pair per round,
  // reused in both signal and interference roles.
  std::vector<std::vector<double>> power(committed.size(),
                                         std::vector<double>(n_agents, 0.0));
  for (size_t j = 0; j < committed.size(); ++j) {
    const int tx = committed[j];
    for (int rx = 0; rx < n_agents; ++rx)
      power[j][rx] = received_power(
          cp, cell_distance_m(cp, positions[tx], positions[rx]),
          obstacles_crossed(obstacles, positions[tx], positions[rx]), rng);
  }

  for (size_t j = 0; j < committed.size(); ++j) {
    const int tx = committed[j];
    const int slot = report.sender_outcome[tx].slot;
    for (int rx = 0; rx < n_agents; ++rx) {
      if (rx == tx) continue;  // no self-reception
      std::vector<double> interference;
      for (size_t k = 0; k < committed.size(); ++k) {
        if (k == j) continue;
        if (report.sender_outcome[committed[k]].slot != slot) continue;
        interference.push_back(power[k][rx]);
      }
      const double signal = power[j][rx];
      if (decode(signal, interference, cp) == DecodeOutcome::Decoded &&
          signal >= cp.theta_f)
        report.inbox[rx].push_back({tx, by_sender[tx]->message, signal});
    }
  }
  return report;
}

}  // namespace clover::chan
