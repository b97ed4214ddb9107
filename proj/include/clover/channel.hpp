#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "clover/mat.hpp"
#include "clover/rng.hpp"

namespace clover::chan {

// Wireless constants. Defaults follow the calibration target: the
// corner-to-corner link of a 10x10 grid sits in the marginal regime
// (see the calibrate subcommand).
struct ChannelParams {
  double p_t = 20.0;        // transmit power, dBm
  double k_ref = 33.0;      // reference-distance loss, dB
  double eta = 3.0;         // path-loss exponent
  double d0 = 1.0;          // reference distance, m
  double sigma_psi = 2.0;   // shadowing std dev, dB
  double delta0 = 4.5;      // attenuation per obstacle cell crossed, dB
  double n0 = -95.0;        // noise floor, dBm
  double theta_f = -78.0;   // carrier-sense threshold, dBm
  double theta_r = 15.0;    // SINR threshold, dB
  double p = 0.3;           // transmit probability per sense
  int w = 15;               // backoff window, slots
  int s = 15;               // slots per decision epoch
  double cell_size = 10.0;  // meters per grid cell

  void validate() const;
};

struct GridPos {
  int x = 0;
  int y = 0;
  bool operator==(const GridPos&) const = default;
};

struct ObstacleGrid {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> blocked;

  ObstacleGrid() = default;
  ObstacleGrid(int w, int h) : width(w), height(h), blocked(static_cast<size_t>(w) * h, 0) {}
  bool is_blocked(int x, int y) const {
    return blocked[static_cast<size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    blocked[static_cast<size_t>(y) * width + x] = v ? 1 : 0;
  }
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Number of obstacle cells whose unit square intersects the open segment
// between the two cell centers; the endpoint cells are excluded.
int obstacles_crossed(const ObstacleGrid& grid, GridPos a, GridPos b);

double cell_distance_m(const ChannelParams& cp, GridPos a, GridPos b);

// Log-distance path loss with log-normal shadowing and obstacle attenuation.
// Distances below d0 are clamped to d0.
double received_power(const ChannelParams& cp, double distance_m,
                      int obstacles_crossed, Rng& rng);

enum class DecodeOutcome { Decoded, DetectedNotDecoded, Missed };

DecodeOutcome decode(double signal_dbm, const std::vector<double>& interference_dbm,
                     const ChannelParams& cp);

struct SlotAssignment {
  bool transmitted = false;
  int slot = -1;  // -1 when dropped
};

// Slotted p-CSMA over s slots: each intending sender backs off uniformly in
// {0..w-1}; on expiry it senses same-slot committed transmissions (ascending
// id order) and transmits with probability p when the sensed energy is below
// theta_f, otherwise redraws. Returns one assignment per agent.
std::vector<SlotAssignment> contend_slots(const std::vector<int>& intents,
                                          const std::vector<GridPos>& positions,
                                          const ObstacleGrid& obstacles,
                                          const ChannelParams& cp, Rng& rng);

struct Delivery {
  int sender = -1;
  std::vector<double> message;
  double rss_dbm = 0.0;
};

struct Transmission {
  int sender = -1;
  std::vector<double> message;
};

struct DeliveryReport {
  std::vector<std::vector<Delivery>> inbox;       // per receiver, sender-ascending
  std::vector<SlotAssignment> sender_outcome;     // per agent
};

// One broadcast round: contention, then per committed transmission SINR
// decoding at every other agent with same-slot co-transmitters as
// interference. Message values pass through unmodified.
DeliveryReport deliver_round(const std::vector<Transmission>& transmissions,
                             const std::vector<GridPos>& positions,
                             const ObstacleGrid& obstacles, const ChannelParams& cp,
                             Rng& rng);

}  // namespace clover::chan
