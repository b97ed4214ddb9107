#include <doctest.h>

#include <cmath>

#include "clover/channel.hpp"
#include "testutil.hpp"

using namespace clover;
using namespace clover::chan;

namespace {

ChannelParams quiet(double theta_r = 15.0) {
  ChannelParams cp;
  cp.sigma_psi = 0.0;
  cp.theta_r = theta_r;
  return cp;
}

}  // namespace

TEST_CASE("received power at the reference distance") {
  ChannelParams cp = quiet();
  Rng rng(1);
  CHECK(received_power(cp, cp.d0, 0, rng) == doctest::Approx(cp.p_t - cp.k_ref));
  // below-reference distances clamp to d0
  CHECK(received_power(cp, cp.d0 / 4.0, 0, rng) ==
        doctest::Approx(cp.p_t - cp.k_ref));
}

TEST_CASE("received power log-distance slope") {
  ChannelParams cp = quiet();
  cp.p_t = 20.0;
  cp.k_ref = 30.0;
  cp.eta = 2.5;
  Rng rng(1);
  CHECK(received_power(cp, 10.0 * cp.d0, 0, rng) == doctest::Approx(-35.0));
}

TEST_CASE("shadowing is zero-mean") {
  ChannelParams cp = quiet();
  Rng rng0(7);
  const double base = received_power(cp, 40.0, 1, rng0);
  cp.sigma_psi = 2.0;
  Rng rng(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += received_power(cp, 40.0, 1, rng);
  CHECK(std::fabs(sum / n - base) < 0.05);
}

TEST_CASE("received power strictly decreasing in distance and obstacles") {
  ChannelParams cp = quiet();
  Rng rng(1);
  double prev = received_power(cp, 1.0, 0, rng);
  for (double d = 2.0; d < 200.0; d *= 1.5) {
    const double cur = received_power(cp, d, 0, rng);
    CHECK(cur < prev);
    prev = cur;
  }
  for (int k = 1; k < 5; ++k)
    CHECK(received_power(cp, 50.0, k, rng) < received_power(cp, 50.0, k - 1, rng));
}

TEST_CASE("decode thresholds") {
  ChannelParams cp = quiet();
  cp.n0 = -95.0;
  cp.theta_f = -78.0;
  cp.theta_r = 15.0;
  CHECK(decode(-90.0, {}, cp) == DecodeOutcome::Missed);
  CHECK(decode(-60.0, {}, cp) == DecodeOutcome::Decoded);  // SINR = 35 dB
  CHECK(decode(-60.0, {-60.0}, cp) == DecodeOutcome::DetectedNotDecoded);
}

TEST_CASE("decode is monotone in signal and anti-monotone in interference") {
  ChannelParams cp = quiet();
  Rng rng(42);
  auto rank = [](DecodeOutcome o) {
    return o == DecodeOutcome::Decoded
               ? 2
               : (o == DecodeOutcome::DetectedNotDecoded ? 1 : 0);
  };
  for (int trial = 0; trial < 500; ++trial) {
    const double s = rng.uniform_in(-100.0, -40.0);
    std::vector<double> interferers;
    const int k = static_cast<int>(rng.uniform_int(3));
    for (int i = 0; i < k; ++i) interferers.push_back(rng.uniform_in(-100.0, -40.0));
    const auto base = decode(s, interferers, cp);
    CHECK(rank(decode(s + rng.uniform_in(0.0, 20.0), interferers, cp)) >=
          rank(base));
    auto more = interferers;
    more.push_back(rng.uniform_in(-100.0, -40.0));
    const auto worse = decode(s, more, cp);
    CHECK((base == DecodeOutcome::Decoded || worse != DecodeOutcome::Decoded));
  }
}

TEST_CASE("obstacle crossing counts cells on the open segment") {
  ObstacleGrid g(10, 10);
  SUBCASE("horizontal line") {
    g.set(2, 0, true);
    g.set(4, 0, true);
    CHECK(obstacles_crossed(g, {0, 0}, {5, 0}) == 2);
    // endpoints excluded
    g.set(0, 0, true);
    g.set(5, 0, true);
    CHECK(obstacles_crossed(g, {0, 0}, {5, 0}) == 2);
  }
  SUBCASE("same cell") {
    g.set(3, 3, true);
    CHECK(obstacles_crossed(g, {3, 3}, {3, 3}) == 0);
  }
  SUBCASE("off-path cells do not count") {
    g.set(2, 5, true);
    CHECK(obstacles_crossed(g, {0, 0}, {5, 0}) == 0);
  }
  SUBCASE("diagonal passes through intermediate cells") {
    g.set(1, 1, true);
    CHECK(obstacles_crossed(g, {0, 0}, {2, 2}) == 1);
    // diagonal corner touch at (1,0) intersects that closed square too
    g.set(1, 0, true);
    CHECK(obstacles_crossed(g, {0, 0}, {2, 2}) == 2);
  }
}

TEST_CASE("contention: empty intents and forced single sender") {
  ChannelParams cp = quiet();
  std::vector<GridPos> pos = {{0, 0}, {3, 3}};
  ObstacleGrid g(5, 5);
  Rng rng(9);
  auto none = contend_slots({}, pos, g, cp, rng);
  CHECK_FALSE(none[0].transmitted);
  CHECK_FALSE(none[1].transmitted);

  cp.w = 1;
  cp.p = 1.0;
  for (int i = 0; i < 50; ++i) {
    auto out = contend_slots({0}, pos, g, cp, rng);
    CHECK(out[0].transmitted);
    CHECK(out[0].slot == 0);
  }
}

namespace {

// Independent brute-force model of the single-sender redraw process: the
// sender attempts at slot c0, then every failure costs 1 + fresh backoff.
bool oracle_drops(Rng& rng, int w, double p, int slots) {
  int t = static_cast<int>(rng.uniform_int(w));
  while (t < slots) {
    if (rng.bernoulli(p)) return false;
    t += 1 + static_cast<int>(rng.uniform_int(w));
  }
  return true;
}

}  // namespace

TEST_CASE("single-sender drop probability matches the brute-force oracle") {
  ChannelParams cp = quiet();
  cp.w = 15;
  cp.p = 0.3;
  cp.s = 15;
  std::vector<GridPos> pos = {{0, 0}};
  ObstacleGrid g(3, 3);
  const int n = 100000;

  Rng sim_rng(1001);
  int sim_drops = 0;
  for (int i = 0; i < n; ++i)
    if (!contend_slots({0}, pos, g, cp, sim_rng)[0].transmitted) ++sim_drops;

  Rng oracle_rng(2002);
  int oracle_drop_count = 0;
  for (int i = 0; i < n; ++i)
    if (oracle_drops(oracle_rng, cp.w, cp.p, cp.s)) ++oracle_drop_count;

  const double sim = static_cast<double>(sim_drops) / n;
  const double ora = static_cast<double>(oracle_drop_count) / n;
  CHECK(std::fabs(sim - ora) < 0.01);
}

TEST_CASE("deliver_round basics") {
  ChannelParams cp = quiet();
  std::vector<GridPos> pos = {{0, 0}, {1, 0}, {5, 5}};
  ObstacleGrid g(10, 10);
  Rng rng(3);

  SUBCASE("no transmissions, empty report") {
    auto rep = deliver_round({}, pos, g, cp, rng);
    for (const auto& inbox : rep.inbox) CHECK(inbox.empty());
  }

  SUBCASE("adjacent delivery under a quiet channel") {
    cp.p = 1.0;
    cp.w = 1;
    auto rep = deliver_round({{0, {1.0, 2.0}}}, pos, g, cp, rng);
    REQUIRE(rep.sender_outcome[0].transmitted);
    REQUIRE(rep.inbox[1].size() == 1);
    CHECK(rep.inbox[1][0].sender == 0);
    CHECK(rep.inbox[1][0].message == std::vector<double>{1.0, 2.0});
    CHECK(rep.inbox[1][0].rss_dbm >= cp.theta_f);
    CHECK(rep.inbox[0].empty());  // no self-reception
  }
}

TEST_CASE("co-located same-slot senders jam each other exactly") {
  ChannelParams cp = quiet(15.0);
  cp.w = 1;
  cp.p = 1.0;
  cp.theta_f = 60.0;  // sensing never reports busy, forcing a shared slot
  std::vector<GridPos> pos = {{4, 4}, {4, 4}, {5, 4}};
  ObstacleGrid g(10, 10);
  Rng rng(17);
  auto rep = deliver_round({{0, {1.0}}, {1, {2.0}}}, pos, g, cp, rng);
  REQUIRE(rep.sender_outcome[0].transmitted);
  REQUIRE(rep.sender_outcome[1].transmitted);
  CHECK(rep.sender_outcome[0].slot == rep.sender_outcome[1].slot);
  // symmetric powers: SINR strictly below the 15 dB threshold
  CHECK(rep.inbox[2].empty());
  // the same failure via the SINR rule directly
  cp.theta_f = -78.0;
  CHECK(decode(-16.0, {-16.0}, cp) == DecodeOutcome::DetectedNotDecoded);
}

TEST_CASE("calibrated defaults: one-cell link decodes almost always") {
  ChannelParams cp;  // defaults, sigma_psi = 2
  std::vector<GridPos> pos = {{0, 0}, {1, 0}};
  ObstacleGrid g(10, 10);
  Rng rng(23);
  int transmitted = 0, decoded = 0;
  for (int i = 0; i < 10000; ++i) {
    auto rep = deliver_round({{0, {1.0}}}, pos, g, cp, rng);
    if (rep.sender_outcome[0].transmitted) {
      ++transmitted;
      if (!rep.inbox[1].empty()) ++decoded;
    }
  }
  REQUIRE(transmitted > 1000);
  CHECK(static_cast<double>(decoded) / transmitted >= 0.99);
}

TEST_CASE("reception rate non-increasing in distance") {
  ChannelParams cp;  // defaults with shadowing
  ObstacleGrid g(16, 16);
  Rng rng(29);
  const int trials = 10000;
  double prev = 1.1;
  for (int d : {1, 4, 8, 12, 15}) {
    std::vector<GridPos> pos = {{0, 0}, {d, 0}};
    int transmitted = 0, decoded = 0;
    for (int i = 0; i < trials; ++i) {
      auto rep = deliver_round({{0, {1.0}}}, pos, g, cp, rng);
      if (rep.sender_outcome[0].transmitted) {
        ++transmitted;
        if (!rep.inbox[1].empty()) ++decoded;
      }
    }
    const double prr = static_cast<double>(decoded) / transmitted;
    const double sigma = std::sqrt(std::max(prr * (1 - prr), 1e-4) / transmitted);
    CHECK(prr <= prev + 2.0 * sigma);
    prev = prr;
  }
}

TEST_CASE("reception rate non-increasing in co-located transmitter count") {
  ChannelParams cp;
  ObstacleGrid g(12, 12);
  Rng rng(31);
  const int trials = 8000;
  double prev = 1.1;
  for (int senders = 1; senders <= 3; ++senders) {
    std::vector<GridPos> pos;
    std::vector<Transmission> txs;
    for (int sidx = 0; sidx < senders; ++sidx) {
      pos.push_back({0, 0});
      txs.push_back({sidx, {1.0}});
    }
    pos.push_back({4, 0});
    const int rx = senders;
    int sender0_decoded = 0;
    for (int i = 0; i < trials; ++i) {
      auto rep = deliver_round(txs, pos, g, cp, rng);
      for (const auto& d : rep.inbox[rx])
        if (d.sender == 0) ++sender0_decoded;
    }
    const double rate = static_cast<double>(sender0_decoded) / trials;
    const double sigma = std::sqrt(std::max(rate * (1 - rate), 1e-4) / trials);
    CHECK(rate <= prev + 2.0 * sigma);
    prev = rate;
  }
}

TEST_CASE("delivery report invariants on random rounds") {
  ChannelParams cp;
  ObstacleGrid g(8, 8);
  Rng rng(37);
  Rng layout(38);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(layout.uniform_int(4));
    std::vector<GridPos> pos;
    std::vector<Transmission> txs;
    for (int i = 0; i < n; ++i) {
      pos.push_back({static_cast<int>(layout.uniform_int(8)),
                     static_cast<int>(layout.uniform_int(8))});
      if (layout.bernoulli(0.7)) txs.push_back({i, {static_cast<double>(i)}});
    }
    auto rep = deliver_round(txs, pos, g, cp, rng);
    for (int i = 0; i < n; ++i) {
      int last_sender = -1;
      for (const auto& d : rep.inbox[i]) {
        CHECK(d.sender != i);
        CHECK(d.sender > last_sender);  // ascending implies one entry per pair
        last_sender = d.sender;
        CHECK(d.rss_dbm >= cp.theta_f);
        CHECK(rep.sender_outcome[d.sender].transmitted);
      }
    }
  }
}

TEST_CASE("channel params validation") {
  ChannelParams cp;
  cp.p = 0.0;
  CHECK_THROWS_AS(cp.validate(), ConfigError);
  cp = ChannelParams{};
  cp.theta_f = -96.0;
  CHECK_THROWS_AS(cp.validate(), ConfigError);
  cp = ChannelParams{};
  CHECK_NOTHROW(cp.validate());
}
