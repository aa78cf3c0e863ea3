#include <cmath>
#include <numeric>
#include <vector>

#include "backhaul/errors.hpp"
#include "backhaul/propagation.hpp"
#include "backhaul/scenario.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace backhaul;

TEST_CASE("mmW path loss follows the close-in model") {
  CHECK(mmw_pathloss_db(1.0, 2.0, 70.0, 0.0) == 70.0);
  CHECK(mmw_pathloss_db(100.0, 2.0, 70.0, 0.0) == doctest::Approx(110.0).epsilon(1e-12));
  CHECK(mmw_pathloss_db(10.0, 2.0, 70.0, 3.5) == doctest::Approx(93.5).epsilon(1e-12));
  CHECK_THROWS_AS(mmw_pathloss_db(0.5, 2.0, 70.0, 0.0), DomainError);
  double prev = mmw_pathloss_db(1.0, 2.0, 70.0, 1.0);
  for (double d = 2.0; d < 2000.0; d *= 1.7) {
    const double l = mmw_pathloss_db(d, 2.0, 70.0, 1.0);
    CHECK(l > prev);
    prev = l;
  }
}

TEST_CASE("shadowing draws are zero-mean Gaussian with the configured spread") {
  Rng zero(1);
  CHECK(sample_mmw_shadowing(0.0, zero) == 0.0);

  Rng rng(2024);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_mmw_shadowing(4.1, rng);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum_sq - n * mean * mean) / (n - 1));
  CHECK(std::abs(mean) <= 0.05);
  CHECK(sd == doctest::Approx(4.1).epsilon(0.02));

  Rng a(77), b(77);
  CHECK(sample_mmw_shadowing(4.1, a) == sample_mmw_shadowing(4.1, b));
}

TEST_CASE("sub-6 gain combines distance loss and fading") {
  CHECK(sub6_gain(1.0, 3.0, 47.9, 1.0) == doctest::Approx(std::pow(10.0, -4.79)).epsilon(1e-12));
  CHECK(sub6_gain(50.0, 3.0, 47.9, 0.0) == 0.0);
  const double ratio_db = 10.0 * std::log10(sub6_gain(100.0, 3.0, 47.7, 1.0) / sub6_gain(200.0, 3.0, 47.7, 1.0));
  CHECK(ratio_db == doctest::Approx(30.0 * std::log10(2.0)).epsilon(1e-12));
  CHECK(ratio_db == doctest::Approx(9.03).epsilon(1e-3));
  CHECK_THROWS_AS(sub6_gain(0.9, 3.0, 47.7, 1.0), DomainError);
  double prev = sub6_gain(1.0, 3.0, 47.7, 1.0);
  for (double d = 1.5; d < 2000.0; d *= 1.5) {
    const double g = sub6_gain(d, 3.0, 47.7, 1.0);
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("Rayleigh power samples have unit mean") {
  Rng rng(99);
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double f = sample_rayleigh_power(rng);
    CHECK(f >= 0.0);
    sum += f;
  }
  const double mean = sum / n;
  CHECK(mean >= 0.95);
  CHECK(mean <= 1.05);
}

TEST_CASE("mmW SNR is noise limited") {
  CHECK(snr_mmw(1.0, 1e-9, 1e-12) == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(snr_mmw(1.0, 0.0, 1e-12) == 0.0);
  CHECK(snr_mmw(4.0, 1e-9, 4e-12) == doctest::Approx(snr_mmw(1.0, 1e-9, 1e-12)).epsilon(1e-12));
}

TEST_CASE("sub-6 SINR counts every other anchor as an interferer") {
  const Scenario s = testing::tiny_scenario(2, 1, 2, 3);
  ChannelRealization ch = testing::zero_channels(s);
  const int n = 3;  // second sub-6 BRB
  ch.set_gain(0, n, 0, 1e-9);
  ch.set_gain(1, n, 0, 1e-10);
  const std::vector<double> psi{1.0, 1.0};
  CHECK(sinr_sub6(0, n, 0, psi, ch, 1e-12) == doctest::Approx(1e-9 / (1e-10 + 1e-12)).epsilon(1e-12));
  CHECK(sinr_sub6(0, n, 0, psi, ch, 1e-12) == doctest::Approx(9.901).epsilon(1e-4));

  // Equal received powers far above the noise give roughly unit SINR.
  ch.set_gain(1, n, 0, 1e-9);
  CHECK(sinr_sub6(0, n, 0, psi, ch, 1e-12) == doctest::Approx(1.0).epsilon(1e-2));

  // No interference: identical to the SNR, bit for bit.
  ch.set_gain(1, n, 0, 0.0);
  CHECK(sinr_sub6(0, n, 0, psi, ch, 1e-12) == snr_mmw(1.0, 1e-9, 1e-12));

  CHECK_THROWS_AS(sinr_sub6(0, 1, 0, psi, ch, 1e-12), WrongBandError);
}

TEST_CASE("single-anchor SINR reduces to SNR") {
  const Scenario s = testing::tiny_scenario(1, 1, 0, 2);
  ChannelRealization ch = testing::zero_channels(s);
  ch.set_gain(0, 1, 0, 3.7e-11);
  const std::vector<double> psi{1.0};
  CHECK(sinr_sub6(0, 1, 0, psi, ch, 1e-12) == snr_mmw(1.0, 3.7e-11, 1e-12));
}

TEST_CASE("Shannon rate per BRB") {
  CHECK(brb_rate(480e3, 1.0) == 480e3);
  CHECK(brb_rate(480e3, 0.0) == 0.0);
  CHECK(brb_rate(4.86e6, 1000.0) == doctest::Approx(4.86e6 * std::log2(1001.0)).epsilon(1e-12));
  CHECK(brb_rate(4.86e6, 1000.0) == doctest::Approx(48.45e6).epsilon(1e-3));
  CHECK(brb_rate(2.0 * 480e3, 3.0) == doctest::Approx(2.0 * brb_rate(480e3, 3.0)).epsilon(1e-15));
  double prev = brb_rate(1e6, 0.0);
  for (double g = 0.01; g < 1e6; g *= 3.0) {
    CHECK(brb_rate(1e6, g) > prev);
    prev = brb_rate(1e6, g);
  }
}

TEST_CASE("channel realization shape, sign and structure") {
  const Scenario s = generate_scenario(GenerationConfig{}, 11);
  Rng rng(5);
  const ChannelRealization ch = realize_channels(s, rng);
  CHECK(ch.num_anchors() == 2);
  CHECK(ch.num_brbs() == 292);
  CHECK(ch.num_demanding() == 8);
  bool sub6_varies = false;
  for (int k1 = 0; k1 < 2; ++k1) {
    for (int k2 = 0; k2 < 8; ++k2) {
      CHECK(ch.los(k1, k2));
      for (int n = 0; n < 292; ++n) CHECK(ch.gain(k1, n, k2) >= 0.0);
      for (int n = 1; n < 192; ++n) CHECK(ch.gain(k1, n, k2) == ch.gain(k1, 0, k2));
      CHECK(ch.gain(k1, 0, k2) > 0.0);
      if (ch.gain(k1, 193, k2) != ch.gain(k1, 192, k2)) sub6_varies = true;
    }
  }
  CHECK(sub6_varies);
}

TEST_CASE("mmW gain matches the path loss of the drawn distance") {
  Scenario s = generate_scenario(GenerationConfig{}, 12);
  s.mmw_params.sigma_db = 0.0;
  Rng rng(1);
  const ChannelRealization ch = realize_channels(s, rng);
  const auto anchors = s.anchor_positions();
  const auto dbs = s.demanding_positions();
  for (int k1 = 0; k1 < 2; ++k1) {
    for (int k2 = 0; k2 < 8; ++k2) {
      const double d = std::max(1.0, distance_m(anchors[static_cast<std::size_t>(k1)], dbs[static_cast<std::size_t>(k2)]));
      const double expected = std::pow(10.0, -(70.0 + 20.0 * std::log10(d)) / 10.0);
      CHECK(ch.gain(k1, 0, k2) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("full blockage zeroes every mmW gain") {
  Scenario s = generate_scenario(GenerationConfig{}, 13);
  s.mmw_params.blockage_probability = 1.0;
  Rng rng(3);
  const ChannelRealization ch = realize_channels(s, rng);
  for (int k1 = 0; k1 < 2; ++k1) {
    for (int k2 = 0; k2 < 8; ++k2) {
      CHECK_FALSE(ch.los(k1, k2));
      for (int n = 0; n < 192; ++n) CHECK(ch.gain(k1, n, k2) == 0.0);
      CHECK(ch.gain(k1, 200, k2) > 0.0);
    }
  }
}

TEST_CASE("channel realization is deterministic in the RNG seed") {
  const Scenario s = generate_scenario(GenerationConfig{}, 14);
  Rng a(21), b(21), c(22);
  const auto x = realize_channels(s, a);
  CHECK(x == realize_channels(s, b));
  CHECK_FALSE(x == realize_channels(s, c));
}

TEST_CASE("link table precomputes SNR, SINR and rates") {
  const Scenario s = testing::tiny_scenario(2, 1, 1, 1);
  ChannelRealization ch = testing::zero_channels(s);
  ch.set_gain(0, 0, 0, testing::gain_for_snr(1000.0));
  ch.set_gain(0, 1, 0, 2e-12);
  ch.set_gain(1, 1, 0, 1e-12);
  const LinkTable links(s, ch);
  CHECK(links.gamma(0, 0, 0) == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(links.rate(0, 0, 0) == doctest::Approx(4.86e6 * std::log2(1001.0)).epsilon(1e-12));
  CHECK(links.gamma(0, 1, 0) == doctest::Approx(2e-12 / (1e-12 + 1e-12)).epsilon(1e-12));
  CHECK(links.gamma(1, 1, 0) == doctest::Approx(1e-12 / (2e-12 + 1e-12)).epsilon(1e-12));
  CHECK(links.rate(1, 0, 0) == 0.0);
}

TEST_CASE("channel CSV dump") {
  const Scenario s = testing::tiny_scenario(1, 1, 1, 1);
  ChannelRealization ch = testing::zero_channels(s);
  ch.set_gain(0, 0, 0, 0.1);
  ch.set_gain(0, 1, 0, 1e-13);
  const auto p = testing::temp_path("channels.csv");
  write_channel_csv(ch, p);
  CHECK(testing::slurp(p) == "k1,n,k2,gain\n0,0,0,0.1\n0,1,0,1e-13\n");
}
