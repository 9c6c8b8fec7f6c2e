#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "isaclab/arrays.hpp"
#include "isaclab/channels.hpp"
#include "isaclab/config.hpp"
#include "isaclab/rng.hpp"
#include "isaclab/units.hpp"

using namespace isaclab;

TEST_CASE("db conversions") {
  CHECK(db_to_linear(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(dbm_to_watts(-80.0) == doctest::Approx(1e-11).epsilon(1e-12));
  CHECK(db_to_linear(-30.0) == doctest::Approx(1e-3).epsilon(1e-12));
  for (double x = -200.0; x <= 200.0; x += 7.3)
    CHECK(linear_to_db(db_to_linear(x)) == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("philox known-answer vectors") {
  // Reference vectors of the 10-round 4x32 generator.
  auto out = Philox4x32::block({0u, 0u, 0u, 0u}, {0u, 0u});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          {0xffffffffu, 0xffffffffu});
  CHECK(out[0] == 0x408f276du);
  CHECK(out[1] == 0x41c83b0eu);
  CHECK(out[2] == 0xa20bc7c6u);
  CHECK(out[3] == 0x6d5451fdu);

  out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          {0xa4093822u, 0x299f31d0u});
  CHECK(out[0] == 0xd16cfe09u);
  CHECK(out[1] == 0x94fdccebu);
  CHECK(out[2] == 0x5001e420u);
  CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("complex gaussian substream moments") {
  SubStream s(1234, 0, StreamPurpose::kChannelBsRis);
  const int n = 100000;
  cplx mean = 0.0;
  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    const cplx z = s.cn_at(i);
    mean += z;
    var += std::norm(z);
  }
  mean /= static_cast<double>(n);
  var /= static_cast<double>(n);
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  // Stateless indexing matches the stateful sequence.
  SubStream t(1234, 0, StreamPurpose::kChannelBsRis);
  CHECK(t.cn() == s.cn_at(0));
  CHECK(t.cn() == s.cn_at(1));
}

TEST_CASE("table1 document loads with the expected parameters") {
  const LoadedScenario loaded = load_scenario(table1_document());
  CHECK(loaded.config.bs_antennas == 8);
  CHECK(loaded.scenario.k_total() == 2);
  CHECK(loaded.scenario.m_total() == 2);
  CHECK(loaded.config.path_loss_exponent == doctest::Approx(2.2));
  CHECK(loaded.config.ris_elements() == 36);
  CHECK(loaded.config.reference_path_loss_linear == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(loaded.config.noise_power_watts == doctest::Approx(1e-11).epsilon(1e-12));
  CHECK(loaded.config.rician_factor_linear == doctest::Approx(db_to_linear(3.0)));
  CHECK(loaded.config.amplification_factor == doctest::Approx(20.0 * 6.0));
  // Purity: loading twice gives identical values.
  const LoadedScenario again = load_scenario(table1_document());
  CHECK(again.config.amplification_factor == loaded.config.amplification_factor);
  CHECK(again.scenario.users.size() == loaded.scenario.users.size());
}

TEST_CASE("config validation failures name the offending field") {
  std::string doc = table1_document();
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string out = doc;
    out.replace(out.find(from), from.size(), to);
    return out;
  };
  CHECK_THROWS_WITH_AS(load_scenario(replace("\"bs_power_db\": 10.0", "\"bs_power_watts\": -1.0")),
                       doctest::Contains("bs_power must be positive"), ConfigError);
  CHECK_THROWS_AS(load_scenario(replace("\"bs_antennas\": 8", "\"bs_antennas\": 8, \"oops\": 1")),
                  ConfigError);
  CHECK_THROWS_AS(load_scenario("{not json"), ConfigError);
  CHECK_THROWS_AS(load_scenario(replace("\"ris_grid\": {\"nx\": 6, \"ny\": 6},", "")),
                  ConfigError);
  // Side-T entities must not carry BS geometry.
  CHECK_THROWS_AS(
      load_scenario(replace("{\"side\": \"T\", \"distance_ris_m\": 18.0",
                            "{\"side\": \"T\", \"distance_bs_m\": 5.0, \"distance_ris_m\": 18.0")),
      ConfigError);
}

TEST_CASE("grid product definition") {
  const LoadedScenario loaded = load_scenario(table1_document());
  SystemConfig c = loaded.config;
  c.ris_nx = 6;
  c.ris_ny = 6;
  CHECK(c.ris_elements() == 36);
}

TEST_CASE("ula steering basics") {
  CHECK_THROWS_AS(ula_steering(AnglePair{0.1, 0.2}, 0, kPi), std::invalid_argument);
  const RowC ones = ula_steering(AnglePair{0.0, 1.234}, 8, kPi);
  for (int m = 0; m < 8; ++m) CHECK(std::abs(ones(m) - cplx(1.0, 0.0)) < 1e-15);
  CHECK(ula_steering(AnglePair{0.7, -0.3}, 1, kPi).size() == 1);
  CHECK(ula_steering(AnglePair{0.7, -0.3}, 1, kPi)(0) == cplx(1.0, 0.0));

  const AnglePair a{deg_to_rad(35.0), deg_to_rad(110.0)};
  const RowC v = ula_steering(a, 2, kPi);
  const cplx expected = std::polar(1.0, kPi * std::sin(a.horizontal_rad) *
                                            std::cos(a.vertical_rad));
  CHECK(std::abs(v(1) - expected) < 1e-15);
}

TEST_CASE("ula conjugation symmetry") {
  SubStream s(7, 0, StreamPurpose::kChannelBsRis);
  for (int i = 0; i < 20; ++i) {
    const AnglePair a{(s.uniform() - 0.5) * kPi, s.uniform() * kPi};
    const AnglePair neg{-a.horizontal_rad, a.vertical_rad};
    const RowC v = ula_steering(a, 6, kPi);
    const RowC w = ula_steering(neg, 6, kPi);
    CHECK((w - v.conjugate()).norm() < 1e-12);
  }
}

TEST_CASE("upa wavevector basics") {
  CHECK(upa_wavevector(AnglePair{0.0, 0.9}, 3, 4).norm() == doctest::Approx(0.0));
  CHECK(upa_wavevector(AnglePair{0.3, 0.9}, 1, 1)(0) == doctest::Approx(0.0));
  const VecR k = upa_wavevector(AnglePair{deg_to_rad(90.0), 0.0}, 2, 1);
  CHECK(k(0) == doctest::Approx(0.0));
  CHECK(k(1) == doctest::Approx(1.0));
}

TEST_CASE("upa steering: exponential form equals kronecker factorization") {
  SubStream s(9, 0, StreamPurpose::kChannelBsRis);
  for (int rep = 0; rep < 20; ++rep) {
    const int n_x = 2 + static_cast<int>(s.uniform() * 4);
    const int n_y = 2 + static_cast<int>(s.uniform() * 4);
    const double eta = 2.0 * kPi * 0.5;
    const AnglePair ang{(s.uniform() - 0.5) * kPi, s.uniform() * kPi};
    const RowC b = upa_steering(ang, n_x, n_y, eta);
    // Independent oracle: b_x (x) b_y from the per-axis factors.
    const double sh = std::sin(ang.horizontal_rad);
    const double cv = std::cos(ang.vertical_rad), sv = std::sin(ang.vertical_rad);
    RowC bx(n_x), by(n_y);
    for (int p = 0; p < n_x; ++p) bx(p) = std::polar(1.0, eta * p * sh * cv);
    for (int q = 0; q < n_y; ++q) by(q) = std::polar(1.0, eta * q * sh * sv);
    RowC kron(n_x * n_y);
    for (int p = 0; p < n_x; ++p)
      for (int q = 0; q < n_y; ++q) kron(p * n_y + q) = bx(p) * by(q);
    CHECK((b - kron).norm() < 1e-12);
    for (int i = 0; i < b.size(); ++i) CHECK(std::abs(std::abs(b(i)) - 1.0) < 1e-12);
  }
}

TEST_CASE("path loss") {
  CHECK(path_loss(1.0, 1e-3, 2.2) == doctest::Approx(1e-3));
  CHECK(path_loss(17.0, 1e-3, 0.0) == doctest::Approx(1e-3));
  CHECK(path_loss(10.0, 1e-3, 2.2) == doctest::Approx(1e-3 * std::pow(10.0, -2.2)).epsilon(1e-12));
  CHECK_THROWS_AS(path_loss(0.0, 1e-3, 2.2), std::invalid_argument);
  double prev = path_loss(0.5, 1e-3, 2.2);
  for (double d = 1.0; d < 100.0; d *= 1.7) {
    const double cur = path_loss(d, 1e-3, 2.2);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("radar round trip") {
  const double lambda = kSpeedOfLight / 3.315e9;
  const double beta1 = radar_round_trip(lambda, 100.0, 1.0);
  const double expected = std::sqrt(lambda * lambda * 100.0 / std::pow(4.0 * kPi, 3));
  CHECK(beta1 == doctest::Approx(expected).epsilon(1e-12));
  CHECK(radar_round_trip(lambda, 100.0, 2.0) == doctest::Approx(beta1 / 4.0).epsilon(1e-12));
  CHECK(radar_round_trip(lambda, 0.0, 3.0) == doctest::Approx(0.0));
  // Exact d^-2 scaling.
  for (double d = 1.0; d < 64.0; d *= 2.0)
    CHECK(radar_round_trip(lambda, 7.0, d) * d * d ==
          doctest::Approx(radar_round_trip(lambda, 7.0, 1.0)).epsilon(1e-12));
}

TEST_CASE("rician sampling statistics") {
  const int rows = 4, cols = 5;
  MatC los(rows, cols);
  SubStream ls(3, 0, StreamPurpose::kChannelBsRis);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) los(r, c) = std::polar(1.0, 2.0 * kPi * ls.uniform());
  const double alpha = 0.37;

  SUBCASE("kappa -> infinity collapses onto the LOS component") {
    const MatC d = rician_sample(los, alpha, 1e12, SubStream(5, 0, StreamPurpose::kChannelBsRis));
    CHECK((d - std::sqrt(alpha) * los).norm() / (std::sqrt(alpha) * los.norm()) < 1e-5);
  }
  SUBCASE("kappa = 0 is zero-mean") {
    cplx mean = 0.0;
    for (uint32_t trial = 0; trial < 2000; ++trial) {
      const MatC d =
          rician_sample(los, alpha, 0.0, SubStream(5, trial, StreamPurpose::kChannelBsRis));
      mean += d.sum();
    }
    mean /= 2000.0 * rows * cols;
    CHECK(std::abs(mean) < 4.0 * std::sqrt(alpha / (2000.0 * rows * cols)));
  }
  SUBCASE("kappa = 2: mean and variance match the stated distribution") {
    const double kappa = 2.0;
    const int draws = 100000;
    MatC acc = MatC::Zero(rows, cols);
    double var_acc = 0.0;
    const MatC expected_mean = std::sqrt(alpha * kappa / (1.0 + kappa)) * los;
    for (uint32_t trial = 0; trial < draws; ++trial) {
      const MatC d =
          rician_sample(los, alpha, kappa, SubStream(11, trial, StreamPurpose::kChannelBsRis));
      acc += d;
      var_acc += (d - expected_mean).squaredNorm();
    }
    acc /= static_cast<double>(draws);
    const double se = std::sqrt(alpha / (1.0 + kappa) / draws);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) CHECK(std::abs(acc(r, c) - expected_mean(r, c)) < 3.5 * se);
    const double var = var_acc / (draws * rows * cols);
    CHECK(var == doctest::Approx(alpha / (1.0 + kappa)).epsilon(0.05));
  }
}

namespace {
Scenario basic_scenario(bool with_t_target = true) {
  Scenario s;
  s.bs_ris.distance_m = 5.0;
  s.bs_ris.aod_bs = {deg_to_rad(40.0), deg_to_rad(90.0)};
  s.bs_ris.aoa_ris = {deg_to_rad(-40.0), deg_to_rad(90.0)};
  EntityPlacement ut;
  ut.side = Side::T;
  ut.distance_ris_m = 18.0;
  ut.aod_ris = {deg_to_rad(55.0), deg_to_rad(95.0)};
  EntityPlacement ur;
  ur.side = Side::R;
  ur.distance_bs_m = 25.0;
  ur.distance_ris_m = 27.0;
  ur.aod_bs = {deg_to_rad(20.0), deg_to_rad(95.0)};
  ur.aod_ris = {deg_to_rad(60.0), deg_to_rad(100.0)};
  s.users = {ut, ur};
  EntityPlacement ot;
  ot.side = Side::T;
  ot.distance_ris_m = 17.0;
  ot.aod_ris = {deg_to_rad(40.0), deg_to_rad(108.0)};
  EntityPlacement orr;
  orr.side = Side::R;
  orr.distance_bs_m = 38.0;
  orr.distance_ris_m = 41.0;
  orr.aod_bs = {deg_to_rad(35.0), deg_to_rad(110.0)};
  orr.aod_ris = {deg_to_rad(42.0), deg_to_rad(105.0)};
  if (with_t_target)
    s.targets = {ot, orr};
  else
    s.targets = {orr};
  return s;
}
}  // namespace

TEST_CASE("draw_channels shapes, determinism, and side bookkeeping") {
  const LoadedScenario loaded = load_scenario(table1_document());
  const ChannelDraw d1 = draw_channels(loaded.config, loaded.scenario, 42, 0);
  CHECK(d1.G.rows() == 36);
  CHECK(d1.G.cols() == 8);
  CHECK(d1.users.size() == 2);
  CHECK(d1.users[0].g.size() == 0);  // Side-T: no direct link
  CHECK(d1.users[1].g.size() == 8);
  CHECK(d1.targets[0].beta_ris > 0.0);
  CHECK(d1.targets[0].beta_bs == 0.0);
  CHECK(d1.targets[1].beta_bs > 0.0);

  const ChannelDraw d2 = draw_channels(loaded.config, loaded.scenario, 42, 0);
  CHECK((d1.G - d2.G).norm() == 0.0);
  CHECK((d1.users[0].h - d2.users[0].h).norm() == 0.0);

  const ChannelDraw d3 = draw_channels(loaded.config, loaded.scenario, 43, 0);
  CHECK((d1.G - d3.G).norm() > 0.0);

  // Dropping the Side-T target removes its echo bookkeeping.
  const Scenario no_t = basic_scenario(false);
  const ChannelDraw d4 = draw_channels(loaded.config, no_t, 42, 0);
  CHECK(d4.targets.size() == 1);
  CHECK(d4.targets[0].side == Side::R);
}

TEST_CASE("common random numbers: shared prefix across array sizes") {
  const LoadedScenario loaded = load_scenario(table1_document());
  SystemConfig small = loaded.config;
  small.ris_nx = 4;
  small.ris_ny = 4;
  small.resolve_amplification();
  const ChannelDraw big = draw_channels(loaded.config, loaded.scenario, 42, 3);
  const ChannelDraw little = draw_channels(small, loaded.scenario, 42, 3);
  // BS-side links do not depend on the RIS grid, so the draws coincide.
  CHECK((big.users[1].g - little.users[1].g).norm() == 0.0);
}
