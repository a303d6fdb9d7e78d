#include <cmath>

#include "doctest.h"
#include "hrf/scenario.hpp"
#include "support.hpp"

using namespace hrf;

TEST_SUITE("scenario") {
  TEST_CASE("steering vector values") {
    const VectorXcd a0 = steering_vector(0.0, 4, 0.5);
    for (int n = 0; n < 4; ++n) CHECK(std::abs(a0[n] - cd(1, 0)) < 1e-15);

    const VectorXcd a30 = steering_vector(deg_to_rad(30), 2, 0.5);
    CHECK(std::abs(a30[0] - cd(1, 0)) < 1e-15);
    CHECK(std::abs(a30[1] - cd(0, 1)) < 1e-12);

    const double th = deg_to_rad(50);
    const VectorXcd a = steering_vector(th, 8, 0.5);
    for (int n = 0; n < 8; ++n) CHECK(std::abs(a[n] - std::polar(1.0, 2 * kPi * 0.5 * n * std::sin(th))) < 1e-12);
  }

  TEST_CASE("steering derivative") {
    const VectorXcd d0 = steering_derivative(0.0, 2, 0.5);
    CHECK(std::abs(d0[0]) < 1e-15);
    CHECK(std::abs(d0[1] - cd(0, kPi)) < 1e-12);

    for (double th : {-1.2, -0.3, 0.4, 1.1}) {
      const VectorXcd d = steering_derivative(th, 8, 0.5);
      CHECK(std::abs(d[0]) == 0.0);
      const double h = 1e-5;
      const VectorXcd fd = (steering_vector(th + h, 8, 0.5) - steering_vector(th - h, 8, 0.5)) / (2 * h);
      CHECK((fd - d).norm() / d.norm() < 1e-8);
    }
  }

  TEST_CASE("subcarrier phase") {
    FrameConfig f = make_frame(4, 2, 1);
    f.samples_per_symbol = 4;
    CHECK(std::abs(subcarrier_phase(3, 0.0, 0, f) - cd(1, 0)) < 1e-15);
    const double tau = 3.3e-7;
    CHECK(std::abs(subcarrier_phase(0, tau, 2, f) - std::polar(1.0, -2 * kPi * f.carrier_freq_hz * tau)) < 1e-9);
    const int m = 5, v = 3;
    const double phase = -2 * kPi * ((m * f.subcarrier_spacing_hz + f.carrier_freq_hz) * tau - double(m) * v / 4);
    CHECK(std::abs(subcarrier_phase(m, tau, v, f) - std::polar(1.0, phase)) < 1e-9);
    const double h = 1e-15;
    const cd fd = (subcarrier_phase(m, tau + h, v, f) - subcarrier_phase(m, tau - h, v, f)) / (2 * h);
    CHECK(std::abs(fd - subcarrier_phase_derivative(m, tau, v, f)) / std::abs(fd) < 1e-5);
  }

  TEST_CASE("echo channel structure") {
    Rng rng(3);
    ScenarioConfig sc = test::random_scenario(1, 1, 5);
    sc.targets[0].doppler_hz = 0.0;
    const auto ch = build_channels(sc, 0);
    for (int l = 1; l < sc.frame.num_symbols; ++l)
      CHECK((ch.echo[l][1][0].matrix() - ch.echo[0][1][0].matrix()).norm() < 1e-12);

    sc.targets[0] = {0.3, 0.0, 0.0, {1.0, 0.0}};
    sc.frame.dl_subcarriers = {0};
    sc.frame.ul_subcarriers = {{1}};
    sc.frame.carrier_freq_hz = 24e9;
    const auto ch2 = build_channels(sc, 0);
    const MatrixXcd expect = steering_vector(0.3, 5, 0.5) * steering_vector(0.3, 4, 0.5).transpose();
    CHECK((ch2.echo[0][0][0].matrix() - expect).norm() < 1e-12);
  }

  TEST_CASE("uplink is direct plus reflections") {
    const ScenarioConfig sc = test::random_scenario(2, 1, 9);
    const auto ch = build_channels(sc, 1);
    MatrixXcd sum = ch.direct[1][0][1].matrix();
    for (const auto& h : ch.reflected[1][0][1]) sum += h.matrix();
    CHECK((ch.uplink(1, 0, 1) - sum).norm() < 1e-12);
  }

  TEST_CASE("pathloss scaling") {
    const double a1 = free_space_amplitude(100, 25, 17, 24e9);
    const double a2 = free_space_amplitude(200, 25, 17, 24e9);
    CHECK(a2 / a1 == doctest::Approx(0.5).epsilon(1e-12));
    const double m1 = monostatic_amplitude(50, 25, 1.0, 24e9);
    const double m2 = monostatic_amplitude(100, 25, 1.0, 24e9);
    CHECK((m2 * m2) / (m1 * m1) == doctest::Approx(1.0 / 16).epsilon(1e-12));
    // lambda / (4 pi d) with 42 dBi of antenna gain
    const double lambda = kSpeedOfLight / 24e9;
    CHECK(a1 == doctest::Approx(std::sqrt(db_to_linear(42.0)) * lambda / (4 * kPi * 100)).epsilon(1e-12));
    CHECK(20 * std::log10(a1) == doctest::Approx(-58.05200806).epsilon(1e-9));
  }

  TEST_CASE("frame overlap is reported with indices") {
    FrameConfig f = make_frame(3, 2, 1);
    f.ul_subcarriers[0] = {1, 2, 7};
    const auto v = f.violations();
    REQUIRE(v.size() >= 1);
    bool named = false;
    for (const auto& s : v) named |= s.find("[1, 2]") != std::string::npos;
    CHECK(named);
  }

  TEST_CASE("validate lists every violation") {
    ScenarioConfig sc = test::random_scenario(1, 1, 2);
    sc.array.bs_rx_antennas = 0;
    sc.sample_index = 9;
    try {
      sc.validate();
      FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
      const std::string m = e.what();
      CHECK(m.find("bs_rx_antennas") != std::string::npos);
      CHECK(m.find("sample index") != std::string::npos);
    }
  }

  TEST_CASE("geometry construction") {
    SceneGeometry g;
    g.targets.push_back({100.0, deg_to_rad(50), 0.0, 1.0});
    g.users.push_back({100.0, 0.0, {}});
    ArrayConfig array;
    array.user_tx_antennas = {4};
    const auto sc = make_scenario(g, make_frame(36, 24, 1), array, LinkBudget{});
    CHECK(sc.targets[0].one_way_delay_s == doctest::Approx(100.0 / kSpeedOfLight));
    REQUIRE(sc.users[0].reflected_paths.size() == 1);
    const double d1 = 2 * 100 * std::sin(deg_to_rad(25));  // isosceles: chord between user and target
    CHECK(sc.users[0].reflected_paths[0].delay_s == doctest::Approx((d1 + 100) / kSpeedOfLight));
    // Chord leaves the user 65 deg off the user-to-BS line, on the negative side of the local frame.
    CHECK(std::abs(sc.users[0].reflected_paths[0].aod_to_target_rad) == doctest::Approx(deg_to_rad(65)));
    CHECK(sc.noise.noise_variance == doctest::Approx(dbm_to_watt(-174) * 15e3));
  }
}
