#include <cmath>

#include "doctest.h"
#include "hrf/boundary.hpp"
#include "hrf/quantizer.hpp"
#include "support.hpp"

using namespace hrf;

namespace {

// Desk instance: P = 1, K = 1, four BS antennas, unit-scale gains.
ScenarioConfig desk(int K = 1) {
  ScenarioConfig sc;
  sc.frame = make_frame(4, 3, K, 2);
  sc.array.bs_tx_antennas = 4;
  sc.array.bs_rx_antennas = 4;
  sc.array.user_tx_antennas.assign(K, 2);
  sc.targets = {{deg_to_rad(35), 3e-7, 50.0, {0.6, 0.2}}};
  for (int k = 0; k < K; ++k) {
    UserState u;
    u.aod_rad = 0.1;
    u.aoa_at_bs_rad = deg_to_rad(-20);
    u.delay_s = 2e-7;
    u.complex_gain = {1.0, 0.3};
    u.reflected_paths = {{0, 5e-7, 0.6, {0.4, -0.5}}};
    sc.users.push_back(u);
  }
  sc.noise.noise_variance = 1.0;
  sc.bs_power_max_w = 1.0;
  sc.user_power_max_w = 0.5;
  return sc;
}

VectorXcd beam(double angle, int n, double power) {
  return std::sqrt(power / n) * steering_vector(angle, n, 0.5).conjugate();
}

}  // namespace

TEST_SUITE("boundary") {
  TEST_CASE("sensing-centric point beats a rank-1 beam grid") {
    const auto sc = desk();
    BoundaryQuery q;
    q.eta = design_lloyd_max(2).distortion_factor;
    const BoundaryModel m(sc, q);
    const auto p0 = m.solve_p0(0.0);
    REQUIRE(p0.ok());
    double best = INFINITY;
    for (int a = -90; a <= 90; ++a)
      for (int b = -90; b <= 90; b += 1) {
        const VectorXcd f = beam(deg_to_rad(a), 4, sc.bs_power_max_w);
        const VectorXcd fu = beam(deg_to_rad(b), 2, sc.user_power_max_w);
        best = std::min(best, m.crb(f * f.adjoint(), {fu * fu.adjoint()}));
      }
    CHECK(p0.crb_rad2 <= best * (1 + 1e-6));
    // Single target: the optimum puts each power cap on the top eigenvector of its FIM weight.
    const auto& map = m.fim_map();
    const auto top = [](const MatrixXcd& Q) {
      const MatrixXcd H = 0.5 * (Q + Q.adjoint());
      return Eigen::SelfAdjointEigenSolver<MatrixXcd>(H).eigenvalues().maxCoeff();
    };
    const double fim = sc.bs_power_max_w * top(map.bs[0][0]) + sc.user_power_max_w * top(map.user[0][0][0]);
    CHECK(p0.crb_rad2 == doctest::Approx(1.0 / fim).epsilon(1e-6));
    CHECK(std::abs(p0.epigraph_t - p0.crb_rad2) < 1e-6 * p0.crb_rad2);
    CHECK(p0.R0.trace().real() <= sc.bs_power_max_w * (1 + 1e-7));
  }

  TEST_CASE("communication-centric point matches the eigen optimum") {
    const auto sc = desk();
    BoundaryQuery q;
    const BoundaryModel m(sc, q);
    const auto p1 = m.solve_p1(kNoCrbCeiling);
    REQUIRE(p1.ok());
    const double eig = sc.user_power_max_w *
                       Eigen::SelfAdjointEigenSolver<MatrixXcd>(m.rate_weights()[0]).eigenvalues().maxCoeff();
    CHECK(p1.rate_bits_per_use == doctest::Approx(eig).epsilon(1e-6));
    CHECK(m.max_rate_analytic() == doctest::Approx(eig).epsilon(1e-12));
    // R0 carries no rate, so only the user covariance is pinned down.
    CHECK(recover_precoder(p1.Rk[0]).rank1_gap < 1e-3);
  }

  TEST_CASE("ceiling at the sensing optimum keeps at least its rate") {
    const auto sc = desk();
    const BoundaryModel m(sc, BoundaryQuery{});
    const auto p0 = m.solve_p0(0.0);
    const auto p1 = m.solve_p1(p0.crb_rad2 * (1 + 1e-7));
    REQUIRE(p1.ok());
    CHECK(p1.rate_bits_per_use >= p0.rate_bits_per_use * (1 - 1e-7));
    CHECK_THROWS_AS(m.solve_p1(p0.crb_rad2 * 0.5), InfeasibleError);
    CHECK_THROWS_AS(m.solve_p0(m.max_rate_analytic() * 1.01), InfeasibleError);
  }

  TEST_CASE("monostatic CRB scales with the BS power") {
    auto sc = desk(0);
    const auto a = solve_p0(sc, BoundaryQuery{});
    sc.bs_power_max_w *= 4;
    const auto b = solve_p0(sc, BoundaryQuery{});
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(b.crb_rad2 == doctest::Approx(a.crb_rad2 / 4).epsilon(1e-6));
    const auto p1 = solve_p1(sc, BoundaryQuery{});
    CHECK(p1.rate_bits_per_use == 0.0);
  }

  TEST_CASE("frontier endpoints and monotonicity") {
    const auto sc = desk();
    const BoundaryModel m(sc, BoundaryQuery{});
    const auto p0 = m.solve_p0(0.0);
    const auto fr = trace_frontier(sc, 2, BoundaryQuery{});
    REQUIRE(fr.points.size() == 2);
    CHECK(fr.points[0].crb_rad2 == doctest::Approx(p0.crb_rad2).epsilon(1e-6));
    CHECK(fr.points[1].rate_bits_per_use == doctest::Approx(fr.mu_max).epsilon(1e-5));

    const auto full = trace_frontier(sc, 8, BoundaryQuery{});
    CHECK(full.monotonicity_violations == 0);
    for (const auto& p : full.points) {
      CHECK(p.ok());
      CHECK(p.rank1_gap < 1e-3);
    }
    for (size_t i = 1; i < full.points.size(); ++i)
      CHECK(full.points[i].crb_rad2 >= full.points[i - 1].crb_rad2 * (1 - 1e-6));
  }

  TEST_CASE("mu grid") {
    const auto g = default_mu_grid(10.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == doctest::Approx(0.01));
    CHECK(g[4] == 10.0);
  }

  TEST_CASE("precoder recovery") {
    Rng rng(1);
    const VectorXcd f = test::random_vector(4, rng);
    const auto r = recover_precoder(f * f.adjoint());
    CHECK(r.rank1_gap < 1e-12);
    CHECK(!r.degenerate);
    CHECK(std::abs(std::abs(r.vector.dot(f)) - f.squaredNorm()) < 1e-10);
    const auto w = recover_precoder(MatrixXcd::Identity(3, 3));
    CHECK(w.rank1_gap == doctest::Approx(1.0));
    CHECK(w.degenerate);
  }

  TEST_CASE("dynamic range gate and min-bits scan") {
    auto sc = desk();
    sc.users[0].reflected_paths[0].complex_gain = sc.users[0].complex_gain;
    CHECK(path_dynamic_range_db(sc, 0, 0) == doctest::Approx(0.0));
    CHECK(dr_gated_options(sc, 1, 0.0).include_path[0][0]);
    sc.users[0].reflected_paths[0].complex_gain *= 1e-2;  // 40 dB below the direct path
    CHECK(!dr_gated_options(sc, 4, 0.0).include_path[0][0]);
    CHECK(dr_gated_options(sc, 7, 0.0).include_path[0][0]);

    SceneGeometry g;
    g.targets.push_back({});
    g.users.push_back({100.0, 0.0, {}});
    ArrayConfig array;
    array.user_tx_antennas = {4};
    const auto rows = min_bits_scan(g, array, 24e9, MinBitsScan{}, 3);
    REQUIRE(rows.size() == 200);
    for (size_t i = 1; i < rows.size(); ++i) {
      CHECK(rows[i].dr_sig_db >= rows[i - 1].dr_sig_db);
      CHECK(rows[i].min_bits >= rows[i - 1].min_bits);
    }
  }
}
