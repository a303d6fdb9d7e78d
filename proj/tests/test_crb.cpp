#include <cmath>

#include "doctest.h"
#include "hrf/crb.hpp"
#include "hrf/estimator.hpp"
#include "hrf/quantizer.hpp"
#include "support.hpp"

using namespace hrf;

namespace {

double column_error(const std::vector<MatrixXcd>& J, size_t col, const std::vector<VectorXcd>& fd) {
  double num = 0.0, den = 0.0;
  for (size_t l = 0; l < J.size(); ++l) {
    num += (J[l].col(col) - fd[l]).squaredNorm();
    den += fd[l].squaredNorm();
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_SUITE("crb") {
  TEST_CASE("parameter vector layout") {
    const auto sc = test::random_scenario(2, 2, 1);
    const auto psi = ParameterVector::for_scenario(sc);
    CHECK(psi.size() == 5 * 2 + 5 * 2 + 4 * 4);
    CHECK(psi[0].name() == "theta_tar[0]");
    CHECK(psi.index_of({ParamKind::TargetAoa, 1}) == 5);
    CHECK(ParameterVector::target_aoas(sc).size() == 2);
  }

  TEST_CASE("analytic derivatives match finite differences") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto sc = test::random_scenario(2, 2, 100 + seed);
      Rng rng(seed);
      const auto pre = test::random_precoders(sc, rng);
      const auto sym = draw_symbols(sc.frame, rng);
      const auto psi = ParameterVector::for_scenario(sc);
      const auto J = jacobian(sc, pre, sym, psi);
      for (size_t i = 0; i < psi.size(); ++i) {
        const double err = column_error(J, i, test::finite_difference(sc, pre, sym, psi[i]));
        INFO(psi[i].name());
        CHECK(err < 1e-6);
      }
    }
  }

  TEST_CASE("trivial derivative cases") {
    auto sc = test::random_scenario(1, 0, 7);
    sc.targets[0].complex_gain = 0.0;
    Rng rng(1);
    const auto pre = test::random_precoders(sc, rng);
    const auto sym = constant_symbols(sc.frame);
    const ParameterVector basis({{ParamKind::TargetGainRe, 0}, {ParamKind::TargetDoppler, 0}, {ParamKind::TargetAoa, 0}});
    const auto J = jacobian(sc, pre, sym, basis);
    const auto ch = build_channels(sc, sc.sample_index);
    VectorXcd expect = VectorXcd::Zero(ch.num_rx);
    for (size_t mi = 0; mi < sc.frame.dl_subcarriers.size(); ++mi) {
      auto h = ch.echo[0][mi][0];
      h.scale = subcarrier_phase(sc.frame.dl_subcarriers[mi], 2 * sc.targets[0].one_way_delay_s, sc.sample_index,
                                 sc.frame);
      expect += h.apply(pre.bs_precoder);
    }
    CHECK((J[0].col(0) - expect).norm() < 1e-12);
    CHECK(J[0].col(1).norm() == 0.0);
    CHECK(J[1].col(2).norm() == 0.0);
  }

  TEST_CASE("quantizer weights") {
    const auto q1 = design_lloyd_max(1);
    CHECK(std::abs(quantizer_weight_sum(0.0, q1, 1.0) - 2 / kPi) < 1e-10);
    for (int b : {1, 3}) {
      const auto q = design_lloyd_max(b);
      for (double x : {-3.0, -0.2, 0.0, 0.7, 5.0})
        for (double w : quantizer_weight(x, q, 0.8)) CHECK(w >= 0.0);
      CHECK(quantizer_weight_sum(1e3, q, 1.0) < 1e-100);
      CHECK(quantizer_weight_sum(-1e3, q, 1.0) < 1e-100);
    }
  }

  TEST_CASE("ideal FIM closed form and noise scaling") {
    ScenarioConfig sc = test::random_scenario(1, 0, 3);
    sc.targets[0].doppler_hz = 0;
    Rng rng(2);
    const auto pre = test::random_precoders(sc, rng);
    const auto sym = draw_symbols(sc.frame, rng);
    const ParameterVector gr({{ParamKind::TargetGainRe, 0}});
    const auto J = jacobian(sc, pre, sym, gr);
    double c = 0.0;
    for (const auto& j : J) c += j.col(0).squaredNorm();
    CHECK(ideal_fim(sc, pre, sym, gr).matrix(0, 0) == doctest::Approx(2 * c / sc.noise.noise_variance));

    const auto psi = ParameterVector::for_scenario(sc);
    const MatrixXd F1 = ideal_fim(sc, pre, sym, psi).matrix;
    sc.noise.noise_variance *= 2;
    const MatrixXd F2 = ideal_fim(sc, pre, sym, psi).matrix;
    CHECK((F1 - 2 * F2).norm() <= 1e-12 * F1.norm());
  }

  TEST_CASE("zero signal carries no angle information") {
    auto sc = test::random_scenario(1, 0, 3);
    sc.targets[0].complex_gain = 0.0;
    Rng rng(2);
    const auto pre = test::random_precoders(sc, rng);
    const auto sym = draw_symbols(sc.frame, rng);
    const ParameterVector th({{ParamKind::TargetAoa, 0}});
    CHECK(ideal_fim(sc, pre, sym, th).matrix(0, 0) == 0.0);
    CHECK(quantized_fim(sc, pre, sym, design_lloyd_max(2), th).matrix(0, 0) == 0.0);
  }

  TEST_CASE("dense quantizer approaches the ideal FIM") {
    auto sc = test::random_scenario(1, 1, 21);
    sc.noise.noise_variance = 0.5;
    Rng rng(4);
    const auto pre = test::random_precoders(sc, rng);
    const auto sym = draw_symbols(sc.frame, rng);
    const auto basis = ParameterVector::target_aoas(sc);
    const double fq = quantized_fim(sc, pre, sym, design_lloyd_max(12), basis).matrix(0, 0);
    const double fi = ideal_fim(sc, pre, sym, basis).matrix(0, 0);
    CHECK(std::abs(fq / fi - 1) < 0.01);
  }

  TEST_CASE("quantized FIM matches score sampling") {
    // Two unknowns on a tiny monostatic instance; the empirical score covariance estimates the FIM.
    ScenarioConfig sc;
    sc.frame = make_frame(1, 1, 0, 2);
    sc.array.bs_tx_antennas = 2;
    sc.array.bs_rx_antennas = 2;
    sc.targets = {{0.3, 1e-7, 0.0, {0.8, 0.4}}};
    sc.noise.noise_variance = 0.6;
    Rng rng(6);
    const auto pre = test::random_precoders(sc, rng);
    const auto sym = constant_symbols(sc.frame);
    const auto spec = design_lloyd_max(2);
    const ParameterVector basis({{ParamKind::TargetAoa, 0}, {ParamKind::TargetGainRe, 0}});
    const Frame x = test::noiseless(sc, pre, sym);
    const auto stdv = agc_component_std(x, sc.noise.noise_variance);
    const MatrixXd F = quantized_fim(sc, pre, sym, spec, basis, stdv).matrix;

    std::vector<std::array<Frame, 2>> shifted(2);
    const double h = 1e-5;
    for (int p = 0; p < 2; ++p)
      for (int s = 0; s < 2; ++s) {
        ScenarioConfig t = sc;
        set_parameter_value(t, basis[p], parameter_value(sc, basis[p]) + (s ? h : -h));
        shifted[p][s] = test::noiseless(t, pre, sym);
      }
    const int n = 40000;
    MatrixXd acc = MatrixXd::Zero(2, 2), acc2 = MatrixXd::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
      const Frame y = quantize_frame(draw_received(x, sc.noise, derive_seed(9, i)), spec, stdv);
      Eigen::Vector2d s;
      for (int p = 0; p < 2; ++p)
        s[p] = (log_likelihood(y, shifted[p][1], &spec, stdv, sc.noise.noise_variance) -
                log_likelihood(y, shifted[p][0], &spec, stdv, sc.noise.noise_variance)) /
               (2 * h);
      const MatrixXd ss = s * s.transpose();
      acc += ss;
      acc2 += ss.cwiseProduct(ss);
    }
    const MatrixXd mean = acc / n;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double se = std::sqrt((acc2(a, b) / n - mean(a, b) * mean(a, b)) / n);
        INFO(a << "," << b << " mc=" << mean(a, b) << " fim=" << F(a, b) << " se=" << se);
        CHECK(std::abs(mean(a, b) - F(a, b)) < 3 * se);
      }
  }

  TEST_CASE("CRB from FIM") {
    FisherMatrix F;
    F.basis = ParameterVector({{ParamKind::TargetAoa, 0}, {ParamKind::TargetDelay, 0}});
    F.matrix = Eigen::Vector2d(4, 9).asDiagonal();
    auto r = crb_from_fim(F);
    CHECK(r.values[0] == doctest::Approx(0.25));
    CHECK(r.values[1] == doctest::Approx(1.0 / 9));
    F.matrix << 4, 1.5, 1.5, 2;
    r = crb_from_fim(F);
    CHECK(r.values[0] == doctest::Approx(2 / (8 - 2.25)));
    CHECK(crb_from_fim(F, {1}).values.size() == 1);

    F.matrix << 1, 1, 1, 1;
    try {
      crb_from_fim(F);
      FAIL("expected SingularFimError");
    } catch (const SingularFimError& e) {
      CHECK(e.unidentifiable.size() == 2);
    }
    F.matrix << 1, 0, 0, 0;
    try {
      crb_from_fim(F);
      FAIL("expected SingularFimError");
    } catch (const SingularFimError& e) {
      REQUIRE(e.unidentifiable.size() == 1);
      CHECK(e.unidentifiable[0] == "tau_tar[0]");
    }
  }
}
