#include <cmath>

#include "doctest.h"
#include "hrf/bussgang.hpp"
#include "hrf/crb.hpp"
#include "support.hpp"

using namespace hrf;

namespace {

// Expected ideal AoA FIM under independent symbols: one-hot symbol frames summed with symbol-power weights.
MatrixXd symbol_expected_fim(const ScenarioConfig& sc, const PrecoderSet& pre) {
  const auto basis = ParameterVector::target_aoas(sc);
  const int P = sc.num_targets();
  MatrixXd F = MatrixXd::Zero(P, P);
  SymbolFrame zero = constant_symbols(sc.frame, 0.0);
  for (int k = 0; k <= sc.num_users(); ++k)
    for (size_t mi = 0; mi < sc.frame.stream_subcarriers(k).size(); ++mi) {
      SymbolFrame s = zero;
      for (int l = 0; l < sc.frame.num_symbols; ++l) s.values[l][k][mi] = 1.0;
      F += sc.frame.symbol_power[k] * ideal_fim(sc, pre, s, basis).matrix;
    }
  return F;
}

}  // namespace

TEST_SUITE("bussgang") {
  TEST_CASE("signal covariance basics") {
    const auto sc = test::random_scenario(1, 2, 3);
    const auto ch = build_channels(sc, sc.sample_index);
    std::vector<MatrixXcd> zero(2, MatrixXcd::Zero(3, 3));
    CHECK(signal_covariance(ch, sc.frame, MatrixXcd::Zero(4, 4), zero, 0).norm() == 0.0);

    ScenarioConfig one = test::random_scenario(1, 1, 4);
    one.frame = make_frame(1, 1, 1, 1);
    one.frame.samples_per_symbol = 4;
    one.frame.symbol_power = {1.0, 0.7};
    const auto c1 = build_channels(one, one.sample_index);
    Rng rng(1);
    const VectorXcd f = test::random_vector(3, rng);
    const MatrixXcd R = signal_covariance(c1, one.frame, MatrixXcd::Zero(4, 4), {f * f.adjoint()}, 0);
    const VectorXcd hf = c1.uplink(0, 0, 0) * f;
    CHECK((R - 0.7 * hf * hf.adjoint()).norm() < 1e-12);
  }

  TEST_CASE("signal covariance against symbol draws") {
    auto sc = test::random_scenario(2, 2, 8);
    sc.frame.num_symbols = 1;
    // Normalize so entries are O(1) and the MC tolerance is meaningful.
    for (auto& u : sc.users) {
      u.complex_gain /= std::abs(u.complex_gain);
      for (auto& r : u.reflected_paths) r.complex_gain /= 2 * std::abs(r.complex_gain);
    }
    for (auto& t : sc.targets) t.complex_gain /= std::abs(t.complex_gain);
    Rng rng(2);
    std::vector<VectorXcd> fk;
    for (int k = 0; k < 2; ++k) fk.push_back(test::random_vector(3, rng).normalized() * 0.5);
    const auto pre = PrecoderSet::from_vectors(test::random_vector(4, rng).normalized(), fk);
    const auto ch = build_channels(sc, sc.sample_index);
    const MatrixXcd Rxx = signal_covariance(ch, sc.frame, pre.bs_covariance, pre.user_covariances, 0);
    const MatrixXcd Rfull =
        signal_covariance(ch, sc.frame, pre.bs_covariance, pre.user_covariances, 0, EchoTerm::Include);

    const int n = 1000000;
    MatrixXcd acc_ul = MatrixXcd::Zero(5, 5), acc_all = MatrixXcd::Zero(5, 5);
    std::vector<VectorXcd> xs;
    for (int i = 0; i < n; ++i) {
      auto sym = draw_symbols(sc.frame, rng);
      const VectorXcd all = synthesize_noiseless(ch, pre, sym)[0];
      for (auto& v : sym.values[0][0]) v = 0.0;
      const VectorXcd ul = synthesize_noiseless(ch, pre, sym)[0];
      acc_ul.noalias() += ul * ul.adjoint();
      acc_all.noalias() += all * all.adjoint();
    }
    acc_ul /= n;
    acc_all /= n;
    const double scale = std::max(1.0, Rxx.cwiseAbs().maxCoeff());
    CHECK((acc_ul - Rxx).cwiseAbs().maxCoeff() / scale < 5e-3);
    CHECK((acc_all - Rfull).cwiseAbs().maxCoeff() / std::max(1.0, Rfull.cwiseAbs().maxCoeff()) < 5e-3);
  }

  TEST_CASE("Bussgang covariances") {
    Rng rng(3);
    const VectorXcd a = test::random_vector(3, rng), b = test::random_vector(3, rng);
    const MatrixXcd Rxx = a * a.adjoint() + b * b.adjoint();
    const MatrixXcd Rzz = 0.3 * MatrixXcd::Identity(3, 3);
    const MatrixXcd Rrr = Rxx + Rzz;
    auto B = bussgang_covariances(Rxx, Rzz, Rrr, 0.0);
    CHECK((B.effective_noise_cov - Rzz).norm() < 1e-14);
    const double eta = 1 - 2 / kPi;
    B = bussgang_covariances(MatrixXcd::Zero(3, 3), Rzz, Rzz, eta, NoiseRegime::LowSnr);
    CHECK((B.effective_noise_cov - (2 / kPi) * Rzz).norm() < 1e-14);
    B = bussgang_covariances(Rxx, Rzz, Rrr, 0.2);
    const MatrixXcd expect = 0.64 * Rzz + 0.2 * 0.8 * MatrixXcd(Rrr.diagonal().asDiagonal());
    CHECK((B.effective_noise_cov - expect).norm() < 1e-14);
    CHECK((B.distortion_matrix - 0.8 * MatrixXcd::Identity(3, 3)).norm() < 1e-15);
  }

  TEST_CASE("arcsine law") {
    const auto I = arcsine_covariances_1bit(MatrixXcd::Identity(3, 3), MatrixXcd::Identity(3, 3));
    CHECK((I.quantized_cov - MatrixXcd::Identity(3, 3)).norm() < 1e-14);

    MatrixXcd R(2, 2);
    R << 1.0, 0.6, 0.6, 1.0;
    const auto A = arcsine_covariances_1bit(R, 0.1 * MatrixXcd::Identity(2, 2));
    CHECK(A.quantized_cov(0, 1).real() == doctest::Approx(2 / kPi * std::asin(0.6)));

    // Correlated complex Gaussians with unequal powers, sign-quantized to +-1/sqrt(2) per component.
    Rng rng(4);
    MatrixXcd C(3, 3);
    C << cd(1.0, 0), cd(0.3, 0.2), cd(-0.1, 0.4), cd(0, 0), cd(0.8, 0), cd(0.25, -0.3), cd(0, 0), cd(0, 0), cd(1.2, 0);
    const MatrixXcd Lc = C.adjoint();
    const MatrixXcd Rrr = Lc * Lc.adjoint();
    const auto ana = arcsine_covariances_1bit(Rrr, 0.2 * MatrixXcd::Identity(3, 3));
    const int n = 1000000;
    MatrixXcd acc = MatrixXcd::Zero(3, 3);
    const double s = 1 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i) {
      const VectorXcd r = Lc * test::random_vector(3, rng);
      VectorXcd q(3);
      for (int k = 0; k < 3; ++k) q[k] = cd(r[k].real() >= 0 ? s : -s, r[k].imag() >= 0 ? s : -s);
      acc.noalias() += q * q.adjoint();
    }
    acc /= n;
    CHECK((acc - ana.quantized_cov).cwiseAbs().maxCoeff() < 5e-3);
  }

  TEST_CASE("AoA FIM map equals the symbol-averaged ideal FIM at eta = 0") {
    for (std::uint64_t seed : {1, 2}) {
      const auto sc = test::random_scenario(2, 2, 40 + seed);
      Rng rng(seed);
      const auto pre = test::random_precoders(sc, rng);
      const MatrixXd Fmap = aoa_fim_map(sc, 0.0).evaluate(pre.bs_covariance, pre.user_covariances);
      const MatrixXd Fref = symbol_expected_fim(sc, pre);
      CHECK((Fmap - Fref).norm() <= 1e-10 * Fref.norm());
    }
  }

  TEST_CASE("AoA FIM map linearity and eta scaling") {
    const auto sc = test::random_scenario(2, 1, 5);
    Rng rng(5);
    const auto pre = test::random_precoders(sc, rng);
    const auto m = aoa_fim_map(sc, 0.0);
    const std::vector<MatrixXcd> zero{MatrixXcd::Zero(3, 3)};
    const MatrixXd a = m.evaluate(pre.bs_covariance, zero);
    const MatrixXd b = m.evaluate(2.0 * pre.bs_covariance, zero);
    CHECK((b - 2 * a).norm() < 1e-12 * a.norm());
    const MatrixXd q = aoa_fim_map(sc, 0.25).evaluate(pre.bs_covariance, pre.user_covariances);
    const MatrixXd i = m.evaluate(pre.bs_covariance, pre.user_covariances);
    CHECK((q - 0.75 * i).norm() < 1e-12 * i.norm());
    AoaFimOptions no_echo;
    no_echo.include_echo = false;
    CHECK(aoa_fim_map(sc, 0.0, no_echo).evaluate(pre.bs_covariance, zero).norm() == 0.0);
  }

  TEST_CASE("rate bounds") {
    const int N = 4;
    const MatrixXcd I = MatrixXcd::Identity(N, N);
    CHECK(rate_low_snr(2.0 * I, 0.0, 2.0) == doctest::Approx(N));
    CHECK(rate_low_snr(MatrixXcd::Zero(N, N), 0.3, 1.0) == 0.0);
    CHECK(rate_one_bit_low_snr(1.5 * I, 1.5) == doctest::Approx(2.0 * N / kPi));
    Rng rng(1);
    const VectorXcd v = test::random_vector(N, rng);
    const MatrixXcd Rxx = v * v.adjoint() + 0.2 * I;
    CHECK(rate_general(Rxx, 0.7 * I, 0.0) == doctest::Approx(shannon_rate(Rxx, 0.7)).epsilon(1e-14));
    CHECK(rate_to_throughput_kbps(1.0, make_frame(1, 1, 1)) == doctest::Approx(15.0));
    CHECK(rate_to_throughput_kbps(0.0, make_frame(1, 1, 1)) == 0.0);
    CHECK(rate_lower_bound(Rxx, I, 0.0, 1.0, RateModel::LowSnr).bits_per_use == doctest::Approx(shannon_rate(Rxx, 1.0)));
  }
}
