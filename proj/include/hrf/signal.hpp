#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hrf/quantizer.hpp"
#include "hrf/rng.hpp"
#include "hrf/scenario.hpp"

namespace hrf {

struct PrecoderSet {
  VectorXcd bs_precoder;
  std::vector<VectorXcd> user_precoders;
  MatrixXcd bs_covariance;
  std::vector<MatrixXcd> user_covariances;

  static PrecoderSet from_vectors(const VectorXcd& f, const std::vector<VectorXcd>& fk);
  // Power-capped uniform beams: f = sqrt(P/N) * a(theta) toward the given angles.
  static PrecoderSet steered(const ScenarioConfig& sc, double bs_angle, const std::vector<double>& user_angles);
  std::vector<std::string> violations(const ScenarioConfig& sc) const;
};

enum class Constellation { Gaussian, Qpsk };

// values[l][k][mi]: symbol of stream k (0 = downlink) on its mi-th subcarrier at OFDM symbol l.
struct SymbolFrame {
  std::vector<std::vector<std::vector<cd>>> values;

  cd operator()(int l, int k, int mi) const { return values[l][k][mi]; }
};

SymbolFrame draw_symbols(const FrameConfig& frame, Rng& rng, Constellation c = Constellation::Gaussian);
// Unit symbols on every subcarrier; handy for deterministic checks.
SymbolFrame constant_symbols(const FrameConfig& frame, cd value = {1.0, 0.0});

// One N_rx vector per OFDM symbol.
using Frame = std::vector<VectorXcd>;

Frame synthesize_noiseless(const ChannelSet& channels, const PrecoderSet& precoders, const SymbolFrame& symbols);
Frame draw_received(const Frame& noiseless, const NoiseModel& noise, std::uint64_t seed);
Frame quantize_frame(const Frame& received, const QuantizerSpec& spec, const std::vector<double>& component_std);

// Per-antenna real-component standard deviation seen by an ideal AGC.
std::vector<double> agc_component_std(const Frame& noiseless, double noise_variance);
// Mean |x|^2 over antennas and symbols.
double mean_signal_power(const Frame& frame);

MatrixXcd empirical_covariance(const std::vector<VectorXcd>& samples);

struct SampledFrame {
  Frame noiseless;
  Frame received;
  Frame quantized;
  SymbolFrame symbols;
};

SampledFrame sample_frame(const ScenarioConfig& sc, const PrecoderSet& precoders, const QuantizerSpec& spec,
                          std::uint64_t seed);

}  // namespace hrf
