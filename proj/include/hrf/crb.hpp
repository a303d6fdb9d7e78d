#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hrf/quantizer.hpp"
#include "hrf/scenario.hpp"
#include "hrf/signal.hpp"

namespace hrf {

enum class ParamKind {
  TargetAoa,
  TargetDoppler,
  TargetDelay,
  TargetGainRe,
  TargetGainIm,
  UserAoaAtBs,
  UserAod,
  UserDelay,
  UserGainRe,
  UserGainIm,
  PathDelay,
  PathAod,
  PathGainRe,
  PathGainIm,
};

// target is set for target entries; user and path (index into reflected_paths) for user entries.
struct ParamEntry {
  ParamKind kind;
  int target = -1;
  int user = -1;
  int path = -1;

  std::string name() const;
  bool operator==(const ParamEntry&) const = default;
};

class ParameterVector {
 public:
  ParameterVector() = default;
  explicit ParameterVector(std::vector<ParamEntry> entries);
  static ParameterVector for_scenario(const ScenarioConfig& sc);
  // Angles of arrival of every target, in target order.
  static ParameterVector target_aoas(const ScenarioConfig& sc);

  size_t size() const { return entries_.size(); }
  const ParamEntry& operator[](size_t i) const { return entries_.at(i); }
  const std::vector<ParamEntry>& entries() const { return entries_; }
  size_t index_of(const ParamEntry& e) const;
  std::optional<size_t> find(const ParamEntry& e) const;
  ParameterVector subset(const std::vector<size_t>& indices) const;
  ParameterVector without(size_t index) const;

 private:
  std::vector<ParamEntry> entries_;
};

double parameter_value(const ScenarioConfig& sc, const ParamEntry& e);
void set_parameter_value(ScenarioConfig& sc, const ParamEntry& e, double value);

// Analytic derivatives dx_{n,l}/dpsi: one N_rx x |basis| matrix per OFDM symbol.
std::vector<MatrixXcd> jacobian(const ScenarioConfig& sc, const PrecoderSet& precoders, const SymbolFrame& symbols,
                                const ParameterVector& basis);

// Gradient of x_{n,l}[v] over the entries of psi.
VectorXcd partial_derivatives(const ParameterVector& psi, const ScenarioConfig& sc, const PrecoderSet& precoders,
                              const SymbolFrame& symbols, int n, int l, int v);

// Per-cell weights Lambda_b for one real component with mean x and complex noise variance sigma^2.
std::vector<double> quantizer_weight(double x, const QuantizerSpec& spec, double sigma);
double quantizer_weight_sum(double x, const QuantizerSpec& spec, double sigma);

enum class FimKind { ExactQuantized, Ideal, LowSnrBound };

struct FisherMatrix {
  MatrixXd matrix;
  ParameterVector basis;
  FimKind kind = FimKind::Ideal;
};

struct FimParts {
  MatrixXd real;
  MatrixXd imag;
};

// component_std: AGC scale per receive antenna; empty selects the ideal AGC of agc_component_std.
FimParts quantized_fim_parts(const ScenarioConfig& sc, const PrecoderSet& precoders, const SymbolFrame& symbols,
                             const QuantizerSpec& spec, const ParameterVector& basis,
                             std::vector<double> component_std = {});
FisherMatrix quantized_fim(const ScenarioConfig& sc, const PrecoderSet& precoders, const SymbolFrame& symbols,
                           const QuantizerSpec& spec, const ParameterVector& basis,
                           std::vector<double> component_std = {});
FisherMatrix ideal_fim(const ScenarioConfig& sc, const PrecoderSet& precoders, const SymbolFrame& symbols,
                       const ParameterVector& basis);

// FIM of a subset with the remaining parameters treated as known.
FisherMatrix restrict_fim(const FisherMatrix& F, const std::vector<size_t>& indices);

struct CrbResult {
  std::vector<ParamEntry> params;
  std::vector<double> values;
  // Condition number of the diagonally normalized FIM.
  double condition_number = 0.0;
};

struct SingularFimError : Error {
  SingularFimError(const std::string& msg, std::vector<std::string> params, double cond)
      : Error(msg), unidentifiable(std::move(params)), condition_number(cond) {}
  std::vector<std::string> unidentifiable;
  double condition_number;
};

inline constexpr double kDefaultConditionCap = 1e12;

// which: indices into F.basis; empty means all.
CrbResult crb_from_fim(const FisherMatrix& F, const std::vector<size_t>& which = {},
                       double condition_cap = kDefaultConditionCap);

}  // namespace hrf
