#include "hrf/crb.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hrf/normal.hpp"

namespace hrf {

std::string ParamEntry::name() const {
  const std::string t = std::to_string(target), u = std::to_string(user), p = std::to_string(path);
  switch (kind) {
    case ParamKind::TargetAoa: return "theta_tar[" + t + "]";
    case ParamKind::TargetDoppler: return "fD[" + t + "]";
    case ParamKind::TargetDelay: return "tau_tar[" + t + "]";
    case ParamKind::TargetGainRe: return "gR_tar[" + t + "]";
    case ParamKind::TargetGainIm: return "gI_tar[" + t + "]";
    case ParamKind::UserAoaAtBs: return "theta_r[" + u + "]";
    case ParamKind::UserAod: return "theta_u[" + u + "]";
    case ParamKind::UserDelay: return "tau_u[" + u + "]";
    case ParamKind::UserGainRe: return "gR_u[" + u + "]";
    case ParamKind::UserGainIm: return "gI_u[" + u + "]";
    case ParamKind::PathDelay: return "phi[" + u + "," + p + "]";
    case ParamKind::PathAod: return "theta_ref[" + u + "," + p + "]";
    case ParamKind::PathGainRe: return "gR_ref[" + u + "," + p + "]";
    case ParamKind::PathGainIm: return "gI_ref[" + u + "," + p + "]";
  }
  return "?";
}

ParameterVector::ParameterVector(std::vector<ParamEntry> entries) : entries_(std::move(entries)) {
  for (size_t i = 0; i < entries_.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if (entries_[i] == entries_[j]) throw std::invalid_argument("duplicate parameter " + entries_[i].name());
}

ParameterVector ParameterVector::for_scenario(const ScenarioConfig& sc) {
  std::vector<ParamEntry> e;
  for (int i = 0; i < sc.num_targets(); ++i)
    for (auto k : {ParamKind::TargetAoa, ParamKind::TargetDoppler, ParamKind::TargetDelay, ParamKind::TargetGainRe,
                   ParamKind::TargetGainIm})
      e.push_back({k, i});
  for (int u = 0; u < sc.num_users(); ++u)
    for (auto k : {ParamKind::UserAoaAtBs, ParamKind::UserAod, ParamKind::UserDelay, ParamKind::UserGainRe,
                   ParamKind::UserGainIm})
      e.push_back({k, -1, u});
  for (int u = 0; u < sc.num_users(); ++u)
    for (int p = 0; p < static_cast<int>(sc.users[u].reflected_paths.size()); ++p)
      for (auto k : {ParamKind::PathDelay, ParamKind::PathAod, ParamKind::PathGainRe, ParamKind::PathGainIm})
        e.push_back({k, sc.users[u].reflected_paths[p].target_index, u, p});
  return ParameterVector(std::move(e));
}

ParameterVector ParameterVector::target_aoas(const ScenarioConfig& sc) {
  std::vector<ParamEntry> e;
  for (int i = 0; i < sc.num_targets(); ++i) e.push_back({ParamKind::TargetAoa, i});
  return ParameterVector(std::move(e));
}

std::optional<size_t> ParameterVector::find(const ParamEntry& e) const {
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i] == e) return i;
  return std::nullopt;
}

size_t ParameterVector::index_of(const ParamEntry& e) const {
  if (auto i = find(e)) return *i;
  throw std::out_of_range("parameter " + e.name() + " not in vector");
}

ParameterVector ParameterVector::subset(const std::vector<size_t>& indices) const {
  std::vector<ParamEntry> e;
  for (size_t i : indices) e.push_back(entries_.at(i));
  return ParameterVector(std::move(e));
}

ParameterVector ParameterVector::without(size_t index) const {
  if (index >= entries_.size()) throw std::out_of_range("parameter index out of range");
  std::vector<ParamEntry> e = entries_;
  e.erase(e.begin() + static_cast<std::ptrdiff_t>(index));
  return ParameterVector(std::move(e));
}

namespace {

ReflectedPath& path_of(ScenarioConfig& sc, const ParamEntry& e) { return sc.users.at(e.user).reflected_paths.at(e.path); }

double* slot(ScenarioConfig& sc, const ParamEntry& e) {
  auto re = [](cd& z) { return &reinterpret_cast<double(&)[2]>(z)[0]; };
  auto im = [](cd& z) { return &reinterpret_cast<double(&)[2]>(z)[1]; };
  switch (e.kind) {
    case ParamKind::TargetAoa: return &sc.targets.at(e.target).aoa_rad;
    case ParamKind::TargetDoppler: return &sc.targets.at(e.target).doppler_hz;
    case ParamKind::TargetDelay: return &sc.targets.at(e.target).one_way_delay_s;
    case ParamKind::TargetGainRe: return re(sc.targets.at(e.target).complex_gain);
    case ParamKind::TargetGainIm: return im(sc.targets.at(e.target).complex_gain);
    case ParamKind::UserAoaAtBs: return &sc.users.at(e.user).aoa_at_bs_rad;
    case ParamKind::UserAod: return &sc.users.at(e.user).aod_rad;
    case ParamKind::UserDelay: return &sc.users.at(e.user).delay_s;
    case ParamKind::UserGainRe: return re(sc.users.at(e.user).complex_gain);
    case ParamKind::UserGainIm: return im(sc.users.at(e.user).complex_gain);
    case ParamKind::PathDelay: return &path_of(sc, e).delay_s;
    case ParamKind::PathAod: return &path_of(sc, e).aod_to_target_rad;
    case ParamKind::PathGainRe: return re(path_of(sc, e).complex_gain);
    case ParamKind::PathGainIm: return im(path_of(sc, e).complex_gain);
  }
  return nullptr;
}

}  // namespace

double parameter_value(const ScenarioConfig& sc, const ParamEntry& e) {
  ScenarioConfig& mut = const_cast<ScenarioConfig&>(sc);
  return *slot(mut, e);
}

void set_parameter_value(ScenarioConfig& sc, const ParamEntry& e, double value) { *slot(sc, e) = value; }

namespace {

struct TargetCache {
  VectorXcd ar, ard;
  cd u, ud;  // a_t^T f and its angle derivative
};

struct UserCache {
  VectorXcd ar, ard;
  cd u, ud;
  std::vector<cd> path_u, path_ud;
};

cd tdot(const VectorXcd& a, const VectorXcd& f) { return (a.transpose() * f)(0); }

}  // namespace

std::vector<MatrixXcd> jacobian(const ScenarioConfig& sc, const PrecoderSet& pre, const SymbolFrame& sym,
                                const ParameterVector& basis) {
  sc.validate();
  if (auto v = pre.violations(sc); !v.empty()) throw DimensionError("precoders: " + v.front());
  const auto& fr = sc.frame;
  const auto& ar = sc.array;
  const double d = ar.element_spacing_wavelengths;
  const int Nr = ar.bs_rx_antennas;
  const int v = sc.sample_index;
  const double T = fr.symbol_duration();

  std::vector<TargetCache> tc(sc.num_targets());
  for (int i = 0; i < sc.num_targets(); ++i) {
    const double th = sc.targets[i].aoa_rad;
    tc[i].ar = steering_vector(th, Nr, d);
    tc[i].ard = steering_derivative(th, Nr, d);
    tc[i].u = tdot(steering_vector(th, ar.bs_tx_antennas, d), pre.bs_precoder);
    tc[i].ud = tdot(steering_derivative(th, ar.bs_tx_antennas, d), pre.bs_precoder);
  }
  std::vector<UserCache> uc(sc.num_users());
  for (int k = 0; k < sc.num_users(); ++k) {
    const auto& us = sc.users[k];
    const int nu = ar.user_tx_antennas[k];
    const auto& f = pre.user_precoders[k];
    uc[k].ar = steering_vector(us.aoa_at_bs_rad, Nr, d);
    uc[k].ard = steering_derivative(us.aoa_at_bs_rad, Nr, d);
    uc[k].u = tdot(steering_vector(us.aod_rad, nu, d), f);
    uc[k].ud = tdot(steering_derivative(us.aod_rad, nu, d), f);
    for (const auto& p : us.reflected_paths) {
      uc[k].path_u.push_back(tdot(steering_vector(p.aod_to_target_rad, nu, d), f));
      uc[k].path_ud.push_back(tdot(steering_derivative(p.aod_to_target_rad, nu, d), f));
    }
  }

  const int L = fr.num_symbols;
  std::vector<MatrixXcd> J(L, MatrixXcd::Zero(Nr, static_cast<Eigen::Index>(basis.size())));
  for (int l = 0; l < L; ++l) {
    auto doppler = [&](int i) { return std::polar(1.0, 2.0 * kPi * sc.targets[i].doppler_hz * l * T); };
    const double dop_rate = 2.0 * kPi * l * T;
    for (size_t col = 0; col < basis.size(); ++col) {
      const ParamEntry& e = basis[col];
      auto out = J[l].col(static_cast<Eigen::Index>(col));
      switch (e.kind) {
        case ParamKind::TargetAoa:
        case ParamKind::TargetDoppler:
        case ParamKind::TargetDelay:
        case ParamKind::TargetGainRe:
        case ParamKind::TargetGainIm: {
          const int i = e.target;
          const auto& t = sc.targets[i];
          const auto& c = tc[i];
          cd acc_echo = 0.0, acc_echo_aoa_ar = 0.0;
          for (size_t mi = 0; mi < fr.dl_subcarriers.size(); ++mi) {
            const int m = fr.dl_subcarriers[mi];
            const cd b = sym(l, 0, static_cast<int>(mi));
            const cd cm = subcarrier_phase(m, 2.0 * t.one_way_delay_s, v, fr);
            cd s;
            switch (e.kind) {
              case ParamKind::TargetAoa: s = b * t.complex_gain * cm; break;
              case ParamKind::TargetDoppler: s = kJ * dop_rate * b * t.complex_gain * cm * c.u; break;
              case ParamKind::TargetDelay:
                s = b * t.complex_gain * 2.0 * subcarrier_phase_derivative(m, 2.0 * t.one_way_delay_s, v, fr) * c.u;
                break;
              case ParamKind::TargetGainRe: s = b * cm * c.u; break;
              default: s = kJ * b * cm * c.u; break;
            }
            acc_echo += s;
            if (e.kind == ParamKind::TargetAoa) acc_echo_aoa_ar += s;
          }
          const cd dop = doppler(i);
          if (e.kind == ParamKind::TargetAoa) {
            out += dop * acc_echo_aoa_ar * (c.u * c.ard + c.ud * c.ar);
          } else {
            out += dop * acc_echo * c.ar;
          }
          if (e.kind == ParamKind::TargetAoa || e.kind == ParamKind::TargetDoppler) {
            // Reflected uplink paths bouncing off this target.
            cd acc = 0.0;
            for (int k = 0; k < sc.num_users(); ++k) {
              const auto& us = sc.users[k];
              for (size_t p = 0; p < us.reflected_paths.size(); ++p) {
                const auto& rp = us.reflected_paths[p];
                if (rp.target_index != i) continue;
                for (size_t mi = 0; mi < fr.ul_subcarriers[k].size(); ++mi) {
                  const int m = fr.ul_subcarriers[k][mi];
                  acc += sym(l, k + 1, static_cast<int>(mi)) * rp.complex_gain * subcarrier_phase(m, rp.delay_s, v, fr) *
                         uc[k].path_u[p];
                }
              }
            }
            if (e.kind == ParamKind::TargetAoa) out += dop * acc * c.ard;
            else out += kJ * dop_rate * dop * acc * c.ar;
          }
          break;
        }
        case ParamKind::UserAoaAtBs:
        case ParamKind::UserAod:
        case ParamKind::UserDelay:
        case ParamKind::UserGainRe:
        case ParamKind::UserGainIm: {
          const int k = e.user;
          const auto& us = sc.users[k];
          cd acc = 0.0;
          for (size_t mi = 0; mi < fr.ul_subcarriers[k].size(); ++mi) {
            const int m = fr.ul_subcarriers[k][mi];
            const cd b = sym(l, k + 1, static_cast<int>(mi));
            const cd cm = subcarrier_phase(m, us.delay_s, v, fr);
            switch (e.kind) {
              case ParamKind::UserAoaAtBs: acc += b * us.complex_gain * cm * uc[k].u; break;
              case ParamKind::UserAod: acc += b * us.complex_gain * cm * uc[k].ud; break;
              case ParamKind::UserDelay:
                acc += b * us.complex_gain * subcarrier_phase_derivative(m, us.delay_s, v, fr) * uc[k].u;
                break;
              case ParamKind::UserGainRe: acc += b * cm * uc[k].u; break;
              default: acc += kJ * b * cm * uc[k].u; break;
            }
          }
          out += acc * (e.kind == ParamKind::UserAoaAtBs ? uc[k].ard : uc[k].ar);
          break;
        }
        case ParamKind::PathDelay:
        case ParamKind::PathAod:
        case ParamKind::PathGainRe:
        case ParamKind::PathGainIm: {
          const int k = e.user;
          const auto& rp = sc.users[k].reflected_paths[e.path];
          const int i = rp.target_index;
          cd acc = 0.0;
          for (size_t mi = 0; mi < fr.ul_subcarriers[k].size(); ++mi) {
            const int m = fr.ul_subcarriers[k][mi];
            const cd b = sym(l, k + 1, static_cast<int>(mi));
            const cd cm = subcarrier_phase(m, rp.delay_s, v, fr);
            const cd u = uc[k].path_u[e.path];
            switch (e.kind) {
              case ParamKind::PathDelay:
                acc += b * rp.complex_gain * subcarrier_phase_derivative(m, rp.delay_s, v, fr) * u;
                break;
              case ParamKind::PathAod: acc += b * rp.complex_gain * cm * uc[k].path_ud[e.path]; break;
              case ParamKind::PathGainRe: acc += b * cm * u; break;
              default: acc += kJ * b * cm * u; break;
            }
          }
          out += doppler(i) * acc * tc[i].ar;
          break;
        }
      }
    }
  }
  return J;
}

VectorXcd partial_derivatives(const ParameterVector& psi, const ScenarioConfig& sc, const PrecoderSet& pre,
                              const SymbolFrame& sym, int n, int l, int v) {
  if (n < 0 || n >= sc.array.bs_rx_antennas) throw std::out_of_range("antenna index out of range");
  if (l < 0 || l >= sc.frame.num_symbols) throw std::out_of_range("symbol index out of range");
  ScenarioConfig at_v = sc;
  at_v.sample_index = v;
  ScenarioConfig one = at_v;
  one.frame.num_symbols = l + 1;
  SymbolFrame s;
  s.values.assign(sym.values.begin(), sym.values.begin() + l + 1);
  return jacobian(one, pre, s, psi)[l].row(n).transpose();
}

std::vector<double> quantizer_weight(double x, const QuantizerSpec& spec, double sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("noise standard deviation must be positive");
  const double s = sigma / std::sqrt(2.0);
  std::vector<double> w(spec.num_cells(), 0.0);
  for (int c = 0; c < spec.num_cells(); ++c) {
    const double lo = spec.lower_edge(c), hi = spec.upper_edge(c);
    const double beta = std::isinf(lo) ? lo : (lo * spec.input_std - x) / s;
    const double alpha = std::isinf(hi) ? hi : (hi * spec.input_std - x) / s;
    const double p = normal_cell_probability(beta, alpha);
    if (p < 1e-300) continue;
    const double dphi = (std::isinf(alpha) ? 0.0 : normal_pdf(alpha)) - (std::isinf(beta) ? 0.0 : normal_pdf(beta));
    w[c] = dphi * dphi / p;
  }
  return w;
}

double quantizer_weight_sum(double x, const QuantizerSpec& spec, double sigma) {
  double s = 0.0;
  for (double w : quantizer_weight(x, spec, sigma)) s += w;
  return s;
}

namespace {

// Accumulates J^T diag(w) J for real matrix J (N x D).
void accumulate(MatrixXd& F, const MatrixXd& J, const VectorXd& w) {
  F.noalias() += J.transpose() * w.asDiagonal() * J;
}

}  // namespace

FimParts quantized_fim_parts(const ScenarioConfig& sc, const PrecoderSet& pre, const SymbolFrame& sym,
                             const QuantizerSpec& spec, const ParameterVector& basis,
                             std::vector<double> component_std) {
  const double s2 = sc.noise.noise_variance;
  const double sigma = std::sqrt(s2);
  const Frame x = synthesize_noiseless(build_channels(sc, sc.sample_index), pre, sym);
  if (component_std.empty()) component_std = agc_component_std(x, s2);
  const auto J = jacobian(sc, pre, sym, basis);
  const Eigen::Index D = static_cast<Eigen::Index>(basis.size());
  FimParts parts{MatrixXd::Zero(D, D), MatrixXd::Zero(D, D)};
  const int N = sc.array.bs_rx_antennas;
  for (size_t l = 0; l < J.size(); ++l) {
    VectorXd wr(N), wi(N);
    for (int n = 0; n < N; ++n) {
      const QuantizerSpec q = spec.scaled(component_std.at(n));
      wr[n] = quantizer_weight_sum(x[l][n].real(), q, sigma);
      wi[n] = quantizer_weight_sum(x[l][n].imag(), q, sigma);
    }
    accumulate(parts.real, J[l].real(), wr);
    accumulate(parts.imag, J[l].imag(), wi);
  }
  parts.real *= 2.0 / s2;
  parts.imag *= 2.0 / s2;
  return parts;
}

FisherMatrix quantized_fim(const ScenarioConfig& sc, const PrecoderSet& pre, const SymbolFrame& sym,
                           const QuantizerSpec& spec, const ParameterVector& basis, std::vector<double> component_std) {
  auto parts = quantized_fim_parts(sc, pre, sym, spec, basis, std::move(component_std));
  MatrixXd F = parts.real + parts.imag;
  F = 0.5 * (F + F.transpose());
  return {F, basis, FimKind::ExactQuantized};
}

FisherMatrix ideal_fim(const ScenarioConfig& sc, const PrecoderSet& pre, const SymbolFrame& sym,
                       const ParameterVector& basis) {
  const auto J = jacobian(sc, pre, sym, basis);
  const Eigen::Index D = static_cast<Eigen::Index>(basis.size());
  MatrixXd F = MatrixXd::Zero(D, D);
  for (const auto& Jl : J) {
    const MatrixXd re = Jl.real(), im = Jl.imag();
    F.noalias() += re.transpose() * re + im.transpose() * im;
  }
  F *= 2.0 / sc.noise.noise_variance;
  F = 0.5 * (F + F.transpose());
  return {F, basis, FimKind::Ideal};
}

FisherMatrix restrict_fim(const FisherMatrix& F, const std::vector<size_t>& idx) {
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  MatrixXd S(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) S(a, b) = F.matrix(idx[a], idx[b]);
  return {S, F.basis.subset(idx), F.kind};
}

CrbResult crb_from_fim(const FisherMatrix& F, const std::vector<size_t>& which, double cap) {
  const Eigen::Index D = F.matrix.rows();
  if (D == 0 || F.matrix.cols() != D) throw DimensionError("FIM must be square and non-empty");
  std::vector<size_t> idx = which;
  if (idx.empty())
    for (Eigen::Index i = 0; i < D; ++i) idx.push_back(static_cast<size_t>(i));

  const VectorXd diag = F.matrix.diagonal();
  const double dmax = diag.maxCoeff();
  std::vector<std::string> dead;
  for (Eigen::Index i = 0; i < D; ++i)
    if (!(diag[i] > dmax * 1e-300) || !(diag[i] > 0)) dead.push_back(F.basis[i].name());
  if (!dead.empty()) throw SingularFimError("FIM has parameters without information", dead, INFINITY);

  const VectorXd scale = diag.cwiseSqrt().cwiseInverse();
  const MatrixXd C = scale.asDiagonal() * F.matrix * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
  const VectorXd ev = es.eigenvalues();
  const double cond = ev[0] > 0 ? ev[D - 1] / ev[0] : INFINITY;
  if (!(cond <= cap)) {
    std::set<size_t> bad;
    for (Eigen::Index k = 0; k < D; ++k) {
      if (ev[k] > 0 && ev[D - 1] / ev[k] <= cap) break;
      for (Eigen::Index i = 0; i < D; ++i)
        if (es.eigenvectors()(i, k) * es.eigenvectors()(i, k) > 0.05) bad.insert(static_cast<size_t>(i));
    }
    std::vector<std::string> names;
    for (size_t i : bad) names.push_back(F.basis[i].name());
    throw SingularFimError("FIM is ill-conditioned (normalized condition number " + std::to_string(cond) + ")",
                           names, cond);
  }
  const MatrixXd Cinv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  CrbResult r;
  r.condition_number = cond;
  for (size_t i : idx) {
    if (i >= static_cast<size_t>(D)) throw std::out_of_range("CRB index out of range");
    r.params.push_back(F.basis[i]);
    r.values.push_back(Cinv(i, i) * scale[i] * scale[i]);
  }
  return r;
}

}  // namespace hrf
