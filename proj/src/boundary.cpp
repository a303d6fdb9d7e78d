#include "hrf/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "hrf/quantizer.hpp"
#include "hrf/rng.hpp"

namespace hrf {

namespace {

// Hermitian basis of n x n matrices: diagonal units, then (E_pq + E_qp) and j(E_pq - E_qp) for p < q.
MatrixXcd hermitian_basis(int n, int idx) {
  MatrixXcd E = MatrixXcd::Zero(n, n);
  if (idx < n) {
    E(idx, idx) = 1.0;
    return E;
  }
  int k = (idx - n) / 2;
  const bool imag = (idx - n) % 2 == 1;
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q, --k)
      if (k == 0) {
        if (imag) {
          E(p, q) = kJ;
          E(q, p) = -kJ;
        } else {
          E(p, q) = 1.0;
          E(q, p) = 1.0;
        }
        return E;
      }
  return E;
}

MatrixXd real_embedding(const MatrixXcd& H) {
  const Eigen::Index n = H.rows();
  MatrixXd M(2 * n, 2 * n);
  M << H.real(), -H.imag(), H.imag(), H.real();
  return M;
}

MatrixXcd assemble(const VectorXd& y, int offset, int n) {
  MatrixXcd R = MatrixXcd::Zero(n, n);
  for (int b = 0; b < n * n; ++b) R += y[offset + b] * hermitian_basis(n, b);
  return R;
}

double re_trace_product(const MatrixXcd& A, const MatrixXcd& B) { return A.cwiseProduct(B.transpose()).sum().real(); }

double crb_entry(const MatrixXd& F, int i) {
  Eigen::LDLT<MatrixXd> ldlt(F);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::numeric_limits<double>::infinity();
  VectorXd e = VectorXd::Zero(F.rows());
  e[i] = 1.0;
  const double v = e.dot(ldlt.solve(e));
  return v > 0 && std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

BoundaryModel::BoundaryModel(const ScenarioConfig& sc, const BoundaryQuery& base) : sc_(&sc), q_(base) {
  sc.validate();
  if (q_.target < 0 || q_.target >= sc.num_targets()) throw std::out_of_range("target index out of range");
  if (!(q_.eta >= 0 && q_.eta < 1)) throw std::invalid_argument("eta must lie in [0, 1)");
  cap_bs_ = q_.bs_power_max_w > 0 ? q_.bs_power_max_w : sc.bs_power_max_w;
  cap_u_ = q_.user_power_max_w > 0 ? q_.user_power_max_w : sc.user_power_max_w;
  map_ = aoa_fim_map(sc, q_.eta, q_.fim_options);
  channels_ = build_channels(sc, sc.sample_index);

  const auto& fr = sc.frame;
  const double c = (1.0 - q_.eta) / sc.noise.noise_variance;
  const int L = fr.num_symbols;
  for (int k = 0; k < sc.num_users(); ++k) {
    const int nu = sc.array.user_tx_antennas[k];
    MatrixXcd W = MatrixXcd::Zero(nu, nu);
    for (int l = 0; l < L; ++l)
      for (size_t mi = 0; mi < fr.ul_subcarriers[k].size(); ++mi) {
        const MatrixXcd H = channels_.uplink(l, k, static_cast<int>(mi));
        W += H.adjoint() * H;
      }
    W *= c * fr.symbol_power[k + 1] / L;
    W_.push_back(0.5 * (W + W.adjoint()));
  }

  const int Nt = sc.array.bs_tx_antennas;
  std::vector<MatrixXcd> Rk_ref;
  for (int k = 0; k < sc.num_users(); ++k) {
    const int nu = sc.array.user_tx_antennas[k];
    Rk_ref.push_back(cap_u_ / nu * MatrixXcd::Identity(nu, nu));
  }
  const MatrixXd Fref = map_.evaluate(cap_bs_ / Nt * MatrixXcd::Identity(Nt, Nt), Rk_ref);
  fim_scale_ = Fref.trace() / std::max(1, sc.num_targets());
  if (!(fim_scale_ > 0)) fim_scale_ = 1.0;
  rate_scale_ = max_rate_analytic();
  if (!(rate_scale_ > 0)) rate_scale_ = 1.0;
}

double BoundaryModel::max_rate_analytic() const {
  double r = 0.0;
  for (const auto& W : W_) r += cap_u_ * Eigen::SelfAdjointEigenSolver<MatrixXcd>(W).eigenvalues().maxCoeff();
  return r;
}

double BoundaryModel::surrogate_rate(const std::vector<MatrixXcd>& Rk) const {
  double r = 0.0;
  for (size_t k = 0; k < W_.size(); ++k) r += re_trace_product(Rk.at(k), W_[k]);
  return r;
}

double BoundaryModel::crb(const MatrixXcd& R0, const std::vector<MatrixXcd>& Rk) const {
  return crb_entry(map_.evaluate(R0, Rk), q_.target);
}

sdp::Problem BoundaryModel::build(bool with_schur, double gamma_scaled, bool rate_objective, double mu) const {
  const auto& sc = *sc_;
  const int P = sc.num_targets();
  const int K = sc.num_users();
  sdp::Problem prob;

  std::vector<int> sizes{sc.array.bs_tx_antennas};
  for (int k = 0; k < K; ++k) sizes.push_back(sc.array.user_tx_antennas[k]);
  std::vector<double> caps{cap_bs_};
  for (int k = 0; k < K; ++k) caps.push_back(cap_u_);

  const int schur = with_schur ? prob.add_block(P + 1) : -1;
  if (with_schur) {
    prob.c[schur](q_.target, P) = -1.0;
    prob.c[schur](P, q_.target) = -1.0;
    prob.c[schur](P, P) = std::isfinite(gamma_scaled) ? -gamma_scaled : 0.0;
  }
  std::vector<int> rate_blocks;
  if (!rate_objective && mu > 0 && K > 0) {
    if (q_.per_user_rate) {
      for (int k = 0; k < K; ++k) {
        rate_blocks.push_back(prob.add_block(1));
        prob.c[rate_blocks.back()](0, 0) = mu / rate_scale_;
      }
    } else {
      rate_blocks.push_back(prob.add_block(1));
      prob.c[rate_blocks.back()](0, 0) = mu / rate_scale_;
    }
  }

  for (size_t c = 0; c < sizes.size(); ++c) {
    const int n = sizes[c];
    const int psd = prob.add_block(2 * n);
    const int power = prob.add_block(1);
    prob.c[power](0, 0) = -1.0;
    for (int b = 0; b < n * n; ++b) {
      const MatrixXcd E = hermitian_basis(n, b);
      double rate = 0.0;
      if (c > 0) rate = caps[c] * re_trace_product(E, W_[c - 1]) / rate_scale_;
      const int var = prob.add_var(rate_objective ? -rate : 0.0);
      prob.set(var, psd, real_embedding(E));
      prob.set(var, power, MatrixXd::Constant(1, 1, -E.trace().real()));
      if (with_schur) {
        MatrixXd S = MatrixXd::Zero(P + 1, P + 1);
        for (int i = 0; i < P; ++i)
          for (int j = 0; j < P; ++j) {
            const MatrixXcd& Q = c == 0 ? map_.bs[i][j] : map_.user[c - 1][i][j];
            S(i, j) = caps[c] * re_trace_product(E, Q) / fim_scale_;
          }
        S = 0.5 * (S + S.transpose());
        if (S.squaredNorm() > 0) prob.set(var, schur, S);
      }
      if (c > 0 && !rate_blocks.empty() && rate != 0.0) {
        const int blk = q_.per_user_rate ? rate_blocks[c - 1] : rate_blocks[0];
        prob.set(var, blk, MatrixXd::Constant(1, 1, rate));
      }
    }
  }
  if (with_schur && !rate_objective) {
    const int t = prob.add_var(1.0);
    MatrixXd S = MatrixXd::Zero(P + 1, P + 1);
    S(P, P) = 1.0;
    prob.set(t, schur, S);
  }
  return prob;
}

BoundaryPoint BoundaryModel::finish(const sdp::Result& r, const std::vector<int>& offsets, int t_var, double mu,
                                    double gamma) const {
  const auto& sc = *sc_;
  BoundaryPoint pt;
  pt.mu = mu;
  pt.gamma = gamma;
  pt.solver_status = r.status;
  pt.duality_gap = r.relative_gap;
  pt.R0 = cap_bs_ * assemble(r.y, offsets[0], sc.array.bs_tx_antennas);
  for (int k = 0; k < sc.num_users(); ++k)
    pt.Rk.push_back(cap_u_ * assemble(r.y, offsets[k + 1], sc.array.user_tx_antennas[k]));
  if (t_var >= 0) pt.epigraph_t = r.y[t_var] / fim_scale_;
  pt.crb_rad2 = crb(pt.R0, pt.Rk);
  pt.rate_bits_per_use = surrogate_rate(pt.Rk);
  double logdet = 0.0;
  for (int l = 0; l < sc.frame.num_symbols; ++l)
    logdet += rate_low_snr(signal_covariance(channels_, sc.frame, pt.R0, pt.Rk, l), q_.eta, sc.noise.noise_variance);
  pt.rate_logdet_bits = logdet / sc.frame.num_symbols;
  pt.rate_kbps = rate_to_throughput_kbps(pt.rate_logdet_bits, sc.frame);

  auto take = [&](const MatrixXcd& R, double cap) {
    const auto rec = recover_precoder(R);
    if (R.trace().real() > 1e-6 * cap) pt.rank1_gap = std::max(pt.rank1_gap, rec.rank1_gap);
    return rec.vector;
  };
  pt.f = take(pt.R0, cap_bs_);
  for (const auto& R : pt.Rk) pt.fk.push_back(take(R, cap_u_));
  if (!pt.ok()) pt.note = std::string("solver: ") + sdp::status_name(r.status);
  else if (pt.rank1_gap > 1e-3) pt.note = "rank1-gap";
  return pt;
}

namespace {

std::vector<int> var_offsets(const ScenarioConfig& sc) {
  std::vector<int> off{0};
  int n = sc.array.bs_tx_antennas;
  int at = n * n;
  for (int k = 0; k < sc.num_users(); ++k) {
    off.push_back(at);
    at += sc.array.user_tx_antennas[k] * sc.array.user_tx_antennas[k];
  }
  return off;
}

}  // namespace

BoundaryPoint BoundaryModel::solve_p0(double mu) const {
  if (mu < 0) throw std::invalid_argument("rate floor must be non-negative");
  const double best = max_rate_analytic();
  if (q_.per_user_rate) {
    for (const auto& W : W_)
      if (mu > cap_u_ * Eigen::SelfAdjointEigenSolver<MatrixXcd>(W).eigenvalues().maxCoeff() * (1 + 1e-9))
        throw InfeasibleError("rate floor exceeds a user's best achievable rate");
  } else if (mu > best * (1 + 1e-9)) {
    throw InfeasibleError("rate floor " + std::to_string(mu) + " exceeds the best achievable rate " +
                          std::to_string(best));
  }
  const auto prob = build(true, 0.0, false, mu);
  const auto r = sdp::solve(prob, q_.solver);
  return finish(r, var_offsets(*sc_), prob.num_vars() - 1, mu, kNoCrbCeiling);
}

BoundaryPoint BoundaryModel::solve_p1(double gamma) const {
  if (!(gamma >= 0)) throw std::invalid_argument("CRB ceiling must be non-negative");
  const bool ceiling = std::isfinite(gamma);
  const auto prob = build(ceiling, gamma * fim_scale_, true, 0.0);
  const auto r = sdp::solve(prob, q_.solver);
  if (ceiling && r.status != sdp::Status::Optimal) {
    const auto best = solve_p0(0.0);
    if (best.ok() && gamma < best.crb_rad2 * (1 - 1e-6))
      throw InfeasibleError("CRB ceiling " + std::to_string(gamma) + " is below the best CRB " +
                            std::to_string(best.crb_rad2));
  }
  return finish(r, var_offsets(*sc_), -1, 0.0, gamma);
}

BoundaryPoint solve_p0(const ScenarioConfig& sc, const BoundaryQuery& query) {
  return BoundaryModel(sc, query).solve_p0(query.mu);
}

BoundaryPoint solve_p1(const ScenarioConfig& sc, const BoundaryQuery& query) {
  return BoundaryModel(sc, query).solve_p1(query.gamma);
}

std::vector<double> default_mu_grid(double mu_max, int points, double min_fraction) {
  std::vector<double> g;
  if (points <= 0) return g;
  g.push_back(0.0);
  if (points == 1 || !(mu_max > 0)) return g;
  const double lo = std::log(mu_max * min_fraction), hi = std::log(mu_max);
  for (int i = 0; i < points - 1; ++i) {
    const double f = points == 2 ? 1.0 : static_cast<double>(i) / (points - 2);
    g.push_back(std::exp(lo + f * (hi - lo)));
  }
  g.back() = mu_max;
  return g;
}

Frontier trace_frontier(const ScenarioConfig& sc, const std::vector<double>& mu_grid, const BoundaryQuery& tmpl,
                        const FrontierOptions& opt) {
  const BoundaryModel model(sc, tmpl);
  Frontier fr;
  const auto top = model.solve_p1(kNoCrbCeiling);
  fr.mu_max = top.ok() ? top.rate_bits_per_use : model.max_rate_analytic();
  std::vector<double> grid = mu_grid;
  std::sort(grid.begin(), grid.end());
  for (double mu : grid) {
    BoundaryPoint pt;
    try {
      pt = model.solve_p0(std::min(mu, fr.mu_max * (1.0 - opt.endpoint_backoff)));
      pt.mu = mu;
      if (opt.polish && pt.ok()) {
        auto pol = model.solve_p1(pt.crb_rad2 * (1.0 + opt.polish_slack));
        if (pol.ok() && pol.rate_bits_per_use >= pt.rate_bits_per_use * (1 - 1e-9)) {
          pol.mu = mu;
          pol.epigraph_t = pt.epigraph_t;
          pt = std::move(pol);
        } else {
          pt.note = "polish failed";
        }
      }
    } catch (const std::exception& e) {
      pt = BoundaryPoint{};
      pt.mu = mu;
      pt.solver_status = sdp::Status::NumericalFailure;
      pt.note = e.what();
    }
    fr.points.push_back(std::move(pt));
  }

  // Anomaly: another point has more rate and less CRB beyond tolerance.
  const double tol = opt.monotonic_tol;
  for (auto& b : fr.points) {
    if (!b.ok()) continue;
    for (const auto& a : fr.points) {
      if (!a.ok() || &a == &b) continue;
      if (a.rate_bits_per_use > b.rate_bits_per_use * (1 + tol) && a.crb_rad2 < b.crb_rad2 * (1 - tol)) {
        ++fr.monotonicity_violations;
        b.note = b.note.empty() ? "monotonicity anomaly" : b.note + "; monotonicity anomaly";
        break;
      }
    }
  }
  for (auto& p : fr.points) {
    if (!p.ok()) continue;
    p.pareto = true;
    for (const auto& q : fr.points) {
      if (!q.ok() || &q == &p) continue;
      const bool no_worse = q.rate_bits_per_use >= p.rate_bits_per_use && q.crb_rad2 <= p.crb_rad2;
      const bool better = q.rate_bits_per_use > p.rate_bits_per_use * (1 + 1e-9) || q.crb_rad2 < p.crb_rad2 * (1 - 1e-9);
      if (no_worse && better) {
        p.pareto = false;
        break;
      }
    }
  }
  return fr;
}

Frontier trace_frontier(const ScenarioConfig& sc, int points, const BoundaryQuery& tmpl, const FrontierOptions& opt) {
  const BoundaryModel model(sc, tmpl);
  const auto top = model.solve_p1(kNoCrbCeiling);
  const double mu_max = top.ok() ? top.rate_bits_per_use : model.max_rate_analytic();
  return trace_frontier(sc, default_mu_grid(mu_max, points), tmpl, opt);
}

RecoveredPrecoder recover_precoder(const MatrixXcd& R) {
  RecoveredPrecoder out;
  const Eigen::Index n = R.rows();
  out.vector = VectorXcd::Zero(n);
  if (n == 0 || R.cwiseAbs().maxCoeff() == 0.0) {
    out.degenerate = true;
    out.rank1_gap = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (R + R.adjoint()));
  const double l1 = es.eigenvalues()[n - 1];
  if (!(l1 > 0)) {
    out.degenerate = true;
    out.rank1_gap = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double l2 = n > 1 ? std::max(0.0, es.eigenvalues()[n - 2]) : 0.0;
  out.rank1_gap = l2 / l1;
  out.degenerate = out.rank1_gap > 1e-3;
  out.vector = std::sqrt(l1) * es.eigenvectors().col(n - 1);
  return out;
}

double path_dynamic_range_db(const ScenarioConfig& sc, int user, int path) {
  const auto& u = sc.users.at(user);
  return signal_dynamic_range_db(std::norm(u.complex_gain), std::norm(u.reflected_paths.at(path).complex_gain));
}

AoaFimOptions dr_gated_options(const ScenarioConfig& sc, int bits, double margin_db, const DynamicRangeRule& rule) {
  AoaFimOptions opt;
  for (int k = 0; k < sc.num_users(); ++k) {
    std::vector<bool> row;
    for (size_t p = 0; p < sc.users[k].reflected_paths.size(); ++p)
      row.push_back(bits <= 0 || path_dynamic_range_db(sc, k, static_cast<int>(p)) + margin_db <=
                                     adc_dynamic_range_db(bits, rule));
    opt.include_path.push_back(std::move(row));
  }
  return opt;
}

std::vector<PlacementResult> min_bits_scan(const SceneGeometry& geometry, const ArrayConfig& array, double carrier_hz,
                                           const MinBitsScan& scan, std::uint64_t seed) {
  if (geometry.users.empty()) throw std::invalid_argument("min-bits scan needs a user");
  if (!(scan.radius_m > scan.min_separation_m)) throw std::invalid_argument("scan radius too small");
  const UserPlacement user{geometry.users[0].distance_m, geometry.users[0].angle_rad, {0}};
  const double ux = user.distance_m * std::sin(user.angle_rad), uy = user.distance_m * std::cos(user.angle_rad);
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<PlacementResult> out;
  while (static_cast<int>(out.size()) < scan.placements) {
    const double r = scan.radius_m * std::sqrt(unit(rng));
    const double a = (unit(rng) - 0.5) * kPi;
    const double tx = r * std::sin(a), ty = r * std::cos(a);
    if (r < scan.min_separation_m || std::hypot(tx - ux, ty - uy) < scan.min_separation_m) continue;
    SceneGeometry g;
    g.targets.push_back({r, a, 0.0, geometry.targets.empty() ? 1.0 : geometry.targets[0].rcs_m2});
    g.users.push_back(user);
    const auto gains = pathloss_and_gains(g, array, carrier_hz, PathlossModel::FreeSpace);
    PlacementResult p;
    p.target_distance_m = r;
    p.target_angle_rad = a;
    p.dr_sig_db = signal_dynamic_range_db(gains.direct[0] * gains.direct[0], gains.reflected[0][0] * gains.reflected[0][0]);
    p.min_bits = min_bits_for_dr(p.dr_sig_db, scan.margin_db, scan.rule);
    out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.dr_sig_db < b.dr_sig_db; });
  return out;
}

}  // namespace hrf
