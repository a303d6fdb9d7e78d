#include "hrf/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hrf::sdp {

int Problem::add_block(int size) {
  block_sizes.push_back(size);
  c.push_back(MatrixXd::Zero(size, size));
  return static_cast<int>(block_sizes.size()) - 1;
}

int Problem::add_var(double cost) {
  a.emplace_back();
  b.conservativeResize(b.size() + 1);
  b[b.size() - 1] = cost;
  return static_cast<int>(a.size()) - 1;
}

void Problem::set(int var, int block, const MatrixXd& m) {
  for (auto& [blk, mat] : a.at(var))
    if (blk == block) {
      mat = m;
      return;
    }
  a.at(var).emplace_back(block, m);
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::MaxIterations: return "max-iterations";
    case Status::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

namespace {

using Blocks = std::vector<MatrixXd>;

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
  return s;
}

double fro(const Blocks& a) { return std::sqrt(inner(a, a)); }

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Largest alpha with X + alpha dX PSD (infinity if unrestricted).
double max_step(const Blocks& X, const Blocks& dX) {
  double alpha = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < X.size(); ++k) {
    Eigen::LLT<MatrixXd> llt(X[k]);
    if (llt.info() != Eigen::Success) return 0.0;
    const auto L = llt.matrixL();
    MatrixXd W = L.solve(dX[k]);
    W = L.solve(W.transpose().eval());
    const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(sym(W), Eigen::EigenvaluesOnly).eigenvalues()[0];
    if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
  }
  return alpha;
}

class Solver {
 public:
  Solver(const Problem& p, const Options& o) : p_(p), o_(o), m_(p.num_vars()), nb_(p.block_sizes.size()) {
    by_block_.resize(nb_);
    for (int i = 0; i < m_; ++i)
      for (size_t e = 0; e < p.a[i].size(); ++e) by_block_[p.a[i][e].first].push_back({i, static_cast<int>(e)});
  }

  Result run() {
    init();
    Result r;
    for (int it = 0; it < o_.max_iterations; ++it) {
      r.iterations = it;
      residuals();
      const double pobj = p_.b.dot(y_);
      const double dobj = inner(p_.c, X_);
      const double gap = inner(X_, Z_);
      const double rel = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
      const double pinf = rp_.norm() / (1.0 + p_.b.norm());
      const double dinf = fro(D_) / (1.0 + cnorm_);
      fill(r, pobj, dobj, rel, pinf, dinf);
      if (rel < o_.gap_tol && pinf < o_.feas_tol && dinf < o_.feas_tol) {
        r.status = Status::Optimal;
        return r;
      }
      if (fro(X_) > 1e13 * xscale_) {
        r.status = Status::Infeasible;
        return r;
      }
      if (y_.norm() > 1e13 * yscale_) {
        r.status = Status::Unbounded;
        return r;
      }
      if (!step()) {
        r.status = Status::NumericalFailure;
        return r;
      }
    }
    residuals();
    fill(r, p_.b.dot(y_), inner(p_.c, X_), inner(X_, Z_) / (1.0 + std::abs(p_.b.dot(y_)) + std::abs(inner(p_.c, X_))),
         rp_.norm() / (1.0 + p_.b.norm()), fro(D_) / (1.0 + cnorm_));
    r.iterations = o_.max_iterations;
    r.status = Status::MaxIterations;
    return r;
  }

 private:
  struct Ref {
    int var;
    int entry;
  };

  const MatrixXd& A(int var, int entry) const { return p_.a[var][entry].second; }

  void init() {
    int n = 0;
    for (int s : p_.block_sizes) n += s;
    n_ = n;
    cnorm_ = fro(p_.c);
    double amax = 0.0, ratio = 0.0;
    for (int i = 0; i < m_; ++i) {
      double an = 0.0;
      for (const auto& [blk, mat] : p_.a[i]) an += mat.squaredNorm();
      an = std::sqrt(an);
      amax = std::max(amax, an);
      ratio = std::max(ratio, (1.0 + std::abs(p_.b[i])) / (1.0 + an));
    }
    const double xi = 10.0 * std::max(1.0, n * ratio);
    const double zeta = 10.0 * std::max(1.0, (1.0 + std::max(amax, cnorm_)) / std::sqrt(double(n)));
    xscale_ = xi * std::sqrt(double(n));
    yscale_ = std::max(1.0, zeta);
    X_.clear();
    Z_.clear();
    for (int s : p_.block_sizes) {
      X_.push_back(xi * MatrixXd::Identity(s, s));
      Z_.push_back(zeta * MatrixXd::Identity(s, s));
    }
    y_ = VectorXd::Zero(m_);
  }

  Blocks apply_adjoint(const VectorXd& y) const {
    Blocks out;
    for (int s : p_.block_sizes) out.push_back(MatrixXd::Zero(s, s));
    for (int i = 0; i < m_; ++i)
      for (const auto& [blk, mat] : p_.a[i]) out[blk] += y[i] * mat;
    return out;
  }

  VectorXd apply(const Blocks& W) const {
    VectorXd v(m_);
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (const auto& [blk, mat] : p_.a[i]) s += mat.cwiseProduct(W[blk]).sum();
      v[i] = s;
    }
    return v;
  }

  void residuals() {
    rp_ = p_.b - apply(X_);
    const Blocks Ay = apply_adjoint(y_);
    D_.resize(nb_);
    for (size_t k = 0; k < nb_; ++k) D_[k] = p_.c[k] + Z_[k] - Ay[k];
  }

  void fill(Result& r, double pobj, double dobj, double rel, double pinf, double dinf) const {
    r.y = y_;
    r.x = X_;
    r.z = Z_;
    r.objective = pobj;
    r.dual_objective = dobj;
    r.relative_gap = rel;
    r.primal_infeasibility = pinf;
    r.dual_infeasibility = dinf;
  }

  // Search direction for target sigma*mu with optional second-order correction.
  void direction(double target, const Blocks* dZa, const Blocks* dXa, VectorXd& dy, Blocks& dX, Blocks& dZ) {
    Blocks R(nb_);
    for (size_t k = 0; k < nb_; ++k) {
      R[k] = target * Zinv_[k] - X_[k] + Zinv_[k] * D_[k] * X_[k];
      if (dZa) R[k] -= Zinv_[k] * (*dZa)[k] * (*dXa)[k];
    }
    VectorXd rhs = apply(R) - rp_;
    dy = chol_.solve(rhs);
    dZ = apply_adjoint(dy);
    for (size_t k = 0; k < nb_; ++k) dZ[k] -= D_[k];
    dX.resize(nb_);
    for (size_t k = 0; k < nb_; ++k) {
      MatrixXd t = target * Zinv_[k] - X_[k] - Zinv_[k] * dZ[k] * X_[k];
      if (dZa) t -= Zinv_[k] * (*dZa)[k] * (*dXa)[k];
      dX[k] = sym(t);
    }
  }

  bool step() {
    Zinv_.resize(nb_);
    for (size_t k = 0; k < nb_; ++k) {
      Eigen::LLT<MatrixXd> llt(Z_[k]);
      if (llt.info() != Eigen::Success) return false;
      Zinv_[k] = llt.solve(MatrixXd::Identity(Z_[k].rows(), Z_[k].cols()));
    }
    MatrixXd M = MatrixXd::Zero(m_, m_);
    std::vector<MatrixXd> G;
    for (size_t k = 0; k < nb_; ++k) {
      const auto& refs = by_block_[k];
      G.resize(refs.size());
      for (size_t r = 0; r < refs.size(); ++r) G[r] = Zinv_[k] * A(refs[r].var, refs[r].entry) * X_[k];
      for (size_t r = 0; r < refs.size(); ++r)
        for (size_t s = 0; s < refs.size(); ++s)
          M(refs[r].var, refs[s].var) += A(refs[s].var, refs[s].entry).cwiseProduct(G[r].transpose()).sum();
    }
    M = sym(M);
    chol_.compute(M);
    if (chol_.info() != Eigen::Success) {
      const double reg = 1e-14 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
      chol_.compute(M + reg * MatrixXd::Identity(m_, m_));
      if (chol_.info() != Eigen::Success) return false;
    }

    const double mu = inner(X_, Z_) / n_;
    VectorXd dya;
    Blocks dXa, dZa;
    direction(0.0, nullptr, nullptr, dya, dXa, dZa);
    const double ap = std::min(1.0, max_step(X_, dXa));
    const double ad = std::min(1.0, max_step(Z_, dZa));
    Blocks Xa = X_, Za = Z_;
    for (size_t k = 0; k < nb_; ++k) {
      Xa[k] += ap * dXa[k];
      Za[k] += ad * dZa[k];
    }
    const double mua = inner(Xa, Za) / n_;
    const double sigma = std::clamp(std::pow(std::max(mua, 0.0) / mu, 3.0), 0.0, 1.0);

    VectorXd dy;
    Blocks dX, dZ;
    direction(sigma * mu, &dZa, &dXa, dy, dX, dZ);
    const double tau = o_.step_fraction;
    const double alpha_p = std::min(1.0, tau * max_step(X_, dX));
    const double alpha_d = std::min(1.0, tau * max_step(Z_, dZ));
    if (!(alpha_p > 0) || !(alpha_d > 0)) return false;
    for (size_t k = 0; k < nb_; ++k) {
      X_[k] = sym(X_[k] + alpha_p * dX[k]);
      Z_[k] = sym(Z_[k] + alpha_d * dZ[k]);
    }
    y_ += alpha_d * dy;
    return std::isfinite(y_.squaredNorm());
  }

  const Problem& p_;
  Options o_;
  int m_;
  size_t nb_;
  int n_ = 0;
  double cnorm_ = 0.0, xscale_ = 1.0, yscale_ = 1.0;
  std::vector<std::vector<Ref>> by_block_;
  Blocks X_, Z_, D_, Zinv_;
  VectorXd y_, rp_;
  Eigen::LLT<MatrixXd> chol_;
};

}  // namespace

Result solve(const Problem& problem, const Options& options) {
  if (problem.c.size() != problem.block_sizes.size()) throw DimensionError("one constant block per block size");
  if (problem.b.size() != problem.num_vars()) throw DimensionError("cost vector length differs from variable count");
  for (const auto& var : problem.a)
    for (const auto& [blk, mat] : var) {
      if (blk < 0 || blk >= static_cast<int>(problem.block_sizes.size())) throw DimensionError("block index out of range");
      if (mat.rows() != problem.block_sizes[blk] || mat.cols() != problem.block_sizes[blk])
        throw DimensionError("constraint block has the wrong size");
    }
  return Solver(problem, options).run();
}

}  // namespace hrf::sdp
