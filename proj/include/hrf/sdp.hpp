#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hrf/types.hpp"

namespace hrf::sdp {

// Block-diagonal linear matrix inequality in standard form:
//   minimize  b^T y   subject to   Z = sum_i y_i A_i - C  >= 0 (block-wise PSD).
// Each A_i is stored sparsely as the list of blocks it touches.
struct Problem {
  std::vector<int> block_sizes;
  std::vector<MatrixXd> c;                                  // one per block
  std::vector<std::vector<std::pair<int, MatrixXd>>> a;     // a[i] = {(block, A_i block)}
  VectorXd b;

  int num_vars() const { return static_cast<int>(a.size()); }
  int add_block(int size);
  int add_var(double cost);
  void set(int var, int block, const MatrixXd& m);
};

struct Options {
  int max_iterations = 120;
  double gap_tol = 1e-10;
  double feas_tol = 1e-9;
  double step_fraction = 0.97;
};

enum class Status { Optimal, Infeasible, Unbounded, MaxIterations, NumericalFailure };

const char* status_name(Status s);

struct Result {
  Status status = Status::NumericalFailure;
  VectorXd y;
  std::vector<MatrixXd> z;  // slack blocks
  std::vector<MatrixXd> x;  // dual multipliers
  double objective = 0.0;       // b^T y
  double dual_objective = 0.0;  // tr(C X)
  double relative_gap = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
};

Result solve(const Problem& problem, const Options& options = {});

}  // namespace hrf::sdp
