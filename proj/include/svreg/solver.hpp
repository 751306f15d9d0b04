#pragma once

#include <string>

#include "svreg/design.hpp"
#include "svreg/knot_basis.hpp"
#include "svreg/losses.hpp"

namespace svreg {

struct DataSet {
  int dim = 0;
  std::size_t n = 0;
  std::vector<double> x;  // row-major n x dim
  std::vector<double> y;
};

struct SieveSchedule {
  enum class Kind { Constant, Power };
  Kind kind = Kind::Constant;
  double A = 1.0;
  double p = 0.0;
};

// a_n: the variation-norm radius of the sieve at sample size n.
double sieve_radius(const SieveSchedule& schedule, std::size_t n);

struct SolveOptions {
  std::size_t max_iters = 50000;
  double grad_tol = 1e-7;
  double objective_tol = 1e-10;
  double step_initial = 1.0;
  double step_shrink = 0.5;
  double sufficient_decrease = 1e-4;
};

struct SolveReport {
  FittedFunction fit;
  std::size_t iterations = 0;
  double final_objective = 0.0;
  double kkt_residual = 0.0;
  std::size_t active_set_size = 0;
  bool max_iters_hit = false;
  std::string stop_reason;
};

// Euclidean projection onto {w : sum |w_j| <= radius}, in place.
void project_l1_ball(std::span<double> v, double radius);

// Empirical risk minimization over the l1 ball of the given radius in the
// (intercept, coefficients) parametrization: projected gradient descent with
// Barzilai-Borwein steps and monotone backtracking.
SolveReport fit_erm(const DataSet& data, const LossSpec& loss, double radius,
                    const SolveOptions& opts = {},
                    std::shared_ptr<const KnotBasis> basis = nullptr);

// Optimality certificate. Interior fit: sup-norm of the empirical-risk
// gradient. Boundary fit: worst violation of the l1-ball stationarity
// conditions (active gradients equal in magnitude and correctly signed,
// inactive ones dominated).
double kkt_residual(const FittedFunction& fit, const DataSet& data,
                    const LossSpec& loss, double radius);

}  // namespace svreg
