#pragma once

#include <functional>
#include <string_view>

#include "svreg/grid_function.hpp"

namespace svreg {

enum class LossFamily { SquareBounded, Logistic, SquareSubexp };

LossFamily loss_family_from_name(std::string_view name);
const char* loss_family_name(LossFamily f);

// Pointwise loss (u, y) -> value with a unimodality point u_y, together with
// its Lipschitz and L2-smoothness constants on the admissible range. For the
// sub-exponential square-loss family the constants are not finite-range and
// are reported as NaN (the Bernstein audits carry their own constants).
struct LossSpec {
  LossFamily family = LossFamily::SquareBounded;
  double a_tilde = 0.0;
  double lipschitz = 0.0;
  double smoothness = 0.0;

  double value(double u, double y) const;
  double subgradient_u(double u, double y) const;
  double unimodal_point(double y) const;
};

LossSpec make_loss(LossFamily family, double a_tilde);

// sigma(q) (1 - sigma(q)); for |q| <= a the value is >= (1/2) (1 + e^a)^{-1}.
double logistic_curvature(double q);

struct RiskValue {
  double value = 0.0;
  double std_error = 0.0;
};

struct DissimilarityEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_mc = 0;
};

// sqrt of the excess population risk of theta over the reference minimizer.
// Small negative raw differences (within 3 std errors) clip to zero; larger
// ones indicate a wrong reference and raise NotAMinimizer.
DissimilarityEstimate dissimilarity_from_risks(RiskValue theta_risk,
                                               RiskValue reference_risk,
                                               std::size_t n_mc = 0);

using RiskOracleFn = std::function<RiskValue(const GridFunction&)>;

DissimilarityEstimate dissimilarity(const GridFunction& theta,
                                    const GridFunction& reference,
                                    const RiskOracleFn& risk_oracle);

}  // namespace svreg
