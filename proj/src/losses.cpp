#include "svreg/losses.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "svreg/errors.hpp"

namespace svreg {

namespace {

// log(1 + e^t) without overflow
double softplus(double t) {
  if (t > 0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

LossFamily loss_family_from_name(std::string_view name) {
  if (name == "square") return LossFamily::SquareBounded;
  if (name == "logistic") return LossFamily::Logistic;
  if (name == "square-subexp") return LossFamily::SquareSubexp;
  throw UnknownFamily("loss family must be square|logistic|square-subexp, got '" +
                      std::string(name) + "'");
}

const char* loss_family_name(LossFamily f) {
  switch (f) {
    case LossFamily::SquareBounded: return "square";
    case LossFamily::Logistic: return "logistic";
    case LossFamily::SquareSubexp: return "square-subexp";
  }
  return "?";
}

double LossSpec::value(double u, double y) const {
  switch (family) {
    case LossFamily::SquareBounded:
    case LossFamily::SquareSubexp: {
      double r = y - u;
      return r * r;
    }
    case LossFamily::Logistic:
      return y * softplus(-u) + (1.0 - y) * softplus(u);
  }
  return 0.0;
}

double LossSpec::subgradient_u(double u, double y) const {
  switch (family) {
    case LossFamily::SquareBounded:
    case LossFamily::SquareSubexp:
      return -2.0 * (y - u);
    case LossFamily::Logistic:
      return sigmoid(u) - y;
  }
  return 0.0;
}

double LossSpec::unimodal_point(double y) const {
  switch (family) {
    case LossFamily::SquareBounded:
    case LossFamily::SquareSubexp:
      return y;
    case LossFamily::Logistic:
      return y >= 0.5 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
  }
  return y;
}

LossSpec make_loss(LossFamily family, double a_tilde) {
  if (a_tilde < 0.0) throw DomainError("make_loss: a_tilde must be >= 0");
  LossSpec s;
  s.family = family;
  s.a_tilde = a_tilde;
  switch (family) {
    case LossFamily::SquareBounded:
      s.lipschitz = 4.0 * a_tilde;
      s.smoothness = 4.0 * a_tilde;
      break;
    case LossFamily::Logistic:
      s.lipschitz = 1.0;
      s.smoothness = 2.0 * std::sqrt(1.0 + std::exp(a_tilde));
      break;
    case LossFamily::SquareSubexp:
      s.lipschitz = std::numeric_limits<double>::quiet_NaN();
      s.smoothness = std::numeric_limits<double>::quiet_NaN();
      break;
  }
  return s;
}

double logistic_curvature(double q) {
  double s = sigmoid(q);
  return s * (1.0 - s);
}

DissimilarityEstimate dissimilarity_from_risks(RiskValue theta_risk,
                                               RiskValue reference_risk,
                                               std::size_t n_mc) {
  const double raw = theta_risk.value - reference_risk.value;
  const double se = std::sqrt(theta_risk.std_error * theta_risk.std_error +
                              reference_risk.std_error * reference_risk.std_error);
  if (raw < -3.0 * se)
    throw NotAMinimizer(
        "dissimilarity: risk(theta) is below risk(reference) by more than 3 "
        "std errors; the reference is not the sieve minimizer");
  DissimilarityEstimate est;
  est.value = std::sqrt(std::max(0.0, raw));
  // Delta-method propagation; zero-clipped values keep the raw std error.
  est.std_error = est.value > 0 ? se / (2.0 * est.value) : std::sqrt(se);
  est.n_mc = n_mc;
  return est;
}

DissimilarityEstimate dissimilarity(const GridFunction& theta,
                                    const GridFunction& reference,
                                    const RiskOracleFn& risk_oracle) {
  return dissimilarity_from_risks(risk_oracle(theta), risk_oracle(reference));
}

}  // namespace svreg
