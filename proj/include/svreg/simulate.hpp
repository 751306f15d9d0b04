#pragma once

#include <map>
#include <optional>
#include <string>

#include "svreg/bernstein.hpp"
#include "svreg/losses.hpp"
#include "svreg/solver.hpp"
#include "svreg/svn.hpp"

namespace svreg {

// ---------------------------------------------------------------------------
// Truths

struct TruthComponentSpec {
  SubsetMask subset = 1;
  int part = 0;  // 0: positive, 1: negative
  double alpha = 0.0;
  std::string kind = "point";  // point | product-uniform | product-beta
  std::vector<double> point;   // kind=point: one coordinate per set bit
  double beta_a = 2.0;
  double beta_b = 2.0;
  int grid_cells = 16;  // discretization of the smooth kinds
};

struct TruthSpec {
  int dim = 1;
  double M = 1.0;
  double f0 = 0.0;
  std::vector<TruthComponentSpec> components;
};

MixtureRepresentation truth_mixture(const TruthSpec& spec);
GridFunction gen_truth(const TruthSpec& spec, double* svn_out = nullptr);

// constant | step1d | steps2d | mixed3 | smooth1d
TruthSpec truth_preset(const std::string& name);

// ---------------------------------------------------------------------------
// Designs and data generation

enum class DesignKind { Uniform, ProductBeta };

struct Design {
  DesignKind kind = DesignKind::Uniform;
  int dim = 1;
  std::vector<std::pair<double, double>> beta_ab;  // per axis, ProductBeta

  void sample_point(Rng& rng, std::span<double> out) const;
};

struct ResponseSpec {
  LossFamily loss = LossFamily::SquareBounded;
  double a_tilde = 1.0;       // response range bound for the bounded family
  double bounded_half = 0.5;  // uniform noise half-width (bounded family)
  std::optional<NoiseModel> noise;  // sub-exponential family
  double noise_variance() const;
};

DataSet gen_dataset(const GridFunction& theta0, std::size_t n,
                    const Design& design, const ResponseSpec& response,
                    Rng& rng);

// ---------------------------------------------------------------------------
// Risk oracles

struct RiskSettings {
  bool exact_quadrature = true;  // exact cell-wise quadrature (uniform design)
  std::size_t n_mc = 1000000;
};

RiskValue risk_oracle(const GridFunction& theta, const GridFunction& theta0,
                      const Design& design, const ResponseSpec& response,
                      const RiskSettings& settings, Rng rng);

// Same risk for a fitted function, streamed over the knot grid refinement
// (no tensor rendering); uniform design only.
RiskValue fit_risk_exact(const FittedFunction& fit, const GridFunction& theta0,
                         const ResponseSpec& response);

RiskValue truth_risk_exact(const GridFunction& theta0,
                           const ResponseSpec& response);

// ---------------------------------------------------------------------------
// Rate experiments

struct ExperimentConfig {
  std::string name = "experiment";
  TruthSpec truth;
  Design design;
  LossFamily loss = LossFamily::SquareBounded;
  ResponseSpec response;
  SieveSchedule schedule;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 20;
  std::uint64_t seed = 1;
  SolveOptions solve;
  RiskSettings risk;
  unsigned threads = 0;  // 0: hardware default

  void validate_against(const GridFunction& theta0) const;
  std::map<std::string, std::string> canonical_kv() const;
};

ExperimentConfig experiment_from_config(
    const std::map<std::string, std::string>& kv);

struct RateRow {
  std::size_t n = 0;
  std::size_t replicate = 0;
  double d_value = 0.0;
  double runtime_sec = 0.0;
};

struct RateReport {
  std::string name;
  std::string config_hash;
  std::uint64_t seed = 0;
  int dim = 1;
  double truth_svn = 0.0;
  std::vector<std::size_t> n_grid;
  std::vector<RateRow> rows;           // all (n, replicate) pairs
  std::vector<double> median_d;        // per n-grid entry
  double corrected_slope = 0.0;
  double raw_slope = 0.0;
  double slope_std_error = 0.0;
  double expected_exponent = -1.0 / 3.0;
  double log_correction_exponent = 0.0;  // 2(d-1)/3
  double total_runtime_sec = 0.0;
};

// Runs the full grid; when resume_csv is nonempty, per-replicate rows are
// persisted there as they finish and matching completed rows are reused.
RateReport run_rate_experiment(const ExperimentConfig& config,
                               const std::string& resume_csv = "");

double median(std::vector<double> v);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
};
SlopeFit least_squares_slope(std::span<const double> x,
                             std::span<const double> y);

}  // namespace svreg
