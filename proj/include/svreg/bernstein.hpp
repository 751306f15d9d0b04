#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svreg/grid_function.hpp"
#include "svreg/rng.hpp"

namespace svreg {

// e^x - x - 1, with a series branch for small |x|.
double phi_bernstein(double x);

// sqrt(t^{-2} mean phi(t g_i)). Throws Overflow when t*g exceeds 700
// (the chosen t does not match the data scale).
double bernstein_norm(std::span<const double> g, double t);

// Sub-exponential certificate: E e^{le} <= e^{nu^2 l^2 / 2} for |l| <= 1/alpha.
// The primed pair plays the same role for |e|: since E|e| > 0 rules out the
// two-sided grid bound near 0+, it is certified through the centered part
// |e| - E|e| on the grid plus the end-point bound E e^{|e|/alpha'} <=
// e^{nu'^2/(2 alpha'^2)} that the Bernstein-norm estimates consume.
struct SubExpParams {
  double alpha = 0.0;
  double nu = 0.0;
  double alpha_prime = 0.0;
  double nu_prime = 0.0;
};

enum class NoiseFamily { Laplace, Gaussian, CenteredExponential };

NoiseFamily noise_family_from_name(std::string_view name);
const char* noise_family_name(NoiseFamily f);

struct NoiseModel {
  NoiseFamily family = NoiseFamily::Gaussian;
  double scale = 1.0;  // laplace b / gaussian sigma / exponential mean
  SubExpParams params;

  double sample(Rng& rng) const;
  double variance() const;
  double mean_abs() const;             // E |e|
  double mgf(double lambda) const;     // E e^{lambda e}, +inf if divergent
  double mgf_abs(double lambda) const; // E e^{lambda |e|}, +inf if divergent
};

// Documented parameter mappings for each family.
SubExpParams claimed_subexp_params(NoiseFamily family, double scale);

// Verify an arbitrary claim by Monte Carlo on a 50-point lambda grid with
// 4 sigma slack (integrand capped so heavy tails cannot mask violations).
// Throws CertificationFailure on any violated grid point.
void verify_subexp_claim(NoiseFamily family, double scale, double alpha,
                         double nu, Rng rng, std::size_t n_mc = 1000000);

// claimed_subexp_params + full numeric certification of both pairs.
SubExpParams certify_subexp(NoiseFamily family, double scale, Rng rng,
                            std::size_t n_mc = 1000000);

NoiseModel make_noise(NoiseFamily family, double scale);
NoiseModel make_certified_noise(NoiseFamily family, double scale, Rng rng,
                                std::size_t n_mc = 1000000);

struct BernsteinAudit {
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double t = 0.0;
  bool pass = false;
};

// Monte Carlo / quadrature audit of the error-class bounds for
//   g1(x,e) = (theta(x) - theta_ref(x)) e
//   g2(x)   = (theta - theta_ref)(2 theta - theta_ref - theta0)
// under a uniform design and the given noise:
//   (i)  Bernstein norm of g1 at t = (2 a_n alpha')^{-1} is at most
//        2 alpha' a_n e^{nu'^2/(2 alpha'^2)} ||theta - theta_ref||_{P0,2}
//   (ii) ||g2||_{P0,2} <= (||theta0||_inf + 3 a_n) ||theta - theta_ref||_{P0,2}
//   (iii)||g2||_inf    <= 2 a_n (||theta0||_inf + 3 a_n)
std::vector<BernsteinAudit> audit_g_classes(
    const GridFunction& theta, const GridFunction& theta_ref,
    const GridFunction& theta0, double a_n, const NoiseModel& noise, Rng rng,
    std::size_t n_mc, bool throw_on_violation = true);

}  // namespace svreg
