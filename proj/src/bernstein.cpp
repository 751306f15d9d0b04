#include "svreg/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svreg/errors.hpp"
#include "svreg/svn.hpp"

namespace svreg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double phi_bernstein(double x) {
  double ax = std::abs(x);
  if (ax < 1e-4) {
    // x^2/2 + x^3/6 + x^4/24
    return x * x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0)));
  }
  return std::expm1(x) - x;
}

double bernstein_norm(std::span<const double> g, double t) {
  if (!(t > 0.0)) throw DomainError("bernstein_norm: t must be > 0");
  if (g.empty()) throw EmptyData("bernstein_norm: no samples");
  double s = 0.0;
  for (double gi : g) {
    double x = t * gi;
    if (x > 700.0)
      throw Overflow("bernstein_norm: t*g exceeds 700; t is too large for the data scale");
    s += phi_bernstein(x);
  }
  double mean = s / static_cast<double>(g.size());
  return std::sqrt(mean) / t;
}

NoiseFamily noise_family_from_name(std::string_view name) {
  if (name == "laplace") return NoiseFamily::Laplace;
  if (name == "gaussian") return NoiseFamily::Gaussian;
  if (name == "centered-exponential" || name == "centered_exponential")
    return NoiseFamily::CenteredExponential;
  throw UnknownFamily("noise family must be laplace|gaussian|centered-exponential");
}

const char* noise_family_name(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::Laplace: return "laplace";
    case NoiseFamily::Gaussian: return "gaussian";
    case NoiseFamily::CenteredExponential: return "centered-exponential";
  }
  return "?";
}

double NoiseModel::sample(Rng& rng) const {
  switch (family) {
    case NoiseFamily::Laplace: return rng.laplace(scale);
    case NoiseFamily::Gaussian: return scale * rng.normal();
    case NoiseFamily::CenteredExponential:
      return scale * (rng.exponential(1.0) - 1.0);
  }
  return 0.0;
}

double NoiseModel::variance() const {
  switch (family) {
    case NoiseFamily::Laplace: return 2.0 * scale * scale;
    case NoiseFamily::Gaussian: return scale * scale;
    case NoiseFamily::CenteredExponential: return scale * scale;
  }
  return 0.0;
}

double NoiseModel::mean_abs() const {
  switch (family) {
    case NoiseFamily::Laplace: return scale;
    case NoiseFamily::Gaussian: return scale * std::sqrt(2.0 / 3.14159265358979323846);
    case NoiseFamily::CenteredExponential: return 2.0 * scale / std::exp(1.0);
  }
  return 0.0;
}

double NoiseModel::mgf(double lambda) const {
  switch (family) {
    case NoiseFamily::Laplace: {
      double x = scale * lambda;
      if (std::abs(x) >= 1.0) return kInf;
      return 1.0 / (1.0 - x * x);
    }
    case NoiseFamily::Gaussian:
      return std::exp(0.5 * scale * scale * lambda * lambda);
    case NoiseFamily::CenteredExponential: {
      double u = scale * lambda;
      if (u >= 1.0) return kInf;
      return std::exp(-u) / (1.0 - u);
    }
  }
  return kInf;
}

double NoiseModel::mgf_abs(double lambda) const {
  switch (family) {
    case NoiseFamily::Laplace: {
      double x = scale * lambda;  // |e| ~ Exp(1/scale)
      if (x >= 1.0) return kInf;
      return 1.0 / (1.0 - x);
    }
    case NoiseFamily::Gaussian: {
      double u = scale * lambda;
      // E e^{u|Z|} = 2 e^{u^2/2} Phi(u)
      return std::exp(0.5 * u * u) * std::erfc(-u / std::sqrt(2.0));
    }
    case NoiseFamily::CenteredExponential: {
      double u = scale * lambda;  // |e| = scale |E' - 1|
      if (u >= 1.0) return kInf;
      double first;  // e^u (1 - e^{-(1+u)}) / (1+u)
      if (std::abs(1.0 + u) < 1e-12) {
        first = std::exp(-1.0);
      } else {
        first = std::exp(u) * (-std::expm1(-(1.0 + u))) / (1.0 + u);
      }
      return first + std::exp(-1.0) / (1.0 - u);
    }
  }
  return kInf;
}

SubExpParams claimed_subexp_params(NoiseFamily family, double scale) {
  if (!(scale > 0.0)) throw DomainError("noise scale must be > 0");
  SubExpParams p;
  switch (family) {
    case NoiseFamily::Laplace:
      p.alpha = std::sqrt(2.0) * scale;
      p.nu = 2.0 * scale;
      p.alpha_prime = 2.0 * scale;
      p.nu_prime = 2.0 * scale * std::sqrt(2.0 * std::log(2.0));
      break;
    case NoiseFamily::Gaussian:
      p.alpha = scale;
      p.nu = scale;
      p.alpha_prime = scale;
      p.nu_prime = scale * std::sqrt(1.0 + 2.0 * std::log(2.0));
      break;
    case NoiseFamily::CenteredExponential: {
      // nu0 = sup over |s| <= 1/2 of sqrt(2 (-s - log(1-s)) / s^2)
      double nu0 = 0.0;
      for (int i = 1; i <= 100000; ++i) {
        double s = 0.5 * i / 100000.0;
        for (double sg : {s, -s}) {
          double f = (-sg - std::log1p(-sg)) / (sg * sg);
          nu0 = std::max(nu0, std::sqrt(2.0 * f));
        }
      }
      p.alpha = 2.0 * scale;
      p.nu = (nu0 + 1e-9) * scale;
      p.alpha_prime = 2.0 * scale;
      p.nu_prime = 1.2 * p.alpha_prime;
      break;
    }
  }
  return p;
}

namespace {

struct CappedMean {
  double mean = 0.0;
  double se = 0.0;
};

// Mean of f(e_i) with values capped at 1e12: the cap keeps the estimator a
// lower bound of the true mean with a valid CLT, so heavy tails cannot mask
// a certain violation.
template <typename F>
CappedMean capped_mean(const NoiseModel& model, Rng& rng, std::size_t n_mc,
                       F&& f) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n_mc; ++i) {
    double v = std::min(f(model.sample(rng)), 1e12);
    s += v;
    s2 += v * v;
  }
  CappedMean out;
  out.mean = s / static_cast<double>(n_mc);
  double var = std::max(0.0, s2 / static_cast<double>(n_mc) - out.mean * out.mean);
  out.se = std::sqrt(var / static_cast<double>(n_mc));
  return out;
}

void check_grid(const NoiseModel& model, Rng& rng, std::size_t n_mc,
                double alpha, double nu, bool absolute, double center,
                const std::string& label) {
  for (int gi = 0; gi < 50; ++gi) {
    double lambda = -1.0 / alpha + (2.0 / alpha) * gi / 49.0;
    if (std::abs(lambda) < 1e-12) continue;
    Rng point_rng = rng.sub(static_cast<std::uint64_t>(gi));
    auto est = capped_mean(model, point_rng, n_mc, [&](double e) {
      double v = absolute ? std::abs(e) - center : e;
      return std::exp(std::min(lambda * v, 700.0));
    });
    double bound = std::exp(0.5 * nu * nu * lambda * lambda);
    if (est.mean - 4.0 * est.se > bound) {
      throw CertificationFailure(
          label + ": MGF exceeds the sub-exponential bound at lambda=" +
          std::to_string(lambda) + " (estimate " + std::to_string(est.mean) +
          " > bound " + std::to_string(bound) + ")");
    }
  }
}

}  // namespace

void verify_subexp_claim(NoiseFamily family, double scale, double alpha,
                         double nu, Rng rng, std::size_t n_mc) {
  NoiseModel model;
  model.family = family;
  model.scale = scale;
  check_grid(model, rng, n_mc, alpha, nu, /*absolute=*/false, 0.0,
             "certify_subexp(e)");
}

SubExpParams certify_subexp(NoiseFamily family, double scale, Rng rng,
                            std::size_t n_mc) {
  SubExpParams p = claimed_subexp_params(family, scale);
  NoiseModel model;
  model.family = family;
  model.scale = scale;
  model.params = p;
  check_grid(model, rng.sub(1), n_mc, p.alpha, p.nu, false, 0.0,
             "certify_subexp(e)");
  check_grid(model, rng.sub(2), n_mc, p.alpha_prime, p.nu_prime, true,
             model.mean_abs(), "certify_subexp(|e| - E|e|)");
  // End-point bound actually consumed by the Bernstein-norm estimates.
  {
    Rng r = rng.sub(3);
    auto est = capped_mean(model, r, n_mc, [&](double e) {
      return std::exp(std::min(std::abs(e) / p.alpha_prime, 700.0));
    });
    double bound =
        std::exp(0.5 * p.nu_prime * p.nu_prime / (p.alpha_prime * p.alpha_prime));
    if (est.mean - 4.0 * est.se > bound)
      throw CertificationFailure(
          "certify_subexp(|e|): end-point MGF bound violated");
  }
  return p;
}

NoiseModel make_noise(NoiseFamily family, double scale) {
  NoiseModel model;
  model.family = family;
  model.scale = scale;
  model.params = claimed_subexp_params(family, scale);
  return model;
}

NoiseModel make_certified_noise(NoiseFamily family, double scale, Rng rng,
                                std::size_t n_mc) {
  NoiseModel model;
  model.family = family;
  model.scale = scale;
  model.params = certify_subexp(family, scale, rng, n_mc);
  return model;
}

std::vector<BernsteinAudit> audit_g_classes(
    const GridFunction& theta, const GridFunction& theta_ref,
    const GridFunction& theta0, double a_n, const NoiseModel& noise, Rng rng,
    std::size_t n_mc, bool throw_on_violation) {
  if (svn_exact(theta) > a_n + 1e-9 || svn_exact(theta_ref) > a_n + 1e-9)
    throw DomainError("audit_g_classes: theta and theta_ref must lie in the a_n ball");
  if (2.0 * a_n < 1.0)
    throw DomainError("audit_g_classes: requires 2 a_n >= 1");
  const double ap = noise.params.alpha_prime;
  const double np = noise.params.nu_prime;
  if (!(ap > 0.0 && np > 0.0))
    throw DomainError("audit_g_classes: noise is not certified");
  const double t_n = 1.0 / (2.0 * a_n * ap);
  const double C_n = 2.0 * ap * a_n * std::exp(0.5 * np * np / (ap * ap));
  const int d = theta.dim();

  const GridFunction* pair[2] = {&theta, &theta_ref};
  double l2diff = std::sqrt(integrate_cells(
      std::span<const GridFunction* const>(pair, 2),
      [](std::span<const double> v) { return (v[0] - v[1]) * (v[0] - v[1]); }));

  std::vector<BernsteinAudit> audits;

  // (i) Bernstein norm of g1 by Monte Carlo.
  {
    double s = 0.0, s2 = 0.0;
    Rng r = rng.sub(11);
    std::vector<double> x(d);
    for (std::size_t i = 0; i < n_mc; ++i) {
      for (int j = 0; j < d; ++j) x[j] = r.uniform();
      double diff = theta(x) - theta_ref(x);
      double g = diff * noise.sample(r);
      double arg = t_n * g;
      if (arg > 700.0) throw Overflow("audit_g_classes: Bernstein argument overflow");
      double v = phi_bernstein(arg);
      s += v;
      s2 += v * v;
    }
    double mean = s / static_cast<double>(n_mc);
    double var = std::max(0.0, s2 / static_cast<double>(n_mc) - mean * mean);
    double se_mean = std::sqrt(var / static_cast<double>(n_mc));
    double lhs = std::sqrt(std::max(mean, 0.0)) / t_n;
    double se = lhs > 0 ? se_mean / (2.0 * std::sqrt(mean)) / t_n
                        : std::sqrt(se_mean) / t_n;
    BernsteinAudit a;
    a.inequality = "bernstein_norm(g1; t_n) <= C_n * l2(theta - theta_ref)";
    a.lhs = lhs;
    a.rhs = C_n * l2diff;
    a.slack = 4.0 * se;
    a.t = t_n;
    a.pass = a.lhs <= a.rhs + a.slack;
    audits.push_back(a);
  }

  // (ii) L2 bound for g2, exact quadrature under the uniform design.
  {
    const GridFunction* trip[3] = {&theta, &theta_ref, &theta0};
    double l2g2 = std::sqrt(integrate_cells(
        std::span<const GridFunction* const>(trip, 3),
        [](std::span<const double> v) {
          double g2 = (v[0] - v[1]) * (2.0 * v[0] - v[1] - v[2]);
          return g2 * g2;
        }));
    BernsteinAudit a;
    a.inequality = "l2(g2) <= (sup|theta0| + 3 a_n) * l2(theta - theta_ref)";
    a.lhs = l2g2;
    a.rhs = (sup_norm(theta0) + 3.0 * a_n) * l2diff;
    a.slack = 1e-12 * std::max(1.0, a.rhs);
    a.pass = a.lhs <= a.rhs + a.slack;
    audits.push_back(a);
  }

  // (iii) sup bound for g2, exact on the union grid.
  {
    const GridFunction* trip[3] = {&theta, &theta_ref, &theta0};
    double sup = 0.0;
    scan_union_grid(std::span<const GridFunction* const>(trip, 3),
                    [&](std::span<const double> v) {
                      double g2 = (v[0] - v[1]) * (2.0 * v[0] - v[1] - v[2]);
                      sup = std::max(sup, std::abs(g2));
                    });
    BernsteinAudit a;
    a.inequality = "sup|g2| <= 2 a_n (sup|theta0| + 3 a_n)";
    a.lhs = sup;
    a.rhs = 2.0 * a_n * (sup_norm(theta0) + 3.0 * a_n);
    a.slack = 1e-12 * std::max(1.0, a.rhs);
    a.pass = a.lhs <= a.rhs + a.slack;
    audits.push_back(a);
  }

  if (throw_on_violation) {
    for (const auto& a : audits)
      if (!a.pass)
        throw AuditViolation("audit_g_classes: '" + a.inequality +
                             "' failed (lhs " + std::to_string(a.lhs) +
                             " > rhs " + std::to_string(a.rhs) + " + slack " +
                             std::to_string(a.slack) + ")");
  }
  return audits;
}

}  // namespace svreg
