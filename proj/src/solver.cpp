#include "svreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "svreg/errors.hpp"

namespace svreg {

double sieve_radius(const SieveSchedule& schedule, std::size_t n) {
  if (n < 1) throw DomainError("sieve_radius: n must be >= 1");
  switch (schedule.kind) {
    case SieveSchedule::Kind::Constant:
      return schedule.A;
    case SieveSchedule::Kind::Power:
      return schedule.A * std::pow(static_cast<double>(n), schedule.p);
  }
  return schedule.A;
}

void project_l1_ball(std::span<double> v, double radius) {
  double l1 = 0.0;
  for (double x : v) l1 += std::abs(x);
  if (l1 <= radius) return;
  if (radius <= 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  std::vector<double> u(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) u[i] = std::abs(v[i]);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    double t = (cum - radius) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0)
      tau = t;
    else
      break;
  }
  for (auto& x : v) {
    double m = std::abs(x) - tau;
    x = m > 0.0 ? (x < 0 ? -m : m) : 0.0;
  }
}

namespace {

struct Objective {
  const DesignOperator& op;
  const LossSpec& loss;
  std::span<const double> y;
  std::size_t n;
  mutable std::vector<double> u, r;

  Objective(const DesignOperator& op_, const LossSpec& loss_,
            std::span<const double> y_)
      : op(op_), loss(loss_), y(y_), n(op_.n()), u(n), r(n) {}

  // w = [intercept, coefficients]
  double value(std::span<const double> w) const {
    op.forward(w[0], w.subspan(1), u);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += loss.value(u[i], y[i]);
    double f = s / static_cast<double>(n);
    if (!std::isfinite(f))
      throw NonFinite("fit_erm: empirical risk is not finite");
    return f;
  }

  // gradient at the point of the last value() call
  void gradient(std::span<double> grad) const {
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = loss.subgradient_u(u[i], y[i]) * inv;
    double g0 = 0.0;
    op.adjoint(r, g0, grad.subspan(1));
    grad[0] = g0;
  }
};

double kkt_from(std::span<const double> w, std::span<const double> grad,
                double radius) {
  double l1 = 0.0, ginf = 0.0;
  for (double x : w) l1 += std::abs(x);
  for (double gj : grad) ginf = std::max(ginf, std::abs(gj));
  const double boundary_tol = 1e-9 * std::max(1.0, radius);
  if (l1 < radius - boundary_tol) return ginf;
  double lam_sum = 0.0;
  std::size_t active = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] != 0.0) {
      lam_sum += -(grad[j]) * (w[j] < 0 ? -1.0 : 1.0);
      ++active;
    }
  }
  if (active == 0) return ginf;
  const double lam_raw = lam_sum / static_cast<double>(active);
  const double lam = std::max(lam_raw, 0.0);
  double res = std::max(0.0, -lam_raw);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] != 0.0) {
      double s = w[j] < 0 ? -1.0 : 1.0;
      res = std::max(res, std::abs(grad[j] + lam * s));
    } else {
      res = std::max(res, std::abs(grad[j]) - lam);
    }
  }
  return res;
}

}  // namespace

SolveReport fit_erm(const DataSet& data, const LossSpec& loss, double radius,
                    const SolveOptions& opts,
                    std::shared_ptr<const KnotBasis> basis) {
  if (data.n == 0) throw EmptyData("fit_erm: no observations");
  if (radius < 0.0) throw DomainError("fit_erm: radius must be >= 0");
  if (!basis)
    basis = std::make_shared<const KnotBasis>(
        generate_basis(data.x, data.n, data.dim));

  SolveReport rep;
  rep.fit.basis = basis;
  rep.fit.coef.assign(basis->size(), 0.0);

  DesignOperator op(basis, data.x, data.n);
  Objective obj(op, loss, data.y);
  const std::size_t dimw = basis->size() + 1;
  std::vector<double> w(dimw, 0.0);

  if (radius == 0.0) {
    rep.final_objective = obj.value(w);
    rep.stop_reason = "degenerate-ball";
    return rep;
  }

  std::vector<double> grad(dimw), wprev(dimw), gprev(dimw), cand(dimw);
  double f = obj.value(w);
  obj.gradient(grad);
  double step = opts.step_initial;
  std::size_t stall = 0;
  std::size_t it = 0;
  rep.stop_reason = "max-iters";
  for (; it < opts.max_iters; ++it) {
    const double res = kkt_from(w, grad, radius);
    if (res <= opts.grad_tol) {
      rep.stop_reason = "kkt";
      break;
    }
    // Barzilai-Borwein step from the previous accepted move.
    if (it > 0) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t j = 0; j < dimw; ++j) {
        double sj = w[j] - wprev[j];
        double yj = grad[j] - gprev[j];
        ss += sj * sj;
        sy += sj * yj;
      }
      if (sy > 0.0 && ss > 0.0)
        step = std::min(std::max(ss / sy, 1e-12), 1e12);
    }
    wprev = w;
    gprev = grad;
    double fnew = f;
    bool accepted = false;
    double t = step;
    for (int bt = 0; bt < 80; ++bt) {
      for (std::size_t j = 0; j < dimw; ++j) cand[j] = w[j] - t * grad[j];
      project_l1_ball(cand, radius);
      double dd = 0.0;
      for (std::size_t j = 0; j < dimw; ++j) {
        double dj = cand[j] - w[j];
        dd += dj * dj;
      }
      if (dd == 0.0) break;  // projected point equals current iterate
      fnew = obj.value(cand);
      if (fnew <= f - opts.sufficient_decrease / (2.0 * t) * dd) {
        accepted = true;
        break;
      }
      t *= opts.step_shrink;
    }
    if (!accepted) {
      rep.stop_reason = "step";
      break;
    }
    std::swap(w, cand);
    obj.value(w);  // refresh predictions for the gradient
    obj.gradient(grad);
    const double decrease = f - fnew;
    f = fnew;
    if (decrease <= opts.objective_tol * std::max(1.0, std::abs(f))) {
      if (++stall >= 3) {
        rep.stop_reason = "objective";
        ++it;
        break;
      }
    } else {
      stall = 0;
    }
  }
  rep.max_iters_hit = (it >= opts.max_iters);
  rep.iterations = it;
  rep.fit.intercept = w[0];
  for (std::size_t j = 0; j + 1 < dimw; ++j) rep.fit.coef[j] = w[j + 1];
  rep.final_objective = f;
  rep.kkt_residual = kkt_from(w, grad, radius);
  rep.active_set_size = 0;
  for (double x : w)
    if (x != 0.0) ++rep.active_set_size;
  return rep;
}

double kkt_residual(const FittedFunction& fit, const DataSet& data,
                    const LossSpec& loss, double radius) {
  auto basis = fit.basis;
  DesignOperator op(basis, data.x, data.n);
  Objective obj(op, loss, data.y);
  std::vector<double> w(basis->size() + 1);
  w[0] = fit.intercept;
  std::copy(fit.coef.begin(), fit.coef.end(), w.begin() + 1);
  obj.value(w);
  std::vector<double> grad(w.size());
  obj.gradient(grad);
  return kkt_from(w, grad, radius);
}

}  // namespace svreg
