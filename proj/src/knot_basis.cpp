#include "svreg/knot_basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "svreg/errors.hpp"

namespace svreg {

bool KnotBasisFunction::contains(std::span<const double> x) const {
  std::size_t k = 0;
  for (int j = 0; (SubsetMask{1} << j) <= subset; ++j) {
    if (subset & (SubsetMask{1} << j)) {
      if (x[j] < knot[k]) return false;
      ++k;
    }
  }
  return true;
}

KnotBasis generate_basis(std::span<const double> X, std::size_t n, int dim) {
  if (n == 0) throw EmptyData("generate_basis: no observations");
  for (std::size_t i = 0; i < n * static_cast<std::size_t>(dim); ++i)
    if (!(X[i] >= 0.0 && X[i] <= 1.0))
      throw DomainError("generate_basis: coordinate outside [0,1]");
  std::map<std::pair<SubsetMask, std::vector<double>>, bool> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = X.data() + i * dim;
    for (SubsetMask s = 1; s < (SubsetMask{1} << dim); ++s) {
      SubsetMask canon = 0;
      std::vector<double> knot;
      for (int j = 0; j < dim; ++j) {
        if ((s & (SubsetMask{1} << j)) && xi[j] > 0.0) {
          canon |= SubsetMask{1} << j;
          knot.push_back(xi[j]);
        }
      }
      if (canon == 0) continue;  // identically 1, absorbed by the intercept
      seen.emplace(std::make_pair(canon, std::move(knot)), true);
    }
  }
  KnotBasis basis;
  basis.dim = dim;
  basis.source_n = n;
  basis.functions.reserve(seen.size());
  for (auto& [key, _] : seen)
    basis.functions.push_back(KnotBasisFunction{key.first, key.second});
  return basis;
}

double basis_count_bound(std::size_t n, int dim) {
  return std::pow(static_cast<double>(n) * std::exp(1.0) / dim, dim);
}

double FittedFunction::predict(std::span<const double> x) const {
  for (double c : x)
    if (!(c >= 0.0 && c <= 1.0))
      throw DomainError("predict: point outside [0,1]^d");
  double v = intercept;
  for (std::size_t j = 0; j < coef.size(); ++j)
    if (coef[j] != 0.0 && basis->functions[j].contains(x)) v += coef[j];
  return v;
}

double fit_svn(const FittedFunction& fit) {
  double s = std::abs(fit.intercept);
  for (double c : fit.coef) s += std::abs(c);
  return s;
}

namespace {

std::vector<std::vector<double>> knot_grid(
    const FittedFunction& fit, const std::vector<std::vector<double>>& extra) {
  const int d = fit.basis->dim;
  std::vector<std::vector<double>> grid(d, std::vector<double>{0.0});
  for (const auto& bf : fit.basis->functions) {
    std::size_t k = 0;
    for (int j = 0; j < d; ++j) {
      if (bf.subset & (SubsetMask{1} << j)) grid[j].push_back(bf.knot[k++]);
    }
  }
  for (int j = 0; j < d && j < static_cast<int>(extra.size()); ++j)
    grid[j].insert(grid[j].end(), extra[j].begin(), extra[j].end());
  for (auto& axis : grid) {
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }
  return grid;
}

std::size_t exact_pos(const std::vector<double>& axis, double t) {
  auto it = std::lower_bound(axis.begin(), axis.end(), t);
  return static_cast<std::size_t>(it - axis.begin());
}

// Scatter the fit into its atom array on `grid`: the basis function with
// subset s and knot u contributes coef at (index of u_j on axis j for j in s,
// 0 elsewhere); the intercept sits at the origin. Prefix sums along every
// axis then reproduce the fit values on the tensor grid.
std::vector<double> atom_array(const FittedFunction& fit,
                               const std::vector<std::vector<double>>& grid,
                               std::span<const std::size_t> strides,
                               std::size_t total) {
  const int d = fit.basis->dim;
  std::vector<double> atoms(total, 0.0);
  atoms[0] = fit.intercept;
  for (std::size_t f = 0; f < fit.coef.size(); ++f) {
    if (fit.coef[f] == 0.0) continue;
    const auto& bf = fit.basis->functions[f];
    std::size_t flat = 0, k = 0;
    for (int j = 0; j < d; ++j) {
      if (bf.subset & (SubsetMask{1} << j))
        flat += exact_pos(grid[j], bf.knot[k++]) * strides[j];
    }
    atoms[flat] += fit.coef[f];
  }
  return atoms;
}

}  // namespace

GridFunction render(const FittedFunction& fit,
                    const std::vector<std::vector<double>>& extra_grid) {
  const int d = fit.basis->dim;
  auto grid = knot_grid(fit, extra_grid);
  std::vector<std::size_t> shape(d), strides(d, 1);
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) {
    shape[j] = grid[j].size();
    total *= shape[j];
  }
  for (int j = d - 2; j >= 0; --j) strides[j] = strides[j + 1] * shape[j + 1];
  std::vector<double> vals = atom_array(fit, grid, strides, total);
  for (int axis = 0; axis < d; ++axis) {
    for_each_index(shape, [&](std::span<const std::size_t> idx) {
      if (idx[axis] == 0) return;
      std::size_t flat = 0;
      for (int j = 0; j < d; ++j) flat += idx[j] * strides[j];
      vals[flat] += vals[flat - strides[axis]];
    });
  }
  return GridFunction(std::move(grid), std::move(vals));
}

double integrate_fit_vs_grid(
    const FittedFunction& fit, const GridFunction& ref,
    const std::function<double(double, double)>& integrand) {
  const int d = fit.basis->dim;
  if (ref.dim() != d)
    throw DomainError("integrate_fit_vs_grid: dimension mismatch");
  if (d > 3)
    throw DomainError("integrate_fit_vs_grid: supported for d <= 3");
  auto grid = knot_grid(fit, ref.grid());
  std::vector<std::size_t> shape(d);
  for (int j = 0; j < d; ++j) shape[j] = grid[j].size();
  std::vector<std::vector<double>> widths(d);
  std::vector<std::vector<std::size_t>> ref_map(d);
  for (int j = 0; j < d; ++j) {
    widths[j].resize(shape[j]);
    for (std::size_t i = 0; i + 1 < shape[j]; ++i)
      widths[j][i] = grid[j][i + 1] - grid[j][i];
    widths[j][shape[j] - 1] = 1.0 - grid[j].back();
    ref_map[j].reserve(shape[j]);
    for (double t : grid[j]) ref_map[j].push_back(ref.locate(j, t));
  }

  // Atoms bucketed by the first index so planes can be streamed.
  const std::size_t plane = [&] {
    std::size_t t = 1;
    for (int j = 1; j < d; ++j) t *= shape[j];
    return t;
  }();
  std::vector<std::size_t> pstrides(d, 1);
  for (int j = d - 2; j >= 1; --j) pstrides[j] = pstrides[j + 1] * shape[j + 1];
  struct Atom {
    std::size_t i0;
    std::size_t rest;
    double w;
  };
  std::vector<Atom> atoms;
  atoms.push_back({0, 0, fit.intercept});
  for (std::size_t f = 0; f < fit.coef.size(); ++f) {
    if (fit.coef[f] == 0.0) continue;
    const auto& bf = fit.basis->functions[f];
    std::size_t i0 = 0, rest = 0, k = 0;
    for (int j = 0; j < d; ++j) {
      if (bf.subset & (SubsetMask{1} << j)) {
        std::size_t pos = exact_pos(grid[j], bf.knot[k++]);
        if (j == 0)
          i0 = pos;
        else
          rest += pos * pstrides[j];
      }
    }
    atoms.push_back({i0, rest, fit.coef[f]});
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.i0 < b.i0; });

  std::vector<double> prev(plane, 0.0), cur(plane);
  double total = 0.0;
  std::size_t next_atom = 0;
  const std::size_t n1 = d >= 2 ? shape[1] : 1;
  const std::size_t n2 = d >= 3 ? shape[2] : 1;
  for (std::size_t i0 = 0; i0 < shape[0]; ++i0) {
    std::fill(cur.begin(), cur.end(), 0.0);
    while (next_atom < atoms.size() && atoms[next_atom].i0 == i0) {
      cur[atoms[next_atom].rest] += atoms[next_atom].w;
      ++next_atom;
    }
    // Prefix sums within the plane (axes 1..d-1), then accumulate axis 0.
    if (d >= 2) {
      for (std::size_t a = 0; a < n1; ++a)
        for (std::size_t b = 1; b < n2; ++b) cur[a * n2 + b] += cur[a * n2 + b - 1];
      for (std::size_t a = 1; a < n1; ++a)
        for (std::size_t b = 0; b < n2; ++b) cur[a * n2 + b] += cur[(a - 1) * n2 + b];
    }
    for (std::size_t k = 0; k < plane; ++k) cur[k] += prev[k];

    const double w0 = widths[0][i0];
    if (w0 > 0.0) {
      std::vector<std::size_t> ridx(d);
      ridx[0] = ref_map[0][i0];
      for (std::size_t a = 0; a < n1; ++a) {
        if (d >= 2) ridx[1] = ref_map[1][a];
        double wa = d >= 2 ? widths[1][a] : 1.0;
        if (wa == 0.0) continue;
        for (std::size_t b = 0; b < n2; ++b) {
          if (d >= 3) ridx[2] = ref_map[2][b];
          double wb = d >= 3 ? widths[2][b] : 1.0;
          if (wb == 0.0) continue;
          const double fv = cur[a * n2 + b];
          const double rv = ref.value_at(ridx);
          total += w0 * wa * wb * integrand(fv, rv);
        }
      }
    }
    std::swap(prev, cur);
  }
  return total;
}

}  // namespace svreg
