#include "svreg/grid_function.hpp"

#include <algorithm>
#include <cmath>

#include "svreg/errors.hpp"

namespace svreg {

GridFunction::GridFunction(std::vector<std::vector<double>> grid,
                           std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (grid_.empty()) throw DomainError("GridFunction: dimension must be >= 1");
  std::size_t total = 1;
  for (const auto& axis : grid_) {
    if (axis.empty() || axis.front() != 0.0)
      throw DomainError("GridFunction: each axis must start at 0");
    for (std::size_t i = 0; i < axis.size(); ++i) {
      if (axis[i] < 0.0 || axis[i] > 1.0)
        throw DomainError("GridFunction: breakpoints must lie in [0,1]");
      if (i > 0 && !(axis[i] > axis[i - 1]))
        throw DomainError("GridFunction: breakpoints must be strictly increasing");
    }
    total *= axis.size();
  }
  if (values_.size() != total)
    throw DomainError("GridFunction: value count does not match grid shape");
  strides_.assign(grid_.size(), 1);
  for (int j = dim() - 2; j >= 0; --j)
    strides_[j] = strides_[j + 1] * grid_[j + 1].size();
}

GridFunction GridFunction::constant(int dim, double c) {
  std::vector<std::vector<double>> grid(dim, std::vector<double>{0.0});
  return GridFunction(std::move(grid), {c});
}

std::size_t GridFunction::flat_index(std::span<const std::size_t> idx) const {
  std::size_t f = 0;
  for (int j = 0; j < dim(); ++j) f += idx[j] * strides_[j];
  return f;
}

std::size_t GridFunction::locate(int axis, double x) const {
  const auto& b = grid_[axis];
  if (x < 0.0 || x > 1.0)
    throw DomainError("GridFunction: evaluation point outside [0,1]^d");
  auto it = std::upper_bound(b.begin(), b.end(), x);
  return static_cast<std::size_t>(it - b.begin()) - 1;
}

double GridFunction::operator()(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim())
    throw DomainError("GridFunction: point dimension mismatch");
  std::size_t f = 0;
  for (int j = 0; j < dim(); ++j) f += locate(j, x[j]) * strides_[j];
  return values_[f];
}

GridFunction GridFunction::refine(
    const std::vector<std::vector<double>>& finer_grid) const {
  const int d = dim();
  // Per-axis map: refined index -> coarse cell index.
  std::vector<std::vector<std::size_t>> maps(d);
  for (int j = 0; j < d; ++j) {
    maps[j].reserve(finer_grid[j].size());
    for (double t : finer_grid[j]) maps[j].push_back(locate(j, t));
  }
  std::vector<std::size_t> shape(d);
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) {
    shape[j] = finer_grid[j].size();
    total *= shape[j];
  }
  std::vector<double> out(total);
  std::vector<std::size_t> src(d);
  std::size_t k = 0;
  for_each_index(shape, [&](std::span<const std::size_t> idx) {
    for (int j = 0; j < d; ++j) src[j] = maps[j][idx[j]];
    out[k++] = value_at(src);
  });
  return GridFunction(finer_grid, std::move(out));
}

std::vector<std::vector<double>> union_grid(
    std::span<const GridFunction* const> fns) {
  const int d = fns.front()->dim();
  std::vector<std::vector<double>> g(d);
  for (const GridFunction* f : fns) {
    for (int j = 0; j < d; ++j)
      g[j].insert(g[j].end(), f->grid()[j].begin(), f->grid()[j].end());
  }
  for (auto& axis : g) {
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }
  return g;
}

void for_each_index(
    std::span<const std::size_t> shape,
    const std::function<void(std::span<const std::size_t>)>& fn) {
  const int d = static_cast<int>(shape.size());
  std::vector<std::size_t> idx(d, 0);
  for (;;) {
    fn(idx);
    int j = d - 1;
    while (j >= 0) {
      if (++idx[j] < shape[j]) break;
      idx[j] = 0;
      --j;
    }
    if (j < 0) return;
  }
}

void scan_union_grid(std::span<const GridFunction* const> fns,
                     const std::function<void(std::span<const double>)>& op) {
  const int d = fns.front()->dim();
  auto grid = union_grid(fns);
  std::vector<std::vector<std::vector<std::size_t>>> maps(fns.size());
  for (std::size_t k = 0; k < fns.size(); ++k) {
    maps[k].resize(d);
    for (int j = 0; j < d; ++j) {
      maps[k][j].reserve(grid[j].size());
      for (double t : grid[j]) maps[k][j].push_back(fns[k]->locate(j, t));
    }
  }
  std::vector<std::size_t> shape(d);
  for (int j = 0; j < d; ++j) shape[j] = grid[j].size();
  std::vector<double> args(fns.size());
  std::vector<std::size_t> src(d);
  for_each_index(shape, [&](std::span<const std::size_t> idx) {
    for (std::size_t k = 0; k < fns.size(); ++k) {
      for (int j = 0; j < d; ++j) src[j] = maps[k][j][idx[j]];
      args[k] = fns[k]->value_at(src);
    }
    op(args);
  });
}

GridFunction combine_on_union_grid(
    std::span<const GridFunction* const> fns,
    const std::function<double(std::span<const double>)>& op) {
  const int d = fns.front()->dim();
  auto grid = union_grid(fns);
  // Per function, per axis: refined index -> source cell index.
  std::vector<std::vector<std::vector<std::size_t>>> maps(fns.size());
  for (std::size_t k = 0; k < fns.size(); ++k) {
    maps[k].resize(d);
    for (int j = 0; j < d; ++j) {
      maps[k][j].reserve(grid[j].size());
      for (double t : grid[j]) maps[k][j].push_back(fns[k]->locate(j, t));
    }
  }
  std::vector<std::size_t> shape(d);
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) {
    shape[j] = grid[j].size();
    total *= shape[j];
  }
  std::vector<double> out;
  out.reserve(total);
  std::vector<double> args(fns.size());
  std::vector<std::size_t> src(d);
  for_each_index(shape, [&](std::span<const std::size_t> idx) {
    for (std::size_t k = 0; k < fns.size(); ++k) {
      for (int j = 0; j < d; ++j) src[j] = maps[k][j][idx[j]];
      args[k] = fns[k]->value_at(src);
    }
    out.push_back(op(args));
  });
  return GridFunction(std::move(grid), std::move(out));
}

double integrate_cells(
    std::span<const GridFunction* const> fns,
    const std::function<double(std::span<const double>)>& op) {
  const int d = fns.front()->dim();
  auto grid = union_grid(fns);
  std::vector<std::vector<std::size_t>> shape_holder;
  // Cell widths; the last cell extends to 1.
  std::vector<std::vector<double>> widths(d);
  for (int j = 0; j < d; ++j) {
    const auto& axis = grid[j];
    widths[j].resize(axis.size());
    for (std::size_t i = 0; i + 1 < axis.size(); ++i)
      widths[j][i] = axis[i + 1] - axis[i];
    widths[j][axis.size() - 1] = 1.0 - axis.back();
  }
  std::vector<std::vector<std::vector<std::size_t>>> maps(fns.size());
  for (std::size_t k = 0; k < fns.size(); ++k) {
    maps[k].resize(d);
    for (int j = 0; j < d; ++j) {
      maps[k][j].reserve(grid[j].size());
      for (double t : grid[j]) maps[k][j].push_back(fns[k]->locate(j, t));
    }
  }
  std::vector<std::size_t> shape(d);
  for (int j = 0; j < d; ++j) shape[j] = grid[j].size();
  double total = 0.0;
  std::vector<double> args(fns.size());
  std::vector<std::size_t> src(d);
  for_each_index(shape, [&](std::span<const std::size_t> idx) {
    double vol = 1.0;
    for (int j = 0; j < d; ++j) vol *= widths[j][idx[j]];
    if (vol == 0.0) return;
    for (std::size_t k = 0; k < fns.size(); ++k) {
      for (int j = 0; j < d; ++j) src[j] = maps[k][j][idx[j]];
      args[k] = fns[k]->value_at(src);
    }
    total += vol * op(args);
  });
  return total;
}

double lebesgue_norm(const GridFunction& f, int r) {
  const GridFunction* p = &f;
  double s = integrate_cells(
      std::span<const GridFunction* const>(&p, 1),
      [r](std::span<const double> v) { return std::pow(std::abs(v[0]), r); });
  return std::pow(s, 1.0 / r);
}

}  // namespace svreg
