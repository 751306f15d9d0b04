#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace svreg {

using SubsetMask = std::uint32_t;

inline int popcount_mask(SubsetMask m) {
  int c = 0;
  while (m) {
    c += static_cast<int>(m & 1u);
    m >>= 1;
  }
  return c;
}

// Right-continuous piecewise-constant function on [0,1]^d.
//
// Per-axis breakpoints are strictly increasing, lie in [0,1] and start at 0.
// The value stored at corner (i_1,...,i_d) extends over the half-open
// rectangle northeast of that corner, up to the next breakpoint (or 1 on the
// last cell). Values are stored row-major with the last axis fastest.
class GridFunction {
 public:
  GridFunction(std::vector<std::vector<double>> grid,
               std::vector<double> values);

  static GridFunction constant(int dim, double c);

  int dim() const { return static_cast<int>(grid_.size()); }
  const std::vector<std::vector<double>>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  std::size_t axis_size(int j) const { return grid_[j].size(); }
  std::size_t size() const { return values_.size(); }

  std::size_t flat_index(std::span<const std::size_t> idx) const;
  double value_at(std::span<const std::size_t> idx) const {
    return values_[flat_index(idx)];
  }
  double value_at_origin() const { return values_[0]; }

  // Evaluation at x in [0,1]^d: locate the last breakpoint <= x per axis.
  double operator()(std::span<const double> x) const;
  double eval1(double x) const {
    return operator()(std::span<const double>(&x, 1));
  }

  // Index of the cell containing coordinate x on the given axis.
  std::size_t locate(int axis, double x) const;

  // Same function on a refined grid (per-axis superset of breakpoints).
  GridFunction refine(const std::vector<std::vector<double>>& finer_grid) const;

  bool same_grid(const GridFunction& other) const {
    return grid_ == other.grid_;
  }

 private:
  std::vector<std::vector<double>> grid_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
};

// Union of per-axis breakpoints of several functions (all of dimension d).
std::vector<std::vector<double>> union_grid(
    std::span<const GridFunction* const> fns);

// Pointwise combination evaluated on the union grid of the inputs.
GridFunction combine_on_union_grid(
    std::span<const GridFunction* const> fns,
    const std::function<double(std::span<const double>)>& op);

// Visit the tuple of input values at every corner of the union grid.
void scan_union_grid(std::span<const GridFunction* const> fns,
                     const std::function<void(std::span<const double>)>& op);

// Iterate all multi-indices of the given shape, last axis fastest.
void for_each_index(std::span<const std::size_t> shape,
                    const std::function<void(std::span<const std::size_t>)>& fn);

// Exact integral of op(f_1(x),...,f_k(x)) over [0,1]^d against Lebesgue
// measure (cell-wise sum; exact since the integrand is piecewise constant).
double integrate_cells(std::span<const GridFunction* const> fns,
                       const std::function<double(std::span<const double>)>& op);

// L_r(Lebesgue) norm of a grid function, exact cell-wise quadrature.
double lebesgue_norm(const GridFunction& f, int r);

}  // namespace svreg
