#pragma once

#include <memory>
#include <span>
#include <vector>

#include "svreg/grid_function.hpp"

namespace svreg {

// Indicator basis function x -> 1{x_j >= knot_j for all j in subset}.
// Knot coordinates are strictly positive: a zero coordinate makes the
// indicator constant along that axis, so such axes are dropped from the
// subset when the function is built (keeping the l1 identity exact).
struct KnotBasisFunction {
  SubsetMask subset = 0;
  std::vector<double> knot;  // coordinates for set bits, ascending axis order

  bool contains(std::span<const double> x) const;
};

struct KnotBasis {
  int dim = 0;
  std::size_t source_n = 0;
  std::vector<KnotBasisFunction> functions;  // sorted (subset, knot), deduped

  std::size_t size() const { return functions.size(); }
};

// All indicators anchored at observed points: for every nonempty subset s and
// observation i, the function 1{x_s >= (X_i)_s}, canonicalized and
// deduplicated. X is row-major n x dim with coordinates in [0,1].
KnotBasis generate_basis(std::span<const double> X, std::size_t n, int dim);

// (n e / d)^d, the cap on the basis size for n >= d.
double basis_count_bound(std::size_t n, int dim);

struct FittedFunction {
  double intercept = 0.0;
  std::vector<double> coef;
  std::shared_ptr<const KnotBasis> basis;

  double predict(std::span<const double> x) const;
};

// |b0| + sum |b_j|; equals the sectional variation norm of the rendered fit.
double fit_svn(const FittedFunction& fit);

// Piecewise-constant rendering on the grid spanned by the knots (optionally
// refined by extra per-axis breakpoints).
GridFunction render(const FittedFunction& fit,
                    const std::vector<std::vector<double>>& extra_grid = {});

// Exact integral over [0,1]^d (uniform measure) of
// integrand(fit(x), ref(x)); streams over the refinement of the fit's knot
// grid and ref's grid without materializing the tensor rendering. d <= 3.
double integrate_fit_vs_grid(
    const FittedFunction& fit, const GridFunction& ref,
    const std::function<double(double, double)>& integrand);

}  // namespace svreg
