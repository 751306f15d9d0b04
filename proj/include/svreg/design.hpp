#pragma once

#include <span>
#include <vector>

#include "svreg/knot_basis.hpp"

namespace svreg {

// Matrix-free view of the indicator design: column j is phi_j(x_i) over the
// sample. Products are evaluated by dominance counting (prefix sums for
// 1-coordinate subsets, a Fenwick sweep for pairs, direct scan otherwise),
// so a product costs O((n + p) log) rather than O(n p).
class DesignOperator {
 public:
  DesignOperator(std::shared_ptr<const KnotBasis> basis,
                 std::span<const double> X, std::size_t n);

  std::size_t n() const { return n_; }
  std::size_t p() const { return basis_->size(); }
  const KnotBasis& basis() const { return *basis_; }

  // u_i = c0 + sum_j coef_j phi_j(x_i)
  void forward(double c0, std::span<const double> coef,
               std::span<double> u) const;

  // g0 = sum_i r_i ;  g_j = sum_i r_i phi_j(x_i)
  void adjoint(std::span<const double> r, double& g0,
               std::span<double> g) const;

 private:
  struct Group {
    SubsetMask subset = 0;
    int k = 0;                      // popcount
    std::vector<int> axes;
    std::vector<std::size_t> cols;  // global column ids, knot-sorted per kind
    // k == 1: knot values ascending; data order by the axis ascending.
    std::vector<double> knots1;
    std::vector<std::size_t> data_order1;
    std::vector<double> data_sorted1;
    // k == 2: knots sorted by first coord; ranks on the second coordinate
    // computed over the merged (knot, data) value set.
    std::vector<double> kc1, kc2;
    std::vector<int> knot_rank2;
    std::vector<std::size_t> data_order2;  // data sorted by first coord
    std::vector<int> data_rank2;           // rank2 in data index order
    int rank_count = 0;
    // k >= 3: flattened knot coordinates for direct evaluation.
    std::vector<double> knots_flat;
  };

  std::shared_ptr<const KnotBasis> basis_;
  std::size_t n_ = 0;
  int dim_ = 0;
  std::vector<double> x_;  // row-major copy
  std::vector<Group> groups_;
};

}  // namespace svreg
