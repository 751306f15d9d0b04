#include "svreg/design.hpp"

#include <algorithm>
#include <numeric>

namespace svreg {

namespace {

struct Fenwick {
  explicit Fenwick(int n) : tree(n + 1, 0.0) {}
  void add(int i, double v) {
    for (++i; i < static_cast<int>(tree.size()); i += i & (-i)) tree[i] += v;
  }
  double prefix(int i) const {  // sum of entries 0..i
    double s = 0.0;
    for (++i; i > 0; i -= i & (-i)) s += tree[i];
    return s;
  }
  void reset() { std::fill(tree.begin(), tree.end(), 0.0); }
  std::vector<double> tree;
};

}  // namespace

DesignOperator::DesignOperator(std::shared_ptr<const KnotBasis> basis,
                               std::span<const double> X, std::size_t n)
    : basis_(std::move(basis)), n_(n), dim_(basis_->dim),
      x_(X.begin(), X.begin() + n * basis_->dim) {
  // Columns arrive sorted by (subset, knot); group contiguous runs.
  const auto& fns = basis_->functions;
  std::size_t j = 0;
  while (j < fns.size()) {
    std::size_t j2 = j;
    while (j2 < fns.size() && fns[j2].subset == fns[j].subset) ++j2;
    Group g;
    g.subset = fns[j].subset;
    g.k = popcount_mask(g.subset);
    for (int a = 0; a < dim_; ++a)
      if (g.subset & (SubsetMask{1} << a)) g.axes.push_back(a);
    g.cols.resize(j2 - j);
    std::iota(g.cols.begin(), g.cols.end(), j);

    if (g.k == 1) {
      const int axis = g.axes[0];
      g.knots1.reserve(j2 - j);
      for (std::size_t c = j; c < j2; ++c) g.knots1.push_back(fns[c].knot[0]);
      // Lexicographic order on a single coordinate is already ascending.
      g.data_order1.resize(n_);
      std::iota(g.data_order1.begin(), g.data_order1.end(), 0);
      std::sort(g.data_order1.begin(), g.data_order1.end(),
                [&](std::size_t a, std::size_t b) {
                  return x_[a * dim_ + axis] < x_[b * dim_ + axis];
                });
      g.data_sorted1.reserve(n_);
      for (std::size_t i : g.data_order1)
        g.data_sorted1.push_back(x_[i * dim_ + axis]);
    } else if (g.k == 2) {
      const int a1 = g.axes[0], a2 = g.axes[1];
      const std::size_t m = j2 - j;
      g.kc1.reserve(m);
      g.kc2.reserve(m);
      std::vector<std::size_t> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fns[j + a].knot[0] < fns[j + b].knot[0];
      });
      std::vector<std::size_t> cols_sorted(m);
      for (std::size_t t = 0; t < m; ++t) {
        cols_sorted[t] = j + order[t];
        g.kc1.push_back(fns[j + order[t]].knot[0]);
        g.kc2.push_back(fns[j + order[t]].knot[1]);
      }
      g.cols = std::move(cols_sorted);
      // Rank the second coordinate over knots and data jointly.
      std::vector<double> vals;
      vals.reserve(m + n_);
      for (double v : g.kc2) vals.push_back(v);
      for (std::size_t i = 0; i < n_; ++i) vals.push_back(x_[i * dim_ + a2]);
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      g.rank_count = static_cast<int>(vals.size());
      auto rank_of = [&](double v) {
        return static_cast<int>(
            std::lower_bound(vals.begin(), vals.end(), v) - vals.begin());
      };
      g.knot_rank2.reserve(m);
      for (double v : g.kc2) g.knot_rank2.push_back(rank_of(v));
      g.data_rank2.reserve(n_);
      for (std::size_t i = 0; i < n_; ++i)
        g.data_rank2.push_back(rank_of(x_[i * dim_ + a2]));
      g.data_order2.resize(n_);
      std::iota(g.data_order2.begin(), g.data_order2.end(), 0);
      std::sort(g.data_order2.begin(), g.data_order2.end(),
                [&](std::size_t a, std::size_t b) {
                  return x_[a * dim_ + a1] < x_[b * dim_ + a1];
                });
    } else {
      g.knots_flat.reserve((j2 - j) * g.k);
      for (std::size_t c = j; c < j2; ++c)
        g.knots_flat.insert(g.knots_flat.end(), fns[c].knot.begin(),
                            fns[c].knot.end());
    }
    groups_.push_back(std::move(g));
    j = j2;
  }
}

void DesignOperator::forward(double c0, std::span<const double> coef,
                             std::span<double> u) const {
  std::fill(u.begin(), u.end(), c0);
  for (const Group& g : groups_) {
    const std::size_t m = g.cols.size();
    if (g.k == 1) {
      const int axis = g.axes[0];
      // prefix[c] = sum of coefficients of the first c knots
      std::vector<double> prefix(m + 1, 0.0);
      for (std::size_t t = 0; t < m; ++t)
        prefix[t + 1] = prefix[t] + coef[g.cols[t]];
      for (std::size_t i = 0; i < n_; ++i) {
        double xi = x_[i * dim_ + axis];
        std::size_t c = static_cast<std::size_t>(
            std::upper_bound(g.knots1.begin(), g.knots1.end(), xi) -
            g.knots1.begin());
        u[i] += prefix[c];
      }
    } else if (g.k == 2) {
      const int a1 = g.axes[0];
      Fenwick fw(g.rank_count);
      std::size_t kpos = 0;
      for (std::size_t di : g.data_order2) {
        const double x1 = x_[di * dim_ + a1];
        while (kpos < m && g.kc1[kpos] <= x1) {
          fw.add(g.knot_rank2[kpos], coef[g.cols[kpos]]);
          ++kpos;
        }
        u[di] += fw.prefix(g.data_rank2[di]);
      }
    } else {
      for (std::size_t t = 0; t < m; ++t) {
        const double w = coef[g.cols[t]];
        if (w == 0.0) continue;
        const double* knot = g.knots_flat.data() + t * g.k;
        for (std::size_t i = 0; i < n_; ++i) {
          const double* xi = x_.data() + i * dim_;
          bool in = true;
          for (int a = 0; a < g.k; ++a)
            if (xi[g.axes[a]] < knot[a]) {
              in = false;
              break;
            }
          if (in) u[i] += w;
        }
      }
    }
  }
}

void DesignOperator::adjoint(std::span<const double> r, double& g0,
                             std::span<double> g) const {
  g0 = 0.0;
  for (double v : r) g0 += v;
  for (const Group& grp : groups_) {
    const std::size_t m = grp.cols.size();
    if (grp.k == 1) {
      // Suffix sums of r in ascending-x order: g_u = sum over x_i >= u.
      std::vector<double> suffix(n_ + 1, 0.0);
      for (std::size_t t = n_; t-- > 0;)
        suffix[t] = suffix[t + 1] + r[grp.data_order1[t]];
      for (std::size_t t = 0; t < m; ++t) {
        double u = grp.knots1[t];
        std::size_t c = static_cast<std::size_t>(
            std::lower_bound(grp.data_sorted1.begin(), grp.data_sorted1.end(),
                             u) -
            grp.data_sorted1.begin());
        g[grp.cols[t]] = suffix[c];
      }
    } else if (grp.k == 2) {
      const int a1 = grp.axes[0];
      Fenwick fw(grp.rank_count);
      double inserted = 0.0;
      // Sweep descending first coordinate; data enters before knots query at
      // equal coordinates (x1 >= u1 is inclusive).
      std::size_t dpos = n_;
      for (std::size_t t = m; t-- > 0;) {
        const double u1 = grp.kc1[t];
        while (dpos > 0) {
          const std::size_t di = grp.data_order2[dpos - 1];
          if (x_[di * dim_ + a1] >= u1) {
            fw.add(grp.data_rank2[di], r[di]);
            inserted += r[di];
            --dpos;
          } else {
            break;
          }
        }
        const int ur = grp.knot_rank2[t];
        g[grp.cols[t]] = inserted - (ur > 0 ? fw.prefix(ur - 1) : 0.0);
      }
    } else {
      for (std::size_t t = 0; t < m; ++t) {
        const double* knot = grp.knots_flat.data() + t * grp.k;
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
          const double* xi = x_.data() + i * dim_;
          bool in = true;
          for (int a = 0; a < grp.k; ++a)
            if (xi[grp.axes[a]] < knot[a]) {
              in = false;
              break;
            }
          if (in) s += r[i];
        }
        g[grp.cols[t]] = s;
      }
    }
  }
}

}  // namespace svreg
