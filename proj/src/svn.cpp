#include "svreg/svn.hpp"

#include <algorithm>
#include <cmath>

#include "svreg/errors.hpp"

namespace svreg {

double SectionMeasure::total_abs_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += std::abs(a.second);
  return s;
}

double SectionMeasure::positive_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += std::max(a.second, 0.0);
  return s;
}

double SectionMeasure::negative_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += std::max(-a.second, 0.0);
  return s;
}

GridFunction section(const GridFunction& f, SubsetMask s) {
  const int d = f.dim();
  if (s == 0 || s >= (SubsetMask{1} << d))
    throw DomainError("section: subset mask out of range");
  std::vector<int> axes;
  for (int j = 0; j < d; ++j)
    if (s & (SubsetMask{1} << j)) axes.push_back(j);
  std::vector<std::vector<double>> grid;
  std::vector<std::size_t> shape;
  for (int j : axes) {
    grid.push_back(f.grid()[j]);
    shape.push_back(f.axis_size(j));
  }
  std::vector<double> vals;
  vals.reserve([&] {
    std::size_t t = 1;
    for (auto m : shape) t *= m;
    return t;
  }());
  std::vector<std::size_t> src(d, 0);
  for_each_index(shape, [&](std::span<const std::size_t> idx) {
    for (std::size_t k = 0; k < axes.size(); ++k) src[axes[k]] = idx[k];
    vals.push_back(f.value_at(src));
  });
  return GridFunction(std::move(grid), std::move(vals));
}

namespace {

// Iterated first differences of `vals` (shape `shape`) along every axis.
// Output has shape (shape[j] - 1) per axis; entry i corresponds to the mixed
// difference at corner (i + 1) of the input.
std::vector<double> mixed_differences(std::vector<double> vals,
                                      std::vector<std::size_t> shape) {
  const int k = static_cast<int>(shape.size());
  std::vector<std::size_t> strides(k, 1);
  for (int j = k - 2; j >= 0; --j) strides[j] = strides[j + 1] * shape[j + 1];
  for (int axis = 0; axis < k; ++axis) {
    std::vector<std::size_t> new_shape = shape;
    new_shape[axis] -= 1;
    std::size_t total = 1;
    for (auto m : new_shape) total *= m;
    std::vector<double> out(total);
    std::vector<std::size_t> new_strides(k, 1);
    for (int j = k - 2; j >= 0; --j)
      new_strides[j] = new_strides[j + 1] * new_shape[j + 1];
    for_each_index(new_shape, [&](std::span<const std::size_t> idx) {
      std::size_t hi = 0, out_i = 0;
      for (int j = 0; j < k; ++j) {
        std::size_t src_index = idx[j] + (j == axis ? 1 : 0);
        hi += src_index * strides[j];
        out_i += idx[j] * new_strides[j];
      }
      out[out_i] = vals[hi] - vals[hi - strides[axis]];
    });
    vals = std::move(out);
    shape = std::move(new_shape);
    strides = std::move(new_strides);
  }
  return vals;
}

}  // namespace

SectionMeasure section_measure(const GridFunction& f, SubsetMask s) {
  GridFunction face = section(f, s);
  const int k = face.dim();
  std::vector<std::size_t> shape(k);
  for (int j = 0; j < k; ++j) shape[j] = face.axis_size(j);
  SectionMeasure m;
  m.subset = s;
  bool degenerate = false;
  for (auto sz : shape)
    if (sz < 2) degenerate = true;
  if (degenerate) return m;  // no corners with all indices >= 1
  std::vector<double> masses = mixed_differences(face.values(), shape);
  std::vector<std::size_t> dshape(k);
  for (int j = 0; j < k; ++j) dshape[j] = shape[j] - 1;
  std::size_t pos = 0;
  for_each_index(dshape, [&](std::span<const std::size_t> idx) {
    double mass = masses[pos++];
    if (mass != 0.0) {
      std::vector<std::size_t> corner(idx.begin(), idx.end());
      for (auto& c : corner) c += 1;
      m.atoms.emplace_back(std::move(corner), mass);
    }
  });
  return m;
}

double svn_exact(const GridFunction& f) {
  const int d = f.dim();
  double total = std::abs(f.value_at_origin());
  for (SubsetMask s = 1; s < (SubsetMask{1} << d); ++s)
    total += section_measure(f, s).total_abs_mass();
  return total;
}

double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double MixtureRepresentation::alpha_sum() const {
  double s = 0.0;
  for (const auto& pair : components) s += pair[0].alpha + pair[1].alpha;
  return s;
}

bool is_cdf(const GridFunction& g, double tol) {
  for (double v : g.values())
    if (v < -tol || v > 1.0 + tol) return false;
  const int k = g.dim();
  std::vector<std::size_t> shape(k);
  for (int j = 0; j < k; ++j) shape[j] = g.axis_size(j);
  // Total mass = value at the top corner.
  std::vector<std::size_t> top_idx(k);
  for (int j = 0; j < k; ++j) top_idx[j] = shape[j] - 1;
  if (std::abs(g.value_at(top_idx) - 1.0) > tol) return false;
  // Boundary-extended mixed differences (value 0 below index 0) must be
  // nonnegative: pad the array with a zero layer per axis and difference.
  std::vector<std::size_t> pshape(k);
  std::size_t ptotal = 1;
  for (int j = 0; j < k; ++j) {
    pshape[j] = shape[j] + 1;
    ptotal *= pshape[j];
  }
  std::vector<double> padded(ptotal, 0.0);
  std::vector<std::size_t> pstrides(k, 1);
  for (int j = k - 2; j >= 0; --j) pstrides[j] = pstrides[j + 1] * pshape[j + 1];
  for_each_index(shape, [&](std::span<const std::size_t> idx) {
    std::size_t p = 0;
    for (int j = 0; j < k; ++j) p += (idx[j] + 1) * pstrides[j];
    padded[p] = g.value_at(idx);
  });
  std::vector<double> masses = mixed_differences(std::move(padded), pshape);
  for (double mass : masses)
    if (mass < -tol) return false;
  return true;
}

void MixtureRepresentation::validate(double tol) const {
  if (dim < 1) throw DomainError("mixture: dimension must be >= 1");
  const std::size_t want = (std::size_t{1} << dim) - 1;
  if (components.size() != want)
    throw DomainError("mixture: expected one component pair per nonempty subset");
  if (M < 0.0) throw DomainError("mixture: norm budget M must be >= 0");
  if (std::abs(f0) > M + tol)
    throw DomainError("mixture: |f0| must not exceed M");
  double asum = 0.0;
  for (SubsetMask s = 1; s <= want; ++s) {
    const int k = popcount_mask(s);
    for (int part = 0; part < 2; ++part) {
      const MixtureComponent& c = at(s, part);
      if (c.alpha < -tol) throw DomainError("mixture: negative weight");
      if (c.cdf.dim() != k)
        throw DomainError("mixture: CDF dimension does not match its face");
      if (!is_cdf(c.cdf, tol))
        throw DomainError("mixture: component is not a CDF");
      asum += c.alpha;
    }
  }
  if (asum > 1.0 + tol)
    throw DomainError("mixture: weights must sum to at most 1");
}

MixtureRepresentation decompose(const GridFunction& f, double M) {
  const int d = f.dim();
  const double norm = svn_exact(f);
  const double f0 = f.value_at_origin();
  if (norm > M + 1e-12 * std::max(1.0, M))
    throw NormBudgetExceeded("decompose: sectional variation norm exceeds M");
  const double scale = M - std::abs(f0);
  const bool constant = (norm == std::abs(f0));
  if (scale <= 0.0 && !constant)
    throw DegenerateScale("decompose: M equals |f(0)| but f is not constant");

  MixtureRepresentation rep;
  rep.dim = d;
  rep.f0 = f0;
  rep.M = M;
  rep.components.resize((std::size_t{1} << d) - 1);
  for (SubsetMask s = 1; s < (SubsetMask{1} << d); ++s) {
    SectionMeasure meas = section_measure(f, s);
    GridFunction face = section(f, s);
    const int k = face.dim();
    std::vector<std::size_t> shape(k);
    std::size_t total = 1;
    for (int j = 0; j < k; ++j) {
      shape[j] = face.axis_size(j);
      total *= shape[j];
    }
    std::vector<std::size_t> strides(k, 1);
    for (int j = k - 2; j >= 0; --j) strides[j] = strides[j + 1] * shape[j + 1];
    for (int part = 0; part < 2; ++part) {
      const double mass =
          part == 0 ? meas.positive_mass() : meas.negative_mass();
      MixtureComponent comp;
      if (mass <= 0.0 || scale <= 0.0) {
        // Placeholder: point mass at the face origin (CDF identically 1).
        comp.alpha = 0.0;
        comp.cdf = GridFunction(face.grid(),
                                std::vector<double>(total, 1.0));
      } else {
        std::vector<double> atoms_arr(total, 0.0);
        for (const auto& [corner, m] : meas.atoms) {
          double part_mass = part == 0 ? std::max(m, 0.0) : std::max(-m, 0.0);
          if (part_mass == 0.0) continue;
          std::size_t flat = 0;
          for (int j = 0; j < k; ++j) flat += corner[j] * strides[j];
          atoms_arr[flat] = part_mass;
        }
        // Cumulative sums along every axis turn atoms into the CDF.
        for (int axis = 0; axis < k; ++axis) {
          for_each_index(shape, [&](std::span<const std::size_t> idx) {
            if (idx[axis] == 0) return;
            std::size_t flat = 0;
            for (int j = 0; j < k; ++j) flat += idx[j] * strides[j];
            atoms_arr[flat] += atoms_arr[flat - strides[axis]];
          });
        }
        for (auto& v : atoms_arr) v /= mass;
        comp.alpha = mass / scale;
        comp.cdf = GridFunction(face.grid(), std::move(atoms_arr));
      }
      rep.components[s - 1][part] = std::move(comp);
    }
  }
  return rep;
}

GridFunction synthesize(const MixtureRepresentation& rep) {
  rep.validate();
  const int d = rep.dim;
  const double scale = rep.M - std::abs(rep.f0);
  // Union grid across all component CDFs, mapped back to ambient axes.
  std::vector<std::vector<double>> grid(d, std::vector<double>{0.0});
  for (SubsetMask s = 1; s < (SubsetMask{1} << d); ++s) {
    std::vector<int> axes;
    for (int j = 0; j < d; ++j)
      if (s & (SubsetMask{1} << j)) axes.push_back(j);
    for (int part = 0; part < 2; ++part) {
      const GridFunction& g = rep.at(s, part).cdf;
      for (std::size_t k = 0; k < axes.size(); ++k)
        grid[axes[k]].insert(grid[axes[k]].end(), g.grid()[k].begin(),
                             g.grid()[k].end());
    }
  }
  for (auto& axis : grid) {
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }
  std::vector<std::size_t> shape(d);
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) {
    shape[j] = grid[j].size();
    total *= shape[j];
  }
  // Per component, per face axis: ambient grid index -> face cell index.
  struct Active {
    SubsetMask s;
    int part;
    double alpha;
    const GridFunction* cdf;
    std::vector<int> axes;
    std::vector<std::vector<std::size_t>> maps;
  };
  std::vector<Active> act;
  for (SubsetMask s = 1; s < (SubsetMask{1} << d); ++s) {
    for (int part = 0; part < 2; ++part) {
      const MixtureComponent& c = rep.at(s, part);
      if (c.alpha == 0.0) continue;
      Active a;
      a.s = s;
      a.part = part;
      a.alpha = c.alpha;
      a.cdf = &c.cdf;
      for (int j = 0; j < d; ++j)
        if (s & (SubsetMask{1} << j)) a.axes.push_back(j);
      a.maps.resize(a.axes.size());
      for (std::size_t k = 0; k < a.axes.size(); ++k) {
        for (double t : grid[a.axes[k]])
          a.maps[k].push_back(c.cdf->locate(static_cast<int>(k), t));
      }
      act.push_back(std::move(a));
    }
  }
  std::vector<double> vals;
  vals.reserve(total);
  std::vector<std::size_t> src;
  for_each_index(shape, [&](std::span<const std::size_t> idx) {
    double v = rep.f0;
    for (const Active& a : act) {
      src.resize(a.axes.size());
      for (std::size_t k = 0; k < a.axes.size(); ++k)
        src[k] = a.maps[k][idx[a.axes[k]]];
      double g = a.cdf->value_at(src);
      v += scale * (a.part == 0 ? a.alpha * g : -a.alpha * g);
    }
    vals.push_back(v);
  });
  return GridFunction(std::move(grid), std::move(vals));
}

}  // namespace svreg
