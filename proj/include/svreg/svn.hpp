#pragma once

#include <array>
#include <vector>

#include "svreg/grid_function.hpp"

namespace svreg {

// Signed measure generated by the section f_s. Atoms sit at face grid
// corners whose indices are all >= 1 (the section has no mass on the zero
// faces); masses are inclusion-exclusion mixed differences over face cells.
struct SectionMeasure {
  SubsetMask subset = 0;
  std::vector<std::pair<std::vector<std::size_t>, double>> atoms;
  double total_abs_mass() const;
  double positive_mass() const;
  double negative_mass() const;
};

// Restriction of f to the face of s: x_s -> f(x_s, 0_{-s}).
GridFunction section(const GridFunction& f, SubsetMask s);

SectionMeasure section_measure(const GridFunction& f, SubsetMask s);

// Sectional variation norm: |f(0)| + sum over nonempty subsets of the total
// variation of the section measure. Exact for grid functions.
double svn_exact(const GridFunction& f);

double sup_norm(const GridFunction& f);

struct MixtureComponent {
  double alpha = 0.0;
  GridFunction cdf = GridFunction::constant(1, 1.0);
};

// Mixture representation of a grid function with norm budget M:
//   f(x) = f0 + (M - |f0|) * sum_s [a_{s,1} G_{s,1}(x_s) - a_{s,2} G_{s,2}(x_s)]
// where each G is a CDF on the face of s, all alphas are >= 0 and sum to <= 1.
struct MixtureRepresentation {
  int dim = 0;
  double f0 = 0.0;
  double M = 0.0;
  // components[mask - 1] for nonempty subset mask: [0] positive, [1] negative.
  std::vector<std::array<MixtureComponent, 2>> components;

  const MixtureComponent& at(SubsetMask s, int part) const {
    return components[s - 1][part];
  }
  void validate(double tol = 1e-9) const;
  double alpha_sum() const;
};

// True when g is the CDF of a probability measure on its grid corners:
// values in [0,1], all (boundary-extended) atomic masses >= 0, total mass 1.
bool is_cdf(const GridFunction& g, double tol = 1e-9);

MixtureRepresentation decompose(const GridFunction& f, double M);

GridFunction synthesize(const MixtureRepresentation& rep);

}  // namespace svreg
