#pragma once

#include <string>

#include "svreg/grid_function.hpp"
#include "svreg/losses.hpp"
#include "svreg/svn.hpp"

namespace svreg {

struct NormTag {
  int r = 2;
  bool lebesgue = true;  // false: empirical measure
};

struct Bracket {
  GridFunction lower = GridFunction::constant(1, 0.0);
  GridFunction upper = GridFunction::constant(1, 0.0);
  double size = 0.0;
  NormTag norm;
};

struct BracketSet {
  std::vector<Bracket> brackets;
  double epsilon = 0.0;
  std::string class_tag;
};

struct ContainmentReport {
  bool contained = false;
  double max_violation = 0.0;
};

// lower <= f <= upper on the union of all grids involved.
ContainmentReport check_containment(const GridFunction& f, const Bracket& b,
                                    double tol = 1e-9);

double bracket_width_norm(const Bracket& b, int r = 2);

// ---------------------------------------------------------------------------
// Simplex covers

struct SimplexCover {
  std::vector<std::vector<double>> points;
  double epsilon = 0.0;  // sup-norm cover radius
  std::size_t K = 0;
};

// Uniform grid of the given spacing intersected with {w >= 0, sum w <= 1};
// spacing >= 1 collapses to the single zero point.
SimplexCover simplex_cover(double epsilon, std::size_t K);

// log of the implicit grid-cover cardinality C(floor(1/spacing) + K, K).
double log_simplex_grid_count(double spacing, std::size_t K);

// Nearest grid point by coordinate-wise rounding down; stays in the simplex.
std::vector<double> simplex_grid_round(std::span<const double> w,
                                       double spacing);

// ---------------------------------------------------------------------------
// CDF bracketing

// Staircase bracketing of the CDFs on [0,1]^k: positions on the uniform
// m-grid, values quantized to multiples of 1/levels. The family is indexed
// implicitly (enumerating it is infeasible below moderate epsilon); locate()
// builds the member bracket that contains a given CDF.
class CdfStaircaseBracketing {
 public:
  CdfStaircaseBracketing(int face_dim, int positions, int levels,
                         NormTag norm);

  // Parameters chosen so every bracket has L1(Lebesgue) size <= eps.
  static CdfStaircaseBracketing with_l1_size(int face_dim, double eps);
  // Parameters chosen so every bracket has L2(Lebesgue) size <= eps.
  static CdfStaircaseBracketing with_l2_size(int face_dim, double eps);

  Bracket locate(const GridFunction& cdf) const;
  double log_count() const;  // exact for 1-d, an upper bound otherwise
  int face_dim() const { return k_; }
  int positions() const { return m_; }
  int levels() const { return levels_; }
  double epsilon() const { return eps_; }

  // All brackets, 1-d only; throws TooLarge beyond the budget.
  std::vector<Bracket> enumerate(std::size_t budget = 200000) const;

 private:
  int k_;
  int m_;
  int levels_;
  NormTag norm_;
  double eps_ = 0.0;
};

// Classical staircase bracketing of 1-d CDFs at resolution eps (L1 sizes);
// the family cardinality is exp(O(1/eps)). eps >= 1 returns the single
// trivial bracket [0, 1].
BracketSet cdf_brackets_construct_1d(double epsilon, std::size_t budget = 200000);
CdfStaircaseBracketing cdf_bracketing_1d(double epsilon);

// Greedy set cover over all quantized CDFs on a tiny 1-d grid; a valid
// (possibly suboptimal) bracketing whose count upper-bounds the bracketing
// number. cells * levels must be <= 20.
struct BruteforceBracketing {
  BracketSet set;
  std::size_t universe_size = 0;
};
BruteforceBracketing cdf_brackets_bruteforce_tiny(double epsilon, int cells,
                                                  int levels);

// ---------------------------------------------------------------------------
// Composed brackets for unit-norm mixtures

// Brackets for synthesized mixtures with budget M <= 1, assembled from a
// simplex grid cover of the 2^{d+1} weights (empty faces carry the constant
// part exactly) and per-face staircase bracketings at L2 size epsilon. Every
// member has size at most 5 epsilon.
class ComposedBracketing {
 public:
  ComposedBracketing(int d, double epsilon);

  struct Located {
    Bracket bracket;
    std::vector<double> cover_point;  // rounded weights, 2 per subset
    double width_norm = 0.0;
  };

  Located locate(const MixtureRepresentation& rep) const;
  double log_count() const;
  double epsilon() const { return eps_; }
  double cover_spacing() const { return spacing_; }
  const CdfStaircaseBracketing& face_set(SubsetMask s) const {
    return faces_[s - 1];
  }

 private:
  int d_;
  double eps_;
  double spacing_;
  std::vector<CdfStaircaseBracketing> faces_;  // per nonempty subset mask
};

// ---------------------------------------------------------------------------
// Bracket preservation under unimodal Lipschitz transforms

// Image of a bracket under a pointwise loss: for each response y the slice
//   lower(x) = F(u_y, y)            if l(x) <= u_y <= u(x)
//              min(F(l), F(u))      otherwise
//   upper(x) = max(F(l), F(u))
// brackets x -> F(theta(x), y) for every theta in [l, u], with slice size at
// most lipschitz * size of the (clipped) input bracket.
class TransformedBracket {
 public:
  TransformedBracket(Bracket input, LossSpec loss, double clip_lo,
                     double clip_hi);

  Bracket slice(double y) const;
  double max_slice_size(std::span<const double> ys) const;
  const GridFunction& clipped_lower() const { return lo_; }
  const GridFunction& clipped_upper() const { return hi_; }
  double clipped_input_size() const { return in_size_; }
  const LossSpec& loss() const { return loss_; }

 private:
  GridFunction lo_;
  GridFunction hi_;
  double in_size_;
  NormTag norm_;
  LossSpec loss_;
};

TransformedBracket transform_bracket(const Bracket& b, const LossSpec& loss,
                                     double clip_lo, double clip_hi);

// ---------------------------------------------------------------------------
// Entropy integral

struct EntropyIntegral {
  double integral = 0.0;
  double ratio = 0.0;  // integral / (delta^{1/2} log(1/delta)^{d-1})
};

// Adaptive quadrature of int_0^delta eps^{-1/2} (log(1/eps))^{d-1} d eps,
// compared against its delta^{1/2} (log(1/delta))^{d-1} envelope.
EntropyIntegral entropy_integral_check(double delta, int d);

}  // namespace svreg
