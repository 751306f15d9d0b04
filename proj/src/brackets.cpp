#include "svreg/brackets.hpp"

#include <algorithm>
#include <cmath>

#include "svreg/errors.hpp"

namespace svreg {

namespace {

double lchoose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

ContainmentReport check_containment(const GridFunction& f, const Bracket& b,
                                    double tol) {
  const GridFunction* fns[3] = {&b.lower, &f, &b.upper};
  double worst = -1e300;
  scan_union_grid(std::span<const GridFunction* const>(fns, 3),
                  [&](std::span<const double> v) {
                    worst = std::max(worst, v[0] - v[1]);
                    worst = std::max(worst, v[1] - v[2]);
                  });
  ContainmentReport rep;
  rep.max_violation = std::max(worst, 0.0);
  rep.contained = worst <= tol;
  return rep;
}

double bracket_width_norm(const Bracket& b, int r) {
  const GridFunction* fns[2] = {&b.lower, &b.upper};
  double s = integrate_cells(std::span<const GridFunction* const>(fns, 2),
                             [r](std::span<const double> v) {
                               return std::pow(std::abs(v[1] - v[0]), r);
                             });
  return std::pow(s, 1.0 / r);
}

// ---------------------------------------------------------------------------
// Simplex covers

SimplexCover simplex_cover(double epsilon, std::size_t K) {
  if (epsilon <= 0.0) throw InvalidEpsilon("simplex_cover: epsilon must be > 0");
  if (K < 1) throw DomainError("simplex_cover: K must be >= 1");
  SimplexCover cover;
  cover.epsilon = epsilon;
  cover.K = K;
  if (epsilon >= 1.0) {
    cover.points.push_back(std::vector<double>(K, 0.0));
    return cover;
  }
  const int S = static_cast<int>(std::floor(1.0 / epsilon + 1e-12));
  if (lchoose(S + static_cast<double>(K), static_cast<double>(K)) >
      std::log(5e7))
    throw TooLarge("simplex_cover: materialized cover would be too large");
  std::vector<int> idx(K, 0);
  std::vector<double> point(K);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos == K) {
      for (std::size_t j = 0; j < K; ++j) point[j] = idx[j] * epsilon;
      cover.points.push_back(point);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      idx[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, S);
  return cover;
}

double log_simplex_grid_count(double spacing, std::size_t K) {
  if (spacing >= 1.0) return 0.0;
  const double S = std::floor(1.0 / spacing + 1e-12);
  return lchoose(S + static_cast<double>(K), static_cast<double>(K));
}

std::vector<double> simplex_grid_round(std::span<const double> w,
                                       double spacing) {
  std::vector<double> out(w.size());
  if (spacing >= 1.0) return out;  // single zero point
  for (std::size_t j = 0; j < w.size(); ++j)
    out[j] = std::floor(w[j] / spacing) * spacing;
  return out;
}

// ---------------------------------------------------------------------------
// CDF staircase bracketing

CdfStaircaseBracketing::CdfStaircaseBracketing(int face_dim, int positions,
                                               int levels, NormTag norm)
    : k_(face_dim), m_(positions), levels_(levels), norm_(norm) {
  if (k_ < 1 || m_ < 1 || levels_ < 1)
    throw DomainError("CdfStaircaseBracketing: bad parameters");
}

CdfStaircaseBracketing CdfStaircaseBracketing::with_l1_size(int k, double eps) {
  if (eps <= 0.0) throw InvalidEpsilon("cdf bracketing: epsilon must be > 0");
  int m, mp;
  if (k == 1) {
    m = mp = static_cast<int>(std::ceil(2.0 / eps));
  } else {
    mp = static_cast<int>(std::ceil(4.0 / eps));
    m = static_cast<int>(std::ceil(4.0 * k / eps));
  }
  CdfStaircaseBracketing b(k, m, mp, NormTag{1, true});
  b.eps_ = eps;
  return b;
}

CdfStaircaseBracketing CdfStaircaseBracketing::with_l2_size(int k, double eps) {
  if (eps <= 0.0) throw InvalidEpsilon("cdf bracketing: epsilon must be > 0");
  CdfStaircaseBracketing b = with_l1_size(k, eps * eps);
  b.norm_ = NormTag{2, true};
  b.eps_ = eps;
  return b;
}

Bracket CdfStaircaseBracketing::locate(const GridFunction& cdf) const {
  if (cdf.dim() != k_)
    throw DomainError("cdf bracketing: face dimension mismatch");
  const int k = k_;
  const std::size_t mq = static_cast<std::size_t>(m_) + 1;
  // Per-axis map: quantized position index -> cdf cell index.
  std::vector<std::vector<std::size_t>> maps(k);
  for (int j = 0; j < k; ++j) {
    maps[j].reserve(mq);
    for (std::size_t i = 0; i < mq; ++i)
      maps[j].push_back(cdf.locate(j, static_cast<double>(i) / m_));
  }
  std::vector<std::size_t> qshape(k, mq), qstrides(k, 1);
  for (int j = k - 2; j >= 0; --j) qstrides[j] = qstrides[j + 1] * mq;
  std::size_t qtotal = 1;
  for (int j = 0; j < k; ++j) qtotal *= mq;
  std::vector<double> Q(qtotal);
  {
    std::vector<std::size_t> src(k);
    std::size_t flat = 0;
    for_each_index(qshape, [&](std::span<const std::size_t> idx) {
      for (int j = 0; j < k; ++j) src[j] = maps[j][idx[j]];
      double g = std::clamp(cdf.value_at(src), 0.0, 1.0);
      Q[flat++] = std::floor(g * levels_) / levels_;
    });
  }
  // Lower/upper on m_ cells per axis.
  std::vector<std::vector<double>> grid(k);
  for (int j = 0; j < k; ++j) {
    grid[j].reserve(m_);
    for (int i = 0; i < m_; ++i) grid[j].push_back(static_cast<double>(i) / m_);
  }
  std::vector<std::size_t> shape(k, static_cast<std::size_t>(m_));
  std::size_t total = 1;
  for (int j = 0; j < k; ++j) total *= static_cast<std::size_t>(m_);
  std::vector<double> lov(total), hiv(total);
  const double lift = 1.0 / levels_;
  double l1 = 0.0, l2 = 0.0;
  const double cell_vol = std::pow(1.0 / m_, k);
  {
    std::size_t flat = 0;
    for_each_index(shape, [&](std::span<const std::size_t> idx) {
      std::size_t qlo = 0, qhi = 0;
      for (int j = 0; j < k; ++j) {
        qlo += idx[j] * qstrides[j];
        qhi += (idx[j] + 1) * qstrides[j];
      }
      const double lo = Q[qlo];
      const double hi = std::min(Q[qhi] + lift, 1.0);
      lov[flat] = lo;
      hiv[flat] = hi;
      const double w = hi - lo;
      l1 += w;
      l2 += w * w;
      ++flat;
    });
  }
  Bracket b;
  b.lower = GridFunction(grid, std::move(lov));
  b.upper = GridFunction(grid, std::move(hiv));
  b.norm = norm_;
  b.size = norm_.r == 1 ? l1 * cell_vol : std::sqrt(l2 * cell_vol);
  return b;
}

double CdfStaircaseBracketing::log_count() const {
  const double per_row =
      lchoose(m_ + levels_ + 1.0, m_ + 1.0);  // monotone sequences
  if (k_ == 1) return per_row;
  // Row-wise product; ignores cross-row monotonicity, hence an upper bound.
  double rows = 1.0;
  for (int j = 0; j < k_ - 1; ++j) rows *= (m_ + 1.0);
  return rows * per_row;
}

std::vector<Bracket> CdfStaircaseBracketing::enumerate(
    std::size_t budget) const {
  if (k_ != 1)
    throw TooLarge("cdf bracketing: enumeration supported for 1-d faces only");
  if (log_count() > std::log(static_cast<double>(budget)))
    throw TooLarge("cdf bracketing: family too large to enumerate");
  std::vector<double> grid;
  for (int i = 0; i < m_; ++i) grid.push_back(static_cast<double>(i) / m_);
  const double lift = 1.0 / levels_;
  std::vector<Bracket> out;
  std::vector<int> q(m_ + 1, 0);
  std::function<void(int, int)> rec = [&](int pos, int lo) {
    if (pos == m_ + 1) {
      std::vector<double> lov(m_), hiv(m_);
      double l1 = 0.0, l2 = 0.0;
      for (int i = 0; i < m_; ++i) {
        lov[i] = static_cast<double>(q[i]) / levels_;
        hiv[i] = std::min(static_cast<double>(q[i + 1]) / levels_ + lift, 1.0);
        double w = hiv[i] - lov[i];
        l1 += w;
        l2 += w * w;
      }
      Bracket b;
      b.lower = GridFunction({grid}, std::move(lov));
      b.upper = GridFunction({grid}, std::move(hiv));
      b.norm = norm_;
      b.size = norm_.r == 1 ? l1 / m_ : std::sqrt(l2 / m_);
      out.push_back(std::move(b));
      return;
    }
    for (int v = lo; v <= levels_; ++v) {
      q[pos] = v;
      rec(pos + 1, v);
    }
  };
  rec(0, 0);
  return out;
}

CdfStaircaseBracketing cdf_bracketing_1d(double epsilon) {
  if (epsilon <= 0.0 || epsilon > 1.0)
    throw InvalidEpsilon("cdf_brackets: epsilon must be in (0,1]");
  return CdfStaircaseBracketing::with_l1_size(1, epsilon);
}

BracketSet cdf_brackets_construct_1d(double epsilon, std::size_t budget) {
  if (epsilon <= 0.0)
    throw InvalidEpsilon("cdf_brackets: epsilon must be in (0,1]");
  BracketSet set;
  set.epsilon = epsilon;
  set.class_tag = "cdf-1d";
  if (epsilon >= 1.0) {
    Bracket b;
    b.lower = GridFunction::constant(1, 0.0);
    b.upper = GridFunction::constant(1, 1.0);
    b.norm = NormTag{1, true};
    b.size = 1.0;
    set.brackets.push_back(std::move(b));
    return set;
  }
  set.brackets = cdf_bracketing_1d(epsilon).enumerate(budget);
  return set;
}

BruteforceBracketing cdf_brackets_bruteforce_tiny(double epsilon, int cells,
                                                  int levels) {
  if (cells < 1 || levels < 1)
    throw DomainError("bruteforce bracketing: bad grid");
  if (cells * levels > 20)
    throw TooLarge("bruteforce bracketing: cells * levels must be <= 20");
  if (epsilon <= 0.0 || epsilon > 1.0)
    throw InvalidEpsilon("bruteforce bracketing: epsilon must be in (0,1]");

  // Universe: quantized CDFs (nondecreasing level sequences reaching 1).
  std::vector<std::vector<int>> universe;
  {
    std::vector<int> v(cells, 0);
    std::function<void(int, int)> rec = [&](int pos, int lo) {
      if (pos == cells) {
        if (v[cells - 1] == levels) universe.push_back(v);
        return;
      }
      for (int x = lo; x <= levels; ++x) {
        v[pos] = x;
        rec(pos + 1, x);
      }
    };
    rec(0, 0);
  }
  // Candidates: monotone staircase pairs within the size budget.
  std::vector<std::vector<int>> stairs;
  {
    std::vector<int> v(cells, 0);
    std::function<void(int, int)> rec = [&](int pos, int lo) {
      if (pos == cells) {
        stairs.push_back(v);
        return;
      }
      for (int x = lo; x <= levels; ++x) {
        v[pos] = x;
        rec(pos + 1, x);
      }
    };
    rec(0, 0);
  }
  struct Cand {
    const std::vector<int>* lo;
    const std::vector<int>* hi;
    double size;
  };
  std::vector<Cand> cands;
  for (const auto& lo : stairs) {
    for (const auto& hi : stairs) {
      bool ok = true;
      double s2 = 0.0;
      for (int i = 0; i < cells; ++i) {
        if (lo[i] > hi[i]) {
          ok = false;
          break;
        }
        double w = static_cast<double>(hi[i] - lo[i]) / levels;
        s2 += w * w / cells;
      }
      if (!ok) continue;
      double size = std::sqrt(s2);
      if (size <= epsilon) cands.push_back({&lo, &hi, size});
    }
  }
  // Greedy cover.
  std::vector<char> covered(universe.size(), 0);
  std::size_t remaining = universe.size();
  BruteforceBracketing out;
  out.universe_size = universe.size();
  out.set.epsilon = epsilon;
  out.set.class_tag = "cdf-1d-bruteforce";
  std::vector<double> grid(cells);
  for (int i = 0; i < cells; ++i) grid[i] = static_cast<double>(i) / cells;
  auto inside = [&](const std::vector<int>& c, const Cand& cd) {
    for (int i = 0; i < cells; ++i)
      if (c[i] < (*cd.lo)[i] || c[i] > (*cd.hi)[i]) return false;
    return true;
  };
  while (remaining > 0) {
    std::size_t best = 0, best_gain = 0;
    for (std::size_t ci = 0; ci < cands.size(); ++ci) {
      std::size_t gain = 0;
      for (std::size_t ui = 0; ui < universe.size(); ++ui)
        if (!covered[ui] && inside(universe[ui], cands[ci])) ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best = ci;
      }
    }
    if (best_gain == 0)
      throw AuditViolation("bruteforce bracketing: cover stalled (epsilon too small)");
    const Cand& cd = cands[best];
    for (std::size_t ui = 0; ui < universe.size(); ++ui)
      if (!covered[ui] && inside(universe[ui], cd)) {
        covered[ui] = 1;
        --remaining;
      }
    Bracket b;
    std::vector<double> lov(cells), hiv(cells);
    for (int i = 0; i < cells; ++i) {
      lov[i] = static_cast<double>((*cd.lo)[i]) / levels;
      hiv[i] = static_cast<double>((*cd.hi)[i]) / levels;
    }
    b.lower = GridFunction({grid}, std::move(lov));
    b.upper = GridFunction({grid}, std::move(hiv));
    b.norm = NormTag{2, true};
    b.size = cd.size;
    out.set.brackets.push_back(std::move(b));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Composed brackets

ComposedBracketing::ComposedBracketing(int d, double epsilon)
    : d_(d), eps_(epsilon) {
  if (epsilon > 1.0 || epsilon <= 0.0)
    throw InvalidEpsilon(
        "compose_brackets: epsilon must be in (0,1]; larger brackets are never "
        "needed for [0,1]-valued mixtures");
  if (d < 1) throw DomainError("compose_brackets: d must be >= 1");
  spacing_ = epsilon / std::pow(2.0, d + 1);
  faces_.reserve((std::size_t{1} << d) - 1);
  for (SubsetMask s = 1; s < (SubsetMask{1} << d); ++s)
    faces_.push_back(
        CdfStaircaseBracketing::with_l2_size(popcount_mask(s), epsilon));
}

ComposedBracketing::Located ComposedBracketing::locate(
    const MixtureRepresentation& rep) const {
  rep.validate();
  if (rep.dim != d_) throw DomainError("compose_brackets: dimension mismatch");
  if (rep.M > 1.0 + 1e-12)
    throw DomainError("compose_brackets: mixture budget must satisfy M <= 1");
  const std::size_t faces = (std::size_t{1} << d_);  // includes the empty face
  std::vector<double> beta(2 * faces, 0.0);
  beta[0] = std::max(rep.f0, 0.0);
  beta[1] = std::max(-rep.f0, 0.0);
  const double scale = rep.M - std::abs(rep.f0);
  for (SubsetMask s = 1; s < faces; ++s) {
    beta[2 * s] = scale * rep.at(s, 0).alpha;
    beta[2 * s + 1] = scale * rep.at(s, 1).alpha;
  }
  std::vector<double> j0 = simplex_grid_round(beta, spacing_);
  const double h = spacing_;

  // Face brackets designated by each component CDF.
  std::vector<std::array<Bracket, 2>> located(faces - 1,
                                              std::array<Bracket, 2>{});
  for (SubsetMask s = 1; s < faces; ++s)
    for (int i = 0; i < 2; ++i)
      located[s - 1][i] = faces_[s - 1].locate(rep.at(s, i).cdf);

  // lower = sum_s (b1 - h) l_{s,1} - (b2 + h) u_{s,2}   (+ empty-face consts)
  // upper = sum_s (b1 + h) u_{s,1} - (b2 - h) l_{s,2}
  // (staircase lower functions are nonnegative, so |l| = l)
  double const_lower = (j0[0] - h) - (j0[1] + h);
  double const_upper = (j0[0] + h) - (j0[1] - h);
  struct FaceTerm {
    const GridFunction* g;
    double w;
    std::vector<int> axes;
    std::vector<std::vector<std::size_t>> maps;
  };
  std::vector<FaceTerm> lower_terms, upper_terms;
  for (SubsetMask s = 1; s < faces; ++s) {
    std::vector<int> axes;
    for (int j = 0; j < d_; ++j)
      if (s & (SubsetMask{1} << j)) axes.push_back(j);
    const Bracket& b1 = located[s - 1][0];
    const Bracket& b2 = located[s - 1][1];
    lower_terms.push_back({&b1.lower, j0[2 * s] - h, axes, {}});
    lower_terms.push_back({&b2.upper, -(j0[2 * s + 1] + h), axes, {}});
    upper_terms.push_back({&b1.upper, j0[2 * s] + h, axes, {}});
    upper_terms.push_back({&b2.lower, -(j0[2 * s + 1] - h), axes, {}});
  }

  // Ambient union grid over all face breakpoints.
  std::vector<std::vector<double>> grid(d_, std::vector<double>{0.0});
  auto add_axes = [&](const FaceTerm& t) {
    for (std::size_t k = 0; k < t.axes.size(); ++k) {
      const auto& fg = t.g->grid()[k];
      grid[t.axes[k]].insert(grid[t.axes[k]].end(), fg.begin(), fg.end());
    }
  };
  for (const auto& t : lower_terms) add_axes(t);
  for (const auto& t : upper_terms) add_axes(t);
  for (auto& axis : grid) {
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }
  auto build_maps = [&](FaceTerm& t) {
    t.maps.resize(t.axes.size());
    for (std::size_t k = 0; k < t.axes.size(); ++k) {
      t.maps[k].reserve(grid[t.axes[k]].size());
      for (double v : grid[t.axes[k]])
        t.maps[k].push_back(t.g->locate(static_cast<int>(k), v));
    }
  };
  for (auto& t : lower_terms) build_maps(t);
  for (auto& t : upper_terms) build_maps(t);

  std::vector<std::size_t> shape(d_);
  std::size_t total = 1;
  for (int j = 0; j < d_; ++j) {
    shape[j] = grid[j].size();
    total *= shape[j];
  }
  std::vector<std::vector<double>> widths(d_);
  for (int j = 0; j < d_; ++j) {
    widths[j].resize(shape[j]);
    for (std::size_t i = 0; i + 1 < shape[j]; ++i)
      widths[j][i] = grid[j][i + 1] - grid[j][i];
    widths[j][shape[j] - 1] = 1.0 - grid[j].back();
  }
  std::vector<double> lov(total), hiv(total);
  double w2 = 0.0;
  std::vector<std::size_t> src;
  std::size_t flat = 0;
  for_each_index(shape, [&](std::span<const std::size_t> idx) {
    double lo = const_lower, hi = const_upper;
    for (const auto& t : lower_terms) {
      src.resize(t.axes.size());
      for (std::size_t k = 0; k < t.axes.size(); ++k)
        src[k] = t.maps[k][idx[t.axes[k]]];
      lo += t.w * t.g->value_at(src);
    }
    for (const auto& t : upper_terms) {
      src.resize(t.axes.size());
      for (std::size_t k = 0; k < t.axes.size(); ++k)
        src[k] = t.maps[k][idx[t.axes[k]]];
      hi += t.w * t.g->value_at(src);
    }
    lov[flat] = lo;
    hiv[flat] = hi;
    double vol = 1.0;
    for (int j = 0; j < d_; ++j) vol *= widths[j][idx[j]];
    w2 += vol * (hi - lo) * (hi - lo);
    ++flat;
  });

  Located out;
  out.cover_point = std::move(j0);
  out.width_norm = std::sqrt(std::max(w2, 0.0));
  out.bracket.lower = GridFunction(grid, std::move(lov));
  out.bracket.upper = GridFunction(grid, std::move(hiv));
  out.bracket.norm = NormTag{2, true};
  out.bracket.size = out.width_norm;
  return out;
}

double ComposedBracketing::log_count() const {
  const std::size_t K = std::size_t{1} << (d_ + 1);
  double lc = log_simplex_grid_count(spacing_, K);
  for (const auto& f : faces_) lc += 2.0 * f.log_count();
  return lc;
}

// ---------------------------------------------------------------------------
// Bracket preservation

TransformedBracket::TransformedBracket(Bracket input, LossSpec loss,
                                       double clip_lo, double clip_hi)
    : lo_(GridFunction::constant(1, 0.0)),
      hi_(GridFunction::constant(1, 0.0)),
      in_size_(0.0),
      norm_(input.norm),
      loss_(loss) {
  if (!(clip_lo <= clip_hi))
    throw DomainError("transform_bracket: empty clip range");
  const GridFunction* fns[2] = {&input.lower, &input.upper};
  lo_ = combine_on_union_grid(std::span<const GridFunction* const>(fns, 2),
                              [&](std::span<const double> v) {
                                return std::clamp(v[0], clip_lo, clip_hi);
                              });
  hi_ = combine_on_union_grid(std::span<const GridFunction* const>(fns, 2),
                              [&](std::span<const double> v) {
                                return std::clamp(v[1], clip_lo, clip_hi);
                              });
  Bracket clipped;
  clipped.lower = lo_;
  clipped.upper = hi_;
  in_size_ = bracket_width_norm(clipped, norm_.r);
}

Bracket TransformedBracket::slice(double y) const {
  const double ay = loss_.unimodal_point(y);
  const GridFunction* fns[2] = {&lo_, &hi_};
  auto lam = [&](std::span<const double> v) {
    const double fl = loss_.value(v[0], y);
    const double fu = loss_.value(v[1], y);
    if (v[0] <= ay && ay <= v[1]) return loss_.value(ay, y);
    return std::min(fl, fu);
  };
  auto gam = [&](std::span<const double> v) {
    return std::max(loss_.value(v[0], y), loss_.value(v[1], y));
  };
  Bracket out;
  out.lower =
      combine_on_union_grid(std::span<const GridFunction* const>(fns, 2), lam);
  out.upper =
      combine_on_union_grid(std::span<const GridFunction* const>(fns, 2), gam);
  out.norm = norm_;
  out.size = bracket_width_norm(out, norm_.r);
  return out;
}

double TransformedBracket::max_slice_size(std::span<const double> ys) const {
  double m = 0.0;
  for (double y : ys) m = std::max(m, slice(y).size);
  return m;
}

TransformedBracket transform_bracket(const Bracket& b, const LossSpec& loss,
                                     double clip_lo, double clip_hi) {
  return TransformedBracket(b, loss, clip_lo, clip_hi);
}

// ---------------------------------------------------------------------------
// Entropy integral

namespace {

double tail_integral(int k, double A) {
  // int_A^inf v^k e^{-v/2} dv
  if (k == 0) return 2.0 * std::exp(-A / 2.0);
  return 2.0 * std::pow(A, k) * std::exp(-A / 2.0) +
         2.0 * k * tail_integral(k - 1, A);
}

struct Simpson {
  int d;
  int evals = 0;
  double f(double v) const {
    return std::pow(v, d - 1) * std::exp(-v / 2.0);
  }
  double run(double a, double b, double tol) {
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(a, b, fa, fm, fb, whole, tol, 0);
  }
  double rec(double a, double b, double fa, double fm, double fb, double whole,
             double tol, int depth) {
    if (depth > 60)
      throw QuadratureFailure("entropy_integral_check: refinement failed");
    double m = 0.5 * (a + b);
    double fl = f(0.5 * (a + m));
    double fr = f(0.5 * (m + b));
    double left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return rec(a, m, fa, fl, fm, left, tol / 2.0, depth + 1) +
           rec(m, b, fm, fr, fb, right, tol / 2.0, depth + 1);
  }
};

}  // namespace

EntropyIntegral entropy_integral_check(double delta, int d) {
  if (d < 1) throw DomainError("entropy_integral_check: d must be >= 1");
  if (!(delta > 0.0) || delta > std::exp(-1.0))
    throw DomainError("entropy_integral_check: delta must be in (0, 1/e]");
  const double a = std::log(1.0 / delta);
  const double A = a + 120.0;
  // After eps = e^{-v} the integrand is v^{d-1} e^{-v/2} on [a, inf).
  Simpson s{d};
  double rough = std::sqrt(delta) * std::pow(a, d - 1) * 2.0;
  double body = s.run(a, A, 1e-10 * rough);
  double total = body + tail_integral(d - 1, A);
  EntropyIntegral out;
  out.integral = total;
  out.ratio = total / (std::sqrt(delta) * std::pow(a, d - 1));
  return out;
}

}  // namespace svreg
