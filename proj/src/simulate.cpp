#include "svreg/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "svreg/errors.hpp"
#include "svreg/io.hpp"
#include "svreg/parallel.hpp"

namespace svreg {

namespace {

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) {
  if (t > 0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

// Regularized incomplete beta for integer parameters a, b >= 1.
double beta_cdf_int(double x, int a, int b) {
  const int n = a + b - 1;
  double s = 0.0;
  for (int j = a; j <= n; ++j) {
    double logc = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                  std::lgamma(n - j + 1.0);
    s += std::exp(logc + j * std::log(std::max(x, 1e-300)) +
                  (n - j) * std::log(std::max(1.0 - x, 1e-300)));
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return std::min(std::max(s, 0.0), 1.0);
}

}  // namespace

MixtureRepresentation truth_mixture(const TruthSpec& spec) {
  MixtureRepresentation rep;
  rep.dim = spec.dim;
  rep.f0 = spec.f0;
  rep.M = spec.M;
  rep.components.resize((std::size_t{1} << spec.dim) - 1);
  // Placeholder CDFs (point mass at each face origin) for unused slots.
  for (SubsetMask s = 1; s < (SubsetMask{1} << spec.dim); ++s) {
    const int k = popcount_mask(s);
    std::vector<std::vector<double>> grid(k, std::vector<double>{0.0});
    for (int part = 0; part < 2; ++part) {
      rep.components[s - 1][part].alpha = 0.0;
      rep.components[s - 1][part].cdf =
          GridFunction(grid, std::vector<double>(1, 1.0));
    }
  }
  for (const auto& c : spec.components) {
    const int k = popcount_mask(c.subset);
    if (c.subset == 0 || c.subset >= (SubsetMask{1} << spec.dim))
      throw DomainError("truth component: bad subset mask");
    MixtureComponent& slot = rep.components[c.subset - 1][c.part];
    slot.alpha += c.alpha;
    if (c.kind == "point") {
      if (static_cast<int>(c.point.size()) != k)
        throw DomainError("truth component: point arity mismatch");
      std::vector<std::vector<double>> grid(k);
      for (int j = 0; j < k; ++j) {
        grid[j] = {0.0};
        if (c.point[j] > 0.0) grid[j].push_back(c.point[j]);
      }
      std::vector<std::size_t> shape(k);
      std::size_t total = 1;
      for (int j = 0; j < k; ++j) {
        shape[j] = grid[j].size();
        total *= shape[j];
      }
      std::vector<double> vals;
      vals.reserve(total);
      for_each_index(shape, [&](std::span<const std::size_t> idx) {
        bool in = true;
        for (int j = 0; j < k; ++j)
          if (grid[j].size() == 2 && idx[j] == 0) in = false;
        vals.push_back(in ? 1.0 : 0.0);
      });
      slot.cdf = GridFunction(std::move(grid), std::move(vals));
    } else if (c.kind == "product-uniform" || c.kind == "product-beta") {
      const int g = std::max(c.grid_cells, 1);
      std::vector<double> axis;
      for (int i = 0; i <= g; ++i) axis.push_back(static_cast<double>(i) / g);
      std::vector<std::vector<double>> grid(k, axis);
      std::vector<double> marg(axis.size());
      for (std::size_t i = 0; i < axis.size(); ++i) {
        marg[i] = c.kind == "product-uniform"
                      ? axis[i]
                      : beta_cdf_int(axis[i], static_cast<int>(c.beta_a),
                                     static_cast<int>(c.beta_b));
      }
      std::vector<std::size_t> shape(k, axis.size());
      std::vector<double> vals;
      for_each_index(shape, [&](std::span<const std::size_t> idx) {
        double v = 1.0;
        for (int j = 0; j < k; ++j) v *= marg[idx[j]];
        vals.push_back(v);
      });
      slot.cdf = GridFunction(std::move(grid), std::move(vals));
    } else {
      throw DomainError("truth component kind must be point|product-uniform|product-beta");
    }
  }
  rep.validate();
  return rep;
}

GridFunction gen_truth(const TruthSpec& spec, double* svn_out) {
  GridFunction theta0 = synthesize(truth_mixture(spec));
  if (svn_out) *svn_out = svn_exact(theta0);
  return theta0;
}

TruthSpec truth_preset(const std::string& name) {
  TruthSpec t;
  if (name == "constant") {
    t.dim = 1;
    t.M = 0.5;
    t.f0 = 0.5;
  } else if (name == "step1d") {
    // 0.25 + 1.0 * 1{x >= 0.3} - 0.5 * 1{x >= 0.7}; variation norm 1.75
    t.dim = 1;
    t.M = 1.75;
    t.f0 = 0.25;
    t.components = {
        {1, 0, 1.0 / 1.5, "point", {0.3}, 2, 2, 16},
        {1, 1, 0.5 / 1.5, "point", {0.7}, 2, 2, 16},
    };
  } else if (name == "steps2d") {
    // 0.2 + 0.8 1{x >= (.4,.4)} + 0.4 1{x1 >= .6} - 0.3 1{x2 >= .7}
    t.dim = 2;
    t.M = 1.7;
    t.f0 = 0.2;
    t.components = {
        {3, 0, 0.8 / 1.5, "point", {0.4, 0.4}, 2, 2, 16},
        {1, 0, 0.4 / 1.5, "point", {0.6}, 2, 2, 16},
        {2, 1, 0.3 / 1.5, "point", {0.7}, 2, 2, 16},
    };
  } else if (name == "mixed3") {
    t.dim = 2;
    t.M = 2.0;
    t.f0 = 0.1;
    t.components = {
        {3, 0, 0.35, "product-beta", {}, 2, 2, 16},
        {1, 0, 0.30, "product-uniform", {}, 2, 2, 16},
        {2, 1, 0.20, "point", {0.5}, 2, 2, 16},
    };
  } else if (name == "smooth1d") {
    t.dim = 1;
    t.M = 1.5;
    t.f0 = 0.25;
    t.components = {
        {1, 0, 0.6, "product-beta", {}, 2, 2, 32},
        {1, 1, 0.25, "point", {0.8}, 2, 2, 16},
    };
  } else {
    throw UnknownFamily("unknown truth preset: " + name);
  }
  return t;
}

void Design::sample_point(Rng& rng, std::span<double> out) const {
  for (int j = 0; j < dim; ++j) {
    if (kind == DesignKind::Uniform) {
      out[j] = rng.uniform();
    } else {
      auto [a, b] = beta_ab.empty() ? std::make_pair(2.0, 2.0)
                                    : beta_ab[j % beta_ab.size()];
      out[j] = rng.beta(a, b);
    }
  }
}

double ResponseSpec::noise_variance() const {
  switch (loss) {
    case LossFamily::SquareBounded:
      return bounded_half * bounded_half / 3.0;
    case LossFamily::SquareSubexp:
      if (!noise) throw DomainError("square-subexp response needs a noise model");
      return noise->variance();
    case LossFamily::Logistic:
      return 0.0;
  }
  return 0.0;
}

namespace {

double response_draw(double t0, const ResponseSpec& resp, Rng& rng) {
  switch (resp.loss) {
    case LossFamily::SquareBounded: {
      double y = t0 + rng.uniform(-resp.bounded_half, resp.bounded_half);
      return std::clamp(y, -resp.a_tilde, resp.a_tilde);
    }
    case LossFamily::SquareSubexp:
      if (!resp.noise) throw DomainError("square-subexp response needs a noise model");
      return t0 + resp.noise->sample(rng);
    case LossFamily::Logistic:
      return rng.uniform() < sigmoid(t0) ? 1.0 : 0.0;
  }
  return t0;
}

void require_no_clipping(const GridFunction& theta0, const ResponseSpec& resp) {
  if (resp.loss == LossFamily::SquareBounded &&
      sup_norm(theta0) + resp.bounded_half > resp.a_tilde + 1e-12)
    throw DomainError(
        "exact quadrature for the bounded square loss requires "
        "sup|theta0| + bounded_half <= a_tilde (no clipping)");
}

double cell_risk(double theta_v, double theta0_v, const ResponseSpec& resp) {
  switch (resp.loss) {
    case LossFamily::SquareBounded:
    case LossFamily::SquareSubexp: {
      double dfc = theta_v - theta0_v;
      return dfc * dfc;  // noise variance added by the caller
    }
    case LossFamily::Logistic: {
      double eta = sigmoid(theta0_v);
      return eta * softplus(-theta_v) + (1.0 - eta) * softplus(theta_v);
    }
  }
  return 0.0;
}

}  // namespace

DataSet gen_dataset(const GridFunction& theta0, std::size_t n,
                    const Design& design, const ResponseSpec& response,
                    Rng& rng) {
  if (n < 1) throw EmptyData("gen_dataset: n must be >= 1");
  DataSet data;
  data.dim = theta0.dim();
  data.n = n;
  data.x.resize(n * data.dim);
  data.y.resize(n);
  std::vector<double> pt(data.dim);
  for (std::size_t i = 0; i < n; ++i) {
    design.sample_point(rng, pt);
    for (int j = 0; j < data.dim; ++j) data.x[i * data.dim + j] = pt[j];
    data.y[i] = response_draw(theta0(pt), response, rng);
  }
  return data;
}

RiskValue risk_oracle(const GridFunction& theta, const GridFunction& theta0,
                      const Design& design, const ResponseSpec& response,
                      const RiskSettings& settings, Rng rng) {
  const bool exact =
      settings.exact_quadrature && design.kind == DesignKind::Uniform;
  if (exact) {
    require_no_clipping(theta0, response);
    const GridFunction* fns[2] = {&theta, &theta0};
    double v = integrate_cells(std::span<const GridFunction* const>(fns, 2),
                               [&](std::span<const double> a) {
                                 return cell_risk(a[0], a[1], response);
                               });
    if (response.loss != LossFamily::Logistic) v += response.noise_variance();
    return {v, 1e-12 * (1.0 + std::abs(v))};
  }
  LossSpec loss = make_loss(response.loss, response.a_tilde);
  double s = 0.0, s2 = 0.0;
  std::vector<double> pt(theta0.dim());
  for (std::size_t i = 0; i < settings.n_mc; ++i) {
    design.sample_point(rng, pt);
    double y = response_draw(theta0(pt), response, rng);
    double v = loss.value(theta(pt), y);
    s += v;
    s2 += v * v;
  }
  double mean = s / static_cast<double>(settings.n_mc);
  double var = std::max(0.0, s2 / static_cast<double>(settings.n_mc) - mean * mean);
  return {mean, std::sqrt(var / static_cast<double>(settings.n_mc))};
}

RiskValue fit_risk_exact(const FittedFunction& fit, const GridFunction& theta0,
                         const ResponseSpec& response) {
  require_no_clipping(theta0, response);
  double v = integrate_fit_vs_grid(fit, theta0, [&](double fv, double rv) {
    return cell_risk(fv, rv, response);
  });
  if (response.loss != LossFamily::Logistic) v += response.noise_variance();
  return {v, 1e-12 * (1.0 + std::abs(v))};
}

RiskValue truth_risk_exact(const GridFunction& theta0,
                           const ResponseSpec& response) {
  require_no_clipping(theta0, response);
  if (response.loss != LossFamily::Logistic)
    return {response.noise_variance(), 0.0};
  const GridFunction* fns[1] = {&theta0};
  double v = integrate_cells(std::span<const GridFunction* const>(fns, 1),
                             [&](std::span<const double> a) {
                               return cell_risk(a[0], a[0], response);
                             });
  return {v, 1e-12 * (1.0 + std::abs(v))};
}

// ---------------------------------------------------------------------------
// Rate experiments

void ExperimentConfig::validate_against(const GridFunction& theta0) const {
  if (n_grid.empty()) throw DomainError("experiment: empty n grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw DomainError("experiment: n grid must be strictly increasing");
  if (replicates < 3) throw DomainError("experiment: replicates must be >= 3");
  const double a_min = sieve_radius(schedule, n_grid.front());
  if (svn_exact(theta0) > a_min + 1e-9)
    throw DomainError(
        "experiment: the truth must satisfy svn(theta0) <= a_n at the "
        "smallest n (so the sieve minimizer is the truth)");
  if (risk.exact_quadrature && design.kind != DesignKind::Uniform)
    throw DomainError("experiment: exact risk quadrature needs a uniform design");
}

std::map<std::string, std::string> ExperimentConfig::canonical_kv() const {
  std::map<std::string, std::string> kv;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  kv["name"] = name;
  kv["loss"] = loss_family_name(loss);
  kv["design"] = design.kind == DesignKind::Uniform ? "uniform" : "product-beta";
  kv["schedule"] = schedule.kind == SieveSchedule::Kind::Constant ? "constant" : "power";
  kv["schedule.A"] = num(schedule.A);
  kv["schedule.p"] = num(schedule.p);
  kv["replicates"] = std::to_string(replicates);
  kv["seed"] = std::to_string(seed);
  kv["a_tilde"] = num(response.a_tilde);
  kv["bounded_half"] = num(response.bounded_half);
  if (response.noise) {
    kv["noise"] = noise_family_name(response.noise->family);
    kv["noise_scale"] = num(response.noise->scale);
  }
  {
    std::string ns;
    for (auto n : n_grid) {
      if (!ns.empty()) ns += ",";
      ns += std::to_string(n);
    }
    kv["n_grid"] = ns;
  }
  kv["truth.dim"] = std::to_string(truth.dim);
  kv["truth.M"] = num(truth.M);
  kv["truth.f0"] = num(truth.f0);
  for (std::size_t i = 0; i < truth.components.size(); ++i) {
    const auto& c = truth.components[i];
    std::ostringstream ss;
    ss << "subset:" << c.subset << ";part:" << c.part << ";alpha:" << num(c.alpha)
       << ";kind:" << c.kind;
    if (!c.point.empty()) {
      ss << ";point:";
      for (std::size_t j = 0; j < c.point.size(); ++j)
        ss << (j ? "|" : "") << num(c.point[j]);
    }
    if (c.kind == "product-beta")
      ss << ";a:" << num(c.beta_a) << ";b:" << num(c.beta_b);
    kv["truth.c" + std::to_string(i)] = ss.str();
  }
  kv["solver.max_iters"] = std::to_string(solve.max_iters);
  kv["solver.grad_tol"] = num(solve.grad_tol);
  kv["solver.objective_tol"] = num(solve.objective_tol);
  kv["risk"] = risk.exact_quadrature ? "exact" : "mc";
  kv["risk.n_mc"] = std::to_string(risk.n_mc);
  return kv;
}

ExperimentConfig experiment_from_config(
    const std::map<std::string, std::string>& kv) {
  ExperimentConfig cfg;
  auto get = [&](const std::string& k, const std::string& dflt) {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  };
  cfg.name = get("name", "experiment");
  cfg.truth = truth_preset(get("truth", "step1d"));
  cfg.design.dim = cfg.truth.dim;
  std::string design = get("design", "uniform");
  if (design == "uniform") {
    cfg.design.kind = DesignKind::Uniform;
  } else if (design == "product-beta") {
    cfg.design.kind = DesignKind::ProductBeta;
    cfg.design.beta_ab.assign(cfg.truth.dim, {2.0, 2.0});
  } else {
    throw UsageError("design must be uniform|product-beta");
  }
  cfg.loss = loss_family_from_name(get("loss", "square"));
  cfg.response.loss = cfg.loss;
  cfg.response.a_tilde = std::stod(get("a_tilde", "2.0"));
  cfg.response.bounded_half = std::stod(get("bounded_half", "0.5"));
  if (cfg.loss == LossFamily::SquareSubexp) {
    cfg.response.noise =
        make_noise(noise_family_from_name(get("noise", "laplace")),
                   std::stod(get("noise_scale", "0.5")));
  }
  std::string sched = get("schedule", "constant");
  cfg.schedule.kind = sched == "power" ? SieveSchedule::Kind::Power
                                       : SieveSchedule::Kind::Constant;
  cfg.schedule.A = std::stod(get("A", "2.0"));
  cfg.schedule.p = std::stod(get("p", "0.0"));
  {
    std::stringstream ss(get("n_grid", "128,256,512,1024,2048,4096,8192"));
    std::string tok;
    while (std::getline(ss, tok, ','))
      cfg.n_grid.push_back(static_cast<std::size_t>(std::stoull(tok)));
  }
  cfg.replicates = std::stoull(get("replicates", "20"));
  cfg.seed = std::stoull(get("seed", "1"));
  cfg.solve.max_iters = std::stoull(get("solver.max_iters", "3000"));
  cfg.solve.grad_tol = std::stod(get("solver.grad_tol", "2e-5"));
  cfg.solve.objective_tol = std::stod(get("solver.objective_tol", "1e-11"));
  cfg.risk.exact_quadrature = get("risk", "exact") == "exact";
  cfg.risk.n_mc = std::stoull(get("risk.n_mc", "200000"));
  cfg.threads = static_cast<unsigned>(std::stoul(get("threads", "0")));
  return cfg;
}

double median(std::vector<double> v) {
  if (v.empty()) throw EmptyData("median of empty set");
  std::sort(v.begin(), v.end());
  std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

SlopeFit least_squares_slope(std::span<const double> x,
                             std::span<const double> y) {
  const std::size_t k = x.size();
  if (k < 2) throw DomainError("least_squares_slope: need at least 2 points");
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= k;
  ym /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  if (k > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.std_error = std::sqrt(rss / (k - 2) / sxx);
  }
  return fit;
}

RateReport run_rate_experiment(const ExperimentConfig& config,
                               const std::string& resume_csv) {
  const auto t_start = std::chrono::steady_clock::now();
  double truth_svn = 0.0;
  GridFunction theta0 = gen_truth(config.truth, &truth_svn);
  config.validate_against(theta0);
  const std::string hash = config_hash(config.canonical_kv());

  const std::size_t R = config.replicates;
  const std::size_t tasks = config.n_grid.size() * R;
  std::vector<RateRow> rows(tasks);
  std::vector<char> done(tasks, 0);

  // Resume: reuse completed rows persisted by an earlier run of the same
  // config and seed.
  std::ofstream persist;
  std::mutex persist_mutex;
  if (!resume_csv.empty()) {
    const std::string header =
        "# svreg-rate config=" + hash + " seed=" + std::to_string(config.seed);
    bool reuse = false;
    if (std::filesystem::exists(resume_csv)) {
      std::ifstream in(resume_csv);
      std::string line;
      if (std::getline(in, line) && line == header) {
        reuse = true;
        std::getline(in, line);  // column header
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          std::stringstream ss(line);
          std::string tok;
          std::vector<std::string> cols;
          while (std::getline(ss, tok, ',')) cols.push_back(tok);
          if (cols.size() != 4) continue;
          std::size_t n = std::stoull(cols[0]);
          std::size_t rep = std::stoull(cols[1]);
          auto it = std::find(config.n_grid.begin(), config.n_grid.end(), n);
          if (it == config.n_grid.end() || rep >= R) continue;
          std::size_t ti = (it - config.n_grid.begin()) * R + rep;
          rows[ti] = {n, rep, std::stod(cols[2]), std::stod(cols[3])};
          done[ti] = 1;
        }
      }
    }
    persist.open(resume_csv, reuse ? std::ios::app : std::ios::trunc);
    if (!persist) throw UsageError("cannot open resume csv: " + resume_csv);
    if (!reuse) {
      persist << header << "\n" << "n,replicate,d,runtime_sec\n";
      persist.flush();
    }
  }

  const unsigned threads =
      config.threads == 0 ? default_threads() : config.threads;
  run_parallel(tasks, threads, [&](std::size_t ti) {
    if (done[ti]) return;
    const std::size_t ni = ti / R;
    const std::size_t rep = ti % R;
    const std::size_t n = config.n_grid[ni];
    const auto t0c = std::chrono::steady_clock::now();
    Rng rng(Rng::mix(Rng::mix(config.seed, n), rep));
    DataSet data = gen_dataset(theta0, n, config.design, config.response, rng);
    const double radius = sieve_radius(config.schedule, n);
    LossSpec loss = make_loss(config.loss, config.response.a_tilde);
    SolveReport solve = fit_erm(data, loss, radius, config.solve);
    RiskValue rt, rr;
    if (config.risk.exact_quadrature &&
        config.design.kind == DesignKind::Uniform) {
      rt = fit_risk_exact(solve.fit, theta0, config.response);
      rr = truth_risk_exact(theta0, config.response);
    } else {
      GridFunction rendered = render(solve.fit);
      Rng risk_rng = rng.sub(777);
      rt = risk_oracle(rendered, theta0, config.design, config.response,
                       config.risk, risk_rng.sub(1));
      rr = risk_oracle(theta0, theta0, config.design, config.response,
                       config.risk, risk_rng.sub(2));
    }
    DissimilarityEstimate est = dissimilarity_from_risks(rt, rr);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0c)
            .count();
    rows[ti] = {n, rep, est.value, secs};
    done[ti] = 1;
    if (persist.is_open()) {
      std::lock_guard<std::mutex> lk(persist_mutex);
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.6f\n", n, rep,
                    est.value, secs);
      persist << buf;
      persist.flush();
    }
  });

  RateReport report;
  report.name = config.name;
  report.config_hash = hash;
  report.seed = config.seed;
  report.dim = config.truth.dim;
  report.truth_svn = truth_svn;
  report.n_grid = config.n_grid;
  report.rows = rows;
  report.log_correction_exponent = 2.0 * (config.truth.dim - 1) / 3.0;

  std::vector<double> logn, ycorr, yraw;
  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    std::vector<double> ds;
    for (std::size_t rep = 0; rep < R; ++rep)
      ds.push_back(rows[ni * R + rep].d_value);
    double med = median(ds);
    report.median_d.push_back(med);
    const double n = static_cast<double>(config.n_grid[ni]);
    const double a_n = sieve_radius(config.schedule, config.n_grid[ni]);
    const double lm = std::log(std::max(med, 1e-15));
    logn.push_back(std::log(n));
    yraw.push_back(lm);
    ycorr.push_back(lm - report.log_correction_exponent * std::log(std::log(n)) -
                    std::log(a_n));
  }
  SlopeFit corr = least_squares_slope(logn, ycorr);
  SlopeFit raw = least_squares_slope(logn, yraw);
  report.corrected_slope = corr.slope;
  report.raw_slope = raw.slope;
  report.slope_std_error = corr.std_error;
  report.total_runtime_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

}  // namespace svreg
