#include "causal_cart/mc.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <unistd.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "causal_cart/errors.hpp"
#include "causal_cart/ou.hpp"

namespace ccart {

// ------------------------------------------------------------------ tables

ResultTable::ResultTable(std::string name, std::vector<std::string> header)
    : name_(std::move(name)), header_(std::move(header)) {}

void ResultTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size())
    throw StructuralError("row width " + std::to_string(cells.size()) + " does not match " +
                          name_ + " header");
  rows_.push_back(std::move(cells));
}

std::string ResultTable::to_csv() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string ResultTable::meta_text() const {
  std::string out;
  for (const auto& [k, v] : meta_) out += k + "=" + v + "\n";
  return out;
}

std::string ResultTable::write(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  const std::string csv = (std::filesystem::path(dir) / (name_ + ".csv")).string();
  write_file_atomic((std::filesystem::path(dir) / (name_ + ".meta")).string(), meta_text());
  write_file_atomic(csv, to_csv());
  return csv;
}

std::string fmt_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}

std::string fmt_int(long long v) { return std::to_string(v); }

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("short write to '" + tmp + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

int resolve_workers(unsigned workers) {
  if (workers > 0) return static_cast<int>(workers);
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// --------------------------------------------------------------- helpers

FittedTree fit_method(const EstimatorSpec& spec, const DgpConfig& cfg, const Dataset& data,
                      const RngStream& rep_stream) {
  switch (spec.scheme.tag) {
    case SchemeTag::nss:
      return estimate_nss(data, spec);
    case SchemeTag::honest: {
      RngStream s = rep_stream.substream(kLaneHonest);
      return estimate_honest(data, spec, s);
    }
    case SchemeTag::x_adaptive: {
      RngStream s = rep_stream.substream(kLaneXAdaptive + static_cast<std::uint32_t>(spec.K));
      return estimate_x_adaptive(cfg, spec, s);
    }
  }
  throw StructuralError("unknown scheme");
}

double sup_error(const FittedTree& ft, double tau) {
  double worst = 0.0;
  for (const auto& leaf : ft.leaf_partition())
    worst = std::max(worst, std::abs(leaf.estimate.value - tau));
  return worst;
}

namespace {

const std::vector<std::string> kDgpKeys = {"p", "xi", "c0", "c1", "error", "sigma"};

std::vector<std::string> join(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

double real_or(const Config& c, const std::string& key, double fallback) {
  return c.has(key) ? c.real(key) : fallback;
}

std::size_t count_or(const Config& c, const std::string& key, std::size_t fallback) {
  return c.has(key) ? c.count(key) : fallback;
}

bool needs_data(const std::vector<EstimatorSpec>& methods) {
  for (const auto& m : methods)
    if (m.scheme.tag != SchemeTag::x_adaptive) return true;
  return false;
}

// Evaluation point: x in the first coordinate, 0.5 in the others.
std::vector<double> eval_point(double x, std::size_t p) {
  std::vector<double> pt(p, 0.5);
  pt[0] = x;
  return pt;
}

template <class T>
void append(std::vector<T>& to, const std::vector<T>& from) {
  to.insert(to.end(), from.begin(), from.end());
}

void add_sums(std::vector<double>& to, const std::vector<double>& from) {
  for (std::size_t i = 0; i < to.size(); ++i) to[i] += from[i];
}

}  // namespace

DgpConfig dgp_from_config(const Config& cfg, std::size_t n) {
  DgpConfig g;
  g.n = n;
  g.p = count_or(cfg, "p", 1);
  g.xi = real_or(cfg, "xi", 0.5);
  g.c0 = real_or(cfg, "c0", 0.0);
  g.c1 = real_or(cfg, "c1", 0.0);
  const ErrorDist err{parse_error_family(cfg.has("error") ? cfg.str("error") : "normal"),
                      real_or(cfg, "sigma", 1.0)};
  g.err0 = g.err1 = err;
  g.validate();
  return g;
}

std::vector<EstimatorSpec> methods_from_config(const Config& cfg, double xi) {
  std::vector<EstimatorSpec> out;
  const double ratio = real_or(cfg, "honest_ratio", 0.5);
  for (const auto& r : cfg.list("rules"))
    for (const auto& s : cfg.list("schemes"))
      for (auto K : cfg.counts("K")) {
        auto spec = EstimatorSpec::make(parse_rule(r), parse_scheme(s), K, xi);
        spec.scheme.honest_ratio = ratio;
        spec.validate();
        out.push_back(spec);
      }
  return out;
}

// ------------------------------------------------------------- split index

SplitIndexParams SplitIndexParams::from_config(const Config& cfg) {
  SplitIndexParams p;
  p.dgp = dgp_from_config(cfg, cfg.count("n"));
  for (const auto& r : cfg.list("rules")) p.rules.push_back(parse_rule(r));
  p.reps = cfg.count("reps");
  p.a = real_or(cfg, "a", 0.1);
  p.b = real_or(cfg, "b", 0.9);
  if (!(0.0 < p.a && p.a < p.b && p.b < 1.0))
    throw ConfigError("split-index needs 0 < a < b < 1");
  if (p.dgp.n < 2) throw ConfigError("split-index needs n >= 2");
  return p;
}

SplitIndexResult split_index_experiment(const SplitIndexParams& prm, const RunOptions& opt) {
  struct Rec {
    std::size_t coord, index;
    double threshold;
  };
  const std::size_t R = prm.rules.size();
  for (auto r : prm.rules) SplitRule{r, prm.dgp.xi}.validate();
  using Acc = std::vector<Rec>;  // rep-major, rule-minor
  const Acc recs = run_replications(
      prm.reps, opt.workers, Acc{},
      [&](Acc& acc, std::size_t rep) {
        RngStream s(opt.seed, "split-index", rep, kLaneData);
        const Dataset data = sample_dataset(prm.dgp, s);
        const OrderIndex orders = coordinate_orders(data);
        for (auto r : prm.rules) {
          const auto dec = best_split(data, orders, SplitRule{r, prm.dgp.xi});
          if (dec.valid)
            acc.push_back({dec.coordinate + 1, dec.index, dec.threshold});
          else
            acc.push_back({0, 0, std::nan("")});
        }
      },
      [](Acc& total, const Acc& part) { append(total, part); });

  SplitIndexResult out{ResultTable("split_index", {"rule", "n", "p", "rep", "coord", "index",
                                                   "threshold"}),
                       {}};
  const double n = static_cast<double>(prm.dgp.n);
  const double nb = std::pow(n, prm.b), na = std::pow(n, prm.a);
  const double pe = 2.0 * static_cast<double>(prm.dgp.p) * std::numbers::e;
  for (std::size_t ri = 0; ri < R; ++ri) {
    SplitIndexSummary sm;
    sm.rule = prm.rules[ri];
    sm.lower_a.assign(prm.dgp.p, 0.0);
    sm.lower_a0.assign(prm.dgp.p, 0.0);
    sm.bound_a = (prm.b - prm.a) / pe;
    sm.bound_a0 = prm.b / pe;
    for (std::size_t rep = 0; rep < prm.reps; ++rep) {
      const Rec& r = recs[rep * R + ri];
      out.table.add_row({rule_name(prm.rules[ri]), fmt_int(static_cast<long long>(prm.dgp.n)),
                         fmt_int(static_cast<long long>(prm.dgp.p)),
                         fmt_int(static_cast<long long>(rep)),
                         fmt_int(static_cast<long long>(r.coord)),
                         fmt_int(static_cast<long long>(r.index)), fmt_real(r.threshold)});
      if (r.coord == 0) continue;
      const double i = static_cast<double>(r.index);
      if (i <= nb || i >= n - nb) sm.two_tail += 1.0;
      if (i <= nb) {
        sm.lower_a0[r.coord - 1] += 1.0;
        if (i >= na) sm.lower_a[r.coord - 1] += 1.0;
      }
    }
    const double reps = static_cast<double>(std::max<std::size_t>(prm.reps, 1));
    sm.two_tail /= reps;
    for (auto& v : sm.lower_a) v /= reps;
    for (auto& v : sm.lower_a0) v /= reps;
    out.summary.push_back(std::move(sm));
  }
  out.table.set_meta("a", fmt_real(prm.a));
  out.table.set_meta("b", fmt_real(prm.b));
  return out;
}

// --------------------------------------------------------------- RMSE grid

RmseGridParams RmseGridParams::from_config(const Config& cfg) {
  RmseGridParams p;
  p.dgp = dgp_from_config(cfg, cfg.count("n"));
  p.methods = methods_from_config(cfg, p.dgp.xi);
  p.reps = cfg.count("reps");
  const double lo = real_or(cfg, "grid_lo", 0.01);
  const double hi = real_or(cfg, "grid_hi", 0.99);
  const std::size_t m = count_or(cfg, "grid_points", 99);
  if (!(0.0 <= lo && lo <= hi && hi <= 1.0) || m == 0)
    throw ConfigError("RMSE grid needs 0 <= grid_lo <= grid_hi <= 1 and grid_points >= 1");
  for (std::size_t i = 0; i < m; ++i)
    p.grid.push_back(m == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) /
                                            static_cast<double>(m - 1));
  return p;
}

std::size_t RmseGridResult::point_near(double x) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - x) < std::abs(grid[best] - x)) best = i;
  return best;
}

std::size_t RmseGridResult::method_index(const std::string& name) const {
  for (std::size_t i = 0; i < methods.size(); ++i)
    if (methods[i].name() == name) return i;
  throw ConfigError("no method named '" + name + "' in the RMSE grid");
}

RmseGridResult rmse_grid_experiment(const RmseGridParams& prm, const RunOptions& opt) {
  const std::size_t M = prm.methods.size(), G = prm.grid.size();
  const double tau = prm.dgp.tau();
  const bool with_data = needs_data(prm.methods);
  using Acc = std::vector<double>;  // [sum e^2 | sum e^4], each M x G
  const Acc sums = run_replications(
      prm.reps, opt.workers, Acc(2 * M * G, 0.0),
      [&](Acc& acc, std::size_t rep) {
        const RngStream base(opt.seed, "rmse-grid", rep, kLaneData);
        RngStream ds = base;
        const Dataset data = with_data ? sample_dataset(prm.dgp, ds) : Dataset{};
        for (std::size_t m = 0; m < M; ++m) {
          const FittedTree ft = fit_method(prm.methods[m], prm.dgp, data, base);
          for (std::size_t g = 0; g < G; ++g) {
            const double e = ft.predict(eval_point(prm.grid[g], prm.dgp.p)) - tau;
            acc[m * G + g] += e * e;
            acc[M * G + m * G + g] += e * e * e * e;
          }
        }
      },
      add_sums);

  RmseGridResult out{ResultTable("rmse_grid", {"rule", "scheme", "K", "x", "rmse", "se", "reps"}),
                     prm.methods, prm.grid, std::vector<double>(M * G), std::vector<double>(M * G)};
  const double R = static_cast<double>(prm.reps);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t g = 0; g < G; ++g) {
      const double ms = sums[m * G + g] / R;
      const double var = R > 1 ? std::max(0.0, sums[M * G + m * G + g] / R - ms * ms) * R / (R - 1)
                               : 0.0;
      const double rmse = std::sqrt(ms);
      // Delta method: se(sqrt(m)) = se(m) / (2 sqrt(m)).
      const double se = rmse > 0.0 ? std::sqrt(var / R) / (2.0 * rmse) : 0.0;
      out.rmse[m * G + g] = rmse;
      out.se[m * G + g] = se;
      const auto& spec = prm.methods[m];
      out.table.add_row({rule_name(spec.rule.tag), scheme_name(spec.scheme.tag),
                         fmt_int(static_cast<long long>(spec.K)), fmt_real(prm.grid[g]),
                         fmt_real(rmse), fmt_real(se), fmt_int(static_cast<long long>(prm.reps))});
    }
  return out;
}

// -------------------------------------------------------------------- IMSE

double imse_bound(std::size_t K, std::size_t N, double sigma2) {
  return std::ldexp(1.0, static_cast<int>(K + 1)) * static_cast<double>(K + 1) * sigma2 /
         static_cast<double>(N + 1);
}

ImseParams ImseParams::from_config(const Config& cfg) {
  ImseParams p;
  p.K = cfg.counts("K");
  p.N = cfg.counts("N");
  if (p.K.size() != p.N.size()) throw ConfigError("imse needs as many N values as K values");
  p.mu = real_or(cfg, "mu", 0.0);
  p.dgp = dgp_from_config(cfg, 0);
  p.dgp.c0 = p.dgp.c1 = p.mu;
  p.reps = cfg.count("reps");
  for (std::size_t i = 0; i < p.K.size(); ++i) {
    if (p.K[i] < 1) throw ConfigError("imse needs K >= 1");
    if (p.N[i] < 2) throw ConfigError("imse needs N >= 2");
  }
  return p;
}

ImseResult imse_experiment(const ImseParams& prm, const RunOptions& opt) {
  const std::size_t P = prm.K.size();
  using Acc = std::vector<double>;  // [sum imse | sum imse^2] per pair
  const Acc sums = run_replications(
      prm.reps, opt.workers, Acc(2 * P, 0.0),
      [&](Acc& acc, std::size_t rep) {
        for (std::size_t i = 0; i < P; ++i) {
          DgpConfig cfg = prm.dgp;
          cfg.n = prm.N[i] * (prm.K[i] + 1);
          auto spec = EstimatorSpec::make(RuleTag::cart_sse, SchemeTag::x_adaptive, prm.K[i],
                                          cfg.xi);
          RngStream s(opt.seed, "imse", rep, static_cast<std::uint32_t>(i));
          const FittedTree ft = estimate_x_adaptive(cfg, spec, s);
          double v = 0.0;
          for (const auto& leaf : ft.leaf_partition()) {
            const double e = leaf.estimate.value - prm.mu;
            v += leaf.measure * e * e;
          }
          acc[i] += v;
          acc[P + i] += v * v;
        }
      },
      add_sums);

  ImseResult out{ResultTable("imse", {"mode", "K", "N", "imse", "bound", "reps"}), {}};
  const double R = static_cast<double>(prm.reps);
  const double sigma2 = prm.dgp.err0.variance();
  for (std::size_t i = 0; i < P; ++i) {
    ImseRow row;
    row.K = prm.K[i];
    row.N = prm.N[i];
    row.imse = sums[i] / R;
    const double var =
        R > 1 ? std::max(0.0, sums[P + i] / R - row.imse * row.imse) * R / (R - 1) : 0.0;
    row.se = std::sqrt(var / R);
    row.bound = imse_bound(row.K, row.N, sigma2);
    out.rows.push_back(row);
    out.table.add_row({"regression", fmt_int(static_cast<long long>(row.K)),
                       fmt_int(static_cast<long long>(row.N)), fmt_real(row.imse),
                       fmt_real(row.bound), fmt_int(static_cast<long long>(prm.reps))});
  }
  return out;
}

// -------------------------------------------------------------------- bias

BiasParams BiasParams::from_config(const Config& cfg) {
  BiasParams p;
  p.dgp = dgp_from_config(cfg, cfg.count("n"));
  p.methods = methods_from_config(cfg, p.dgp.xi);
  p.points = cfg.has("x") ? cfg.reals("x") : std::vector<double>{0.5};
  for (double x : p.points)
    if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("bias evaluation points must lie in [0,1]");
  p.reps = cfg.count("reps");
  return p;
}

BiasResult bias_experiment(const BiasParams& prm, const RunOptions& opt) {
  const std::size_t M = prm.methods.size(), G = prm.points.size();
  const bool with_data = needs_data(prm.methods);
  using Acc = std::vector<double>;  // [sum | sum of squares | degenerate count]
  const Acc sums = run_replications(
      prm.reps, opt.workers, Acc(3 * M * G, 0.0),
      [&](Acc& acc, std::size_t rep) {
        const RngStream base(opt.seed, "bias", rep, kLaneData);
        RngStream ds = base;
        const Dataset data = with_data ? sample_dataset(prm.dgp, ds) : Dataset{};
        for (std::size_t m = 0; m < M; ++m) {
          const FittedTree ft = fit_method(prm.methods[m], prm.dgp, data, base);
          for (std::size_t g = 0; g < G; ++g) {
            const auto& est = ft.estimate_at(eval_point(prm.points[g], prm.dgp.p));
            const std::size_t c = m * G + g;
            acc[c] += est.value;
            acc[M * G + c] += est.value * est.value;
            acc[2 * M * G + c] += est.degenerate ? 1.0 : 0.0;
          }
        }
      },
      add_sums);

  BiasResult out{ResultTable("bias", {"rule", "scheme", "K", "x", "mean", "se", "p_empty", "reps"}),
                 prm.methods, prm.points, std::vector<BiasCell>(M * G), prm.dgp.tau()};
  const double R = static_cast<double>(prm.reps);
  for (std::size_t m = 0; m < M; ++m)
    for (std::size_t g = 0; g < G; ++g) {
      const std::size_t c = m * G + g;
      BiasCell cell;
      cell.mean = sums[c] / R;
      const double var =
          R > 1 ? std::max(0.0, sums[M * G + c] / R - cell.mean * cell.mean) * R / (R - 1) : 0.0;
      cell.se = std::sqrt(var / R);
      cell.p_empty = sums[2 * M * G + c] / R;
      out.cells[c] = cell;
      const auto& spec = prm.methods[m];
      out.table.add_row({rule_name(spec.rule.tag), scheme_name(spec.scheme.tag),
                         fmt_int(static_cast<long long>(spec.K)), fmt_real(prm.points[g]),
                         fmt_real(cell.mean), fmt_real(cell.se), fmt_real(cell.p_empty),
                         fmt_int(static_cast<long long>(prm.reps))});
    }
  out.table.set_meta("tau", fmt_real(prm.dgp.tau()));
  return out;
}

// --------------------------------------------------------------- sup error

double sup_error_threshold(double sigma, std::size_t n, double b) {
  const double nn = static_cast<double>(n);
  return sigma * std::pow(nn, -b / 2.0) * std::sqrt(2.0 * std::log(std::log(nn)));
}

SupErrorParams SupErrorParams::from_config(const Config& cfg) {
  SupErrorParams p;
  p.dgp = dgp_from_config(cfg, cfg.count("n"));
  if (p.dgp.n < 3) throw ConfigError("sup-error needs n >= 3 so that log log n > 0");
  p.methods = methods_from_config(cfg, p.dgp.xi);
  p.b = real_or(cfg, "b", 0.9);
  if (!(p.b > 0.0 && p.b < 1.0)) throw ConfigError("sup-error needs 0 < b < 1");
  p.reps = cfg.count("reps");
  return p;
}

SupErrorResult sup_error_experiment(const SupErrorParams& prm, const RunOptions& opt) {
  const std::size_t M = prm.methods.size();
  const double tau = prm.dgp.tau();
  const bool with_data = needs_data(prm.methods);
  using Acc = std::vector<double>;  // rep-major, method-minor
  const Acc errs = run_replications(
      prm.reps, opt.workers, Acc{},
      [&](Acc& acc, std::size_t rep) {
        const RngStream base(opt.seed, "sup-error", rep, kLaneData);
        RngStream ds = base;
        const Dataset data = with_data ? sample_dataset(prm.dgp, ds) : Dataset{};
        for (std::size_t m = 0; m < M; ++m)
          acc.push_back(sup_error(fit_method(prm.methods[m], prm.dgp, data, base), tau));
      },
      [](Acc& total, const Acc& part) { append(total, part); });

  SupErrorResult out{ResultTable("sup_error", {"rule", "scheme", "K", "n", "threshold",
                                               "exceed_freq", "q50", "q90", "reps"}),
                     prm.methods,
                     {}};
  const double t = sup_error_threshold(std::sqrt(prm.dgp.err0.variance()), prm.dgp.n, prm.b);
  for (std::size_t m = 0; m < M; ++m) {
    std::vector<double> v;
    for (std::size_t rep = 0; rep < prm.reps; ++rep) v.push_back(errs[rep * M + m]);
    SupErrorRow row;
    row.threshold = t;
    row.exceed_freq = static_cast<double>(std::count_if(v.begin(), v.end(),
                                                        [t](double e) { return e >= t; })) /
                      static_cast<double>(v.size());
    row.q50 = quantile(v, 0.5);
    row.q90 = quantile(v, 0.9);
    out.rows.push_back(row);
    const auto& spec = prm.methods[m];
    out.table.add_row({rule_name(spec.rule.tag), scheme_name(spec.scheme.tag),
                       fmt_int(static_cast<long long>(spec.K)),
                       fmt_int(static_cast<long long>(prm.dgp.n)), fmt_real(t),
                       fmt_real(row.exceed_freq), fmt_real(row.q50), fmt_real(row.q90),
                       fmt_int(static_cast<long long>(prm.reps))});
  }
  out.table.set_meta("b", fmt_real(prm.b));
  return out;
}

// ------------------------------------------------------------ Beta measure

BetaMeasureParams BetaMeasureParams::from_config(const Config& cfg) {
  BetaMeasureParams p;
  p.N = cfg.count("N");
  if (p.N < 2) throw ConfigError("beta-measure needs N >= 2");
  p.dgp = dgp_from_config(cfg, 2 * p.N);
  p.rule = SplitRule{cfg.has("rule") ? parse_rule(cfg.str("rule")) : RuleTag::cart_sse,
                     p.dgp.xi};
  p.rule.validate();
  p.min_count = count_or(cfg, "min_count", 200);
  p.reps = cfg.count("reps");
  return p;
}

BetaMeasureResult beta_measure_experiment(const BetaMeasureParams& prm, const RunOptions& opt) {
  struct Draw {
    std::size_t k;
    double m;
  };
  using Acc = std::vector<Draw>;
  auto spec = EstimatorSpec::make(prm.rule.tag, SchemeTag::x_adaptive, 1, prm.dgp.xi);
  DgpConfig cfg = prm.dgp;
  cfg.n = 2 * prm.N;
  const Acc draws = run_replications(
      prm.reps, opt.workers, Acc{},
      [&](Acc& acc, std::size_t rep) {
        RngStream s(opt.seed, "beta-measure", rep, kLaneXAdaptive + 1);
        const FittedTree ft = estimate_x_adaptive(cfg, spec, s);
        const auto& root = ft.tree().nodes().front();
        if (root.is_leaf()) return;
        acc.push_back({root.split.index, ft.leaf_partition().front().measure});
      },
      [](Acc& total, const Acc& part) { append(total, part); });

  BetaMeasureResult out{ResultTable("beta_measure", {"N", "k", "count", "ks_stat", "p_value"}),
                        {},
                        draws.size(),
                        true};
  std::map<std::size_t, std::vector<double>> buckets;
  for (const auto& d : draws) {
    if (!(d.m > 0.0 && d.m < 1.0)) out.measures_in_unit_interval = false;
    buckets[d.k].push_back(d.m);
  }
  const double N = static_cast<double>(prm.N);
  for (auto& [k, ms] : buckets) {
    if (ms.size() < prm.min_count) continue;
    const double kk = static_cast<double>(k);
    BetaBucket b{k, ms.size(),
                 ks_one_sample(ms, [kk, N](double m) { return beta_cdf(m, kk, N - kk + 1.0); })};
    out.buckets.push_back(b);
    out.table.add_row({fmt_int(static_cast<long long>(prm.N)), fmt_int(static_cast<long long>(k)),
                       fmt_int(static_cast<long long>(b.count)), fmt_real(b.ks.statistic),
                       fmt_real(b.ks.p_value)});
  }
  out.table.set_meta("rule", rule_name(prm.rule.tag));
  out.table.set_meta("min_count", fmt_int(static_cast<long long>(prm.min_count)));
  return out;
}

// ------------------------------------------------------------- O-U checks

DarlingErdosParams DarlingErdosParams::from_config(const Config& cfg) {
  DarlingErdosParams p;
  p.d = cfg.count("d");
  p.c = cfg.real("c");
  p.L = cfg.real("L");
  p.dt = real_or(cfg, "dt", 0.005);
  p.reps = cfg.count("reps");
  if (p.d < 1 || p.d > 2) throw ConfigError("Darling-Erdos check supports d in {1, 2}");
  if (!(p.L > 1.0) || !(p.c > 0.0) || !(p.dt > 0.0))
    throw ConfigError("Darling-Erdos check needs L > 1, c > 0 and dt > 0");
  return p;
}

DarlingErdosResult darling_erdos_experiment(const DarlingErdosParams& prm,
                                            const RunOptions& opt) {
  using Acc = std::vector<double>;
  const Acc stats = run_replications(
      prm.reps, opt.workers, Acc{},
      [&](Acc& acc, std::size_t rep) {
        RngStream s(opt.seed, "ou-darling-erdos", rep, kLaneData);
        const OuPath path = simulate_ou(prm.d, prm.c * prm.L, prm.dt, s);
        acc.push_back(sup_norm_stat(path, prm.L, prm.c).stat);
      },
      [](Acc& total, const Acc& part) { append(total, part); });

  DarlingErdosResult out{ResultTable("ou_darling_erdos", {"d", "c", "L", "rep", "stat"}), stats,
                         {}, {}};
  for (std::size_t rep = 0; rep < stats.size(); ++rep)
    out.table.add_row({fmt_int(static_cast<long long>(prm.d)), fmt_real(prm.c), fmt_real(prm.L),
                       fmt_int(static_cast<long long>(rep)), fmt_real(stats[rep])});
  if (stats.size() >= 100) {
    out.ks_log_c = gumbel_ks_check(stats, std::log(prm.c));
    out.ks_2log_c = gumbel_ks_check(stats, 2.0 * std::log(prm.c));
  }
  out.table.set_meta("dt", fmt_real(prm.dt));
  return out;
}

MaxLocParams MaxLocParams::from_config(const Config& cfg) {
  MaxLocParams p;
  p.A = cfg.real("A");
  p.B = cfg.real("B");
  p.C = cfg.real("C");
  p.dt = real_or(cfg, "dt", 0.005);
  p.reps = cfg.count("reps");
  validate_max_location(p.A, p.B, p.C, p.dt);
  return p;
}

MaxLocResult max_location_experiment(const MaxLocParams& prm, const RunOptions& opt) {
  validate_max_location(prm.A, prm.B, prm.C, prm.dt);
  const auto hits = run_replications(
      prm.reps, opt.workers, std::size_t{0},
      [&](std::size_t& acc, std::size_t rep) {
        RngStream s(opt.seed, "ou-maxloc", rep, kLaneData);
        acc += max_location_hit(prm.A, prm.B, prm.C, prm.dt, s) ? 1 : 0;
      },
      [](std::size_t& total, std::size_t part) { total += part; });
  MaxLocResult out{ResultTable("ou_maxloc", {"A", "B", "C", "reps", "freq", "se"}), 0.0, 0.0};
  const double R = static_cast<double>(prm.reps);
  out.freq = static_cast<double>(hits) / R;
  out.se = std::sqrt(out.freq * (1.0 - out.freq) / R);
  out.table.add_row({fmt_real(prm.A), fmt_real(prm.B), fmt_real(prm.C),
                     fmt_int(static_cast<long long>(prm.reps)), fmt_real(out.freq),
                     fmt_real(out.se)});
  out.table.set_meta("dt", fmt_real(prm.dt));
  return out;
}

// --------------------------------------------------------------- registry

namespace {

struct ExperimentEntry {
  std::vector<std::string> allowed;
  std::vector<std::string> required;
  std::function<ExperimentOutput(const Config&, const RunOptions&)> run;
};

std::string pct(double v) { return fmt_real(std::round(v * 10000.0) / 10000.0); }

std::string rows_note(const ResultTable& t) {
  return t.name() + ".csv: " + std::to_string(t.rows().size()) + " rows";
}

const std::map<std::string, ExperimentEntry>& registry() {
  static const std::map<std::string, ExperimentEntry> r = {
      {"split-index",
       {join({"reps", "seed", "n", "rules", "a", "b"}, kDgpKeys),
        {"reps", "n", "rules"},
        [](const Config& c, const RunOptions& o) {
          auto res = split_index_experiment(SplitIndexParams::from_config(c), o);
          std::string note = rows_note(res.table) + ";";
          for (const auto& s : res.summary)
            note += " " + rule_name(s.rule) + " two-tail=" + pct(s.two_tail);
          return ExperimentOutput{{res.table}, {note}};
        }}},
      {"rmse-grid",
       {join({"reps", "seed", "n", "rules", "schemes", "K", "honest_ratio", "grid_lo", "grid_hi",
              "grid_points"},
             kDgpKeys),
        {"reps", "n", "rules", "schemes", "K"},
        [](const Config& c, const RunOptions& o) {
          auto res = rmse_grid_experiment(RmseGridParams::from_config(c), o);
          return ExperimentOutput{{res.table},
                                  {rows_note(res.table) + "; " +
                                   std::to_string(res.methods.size()) + " methods"}};
        }}},
      {"imse",
       {{"reps", "seed", "K", "N", "mu", "p", "xi", "error", "sigma"},
        {"reps", "K", "N"},
        [](const Config& c, const RunOptions& o) {
          auto res = imse_experiment(ImseParams::from_config(c), o);
          std::string note = rows_note(res.table) + ";";
          for (const auto& r : res.rows)
            note += " K=" + std::to_string(r.K) + ":" + pct(r.imse) + "<=" + pct(r.bound);
          return ExperimentOutput{{res.table}, {note}};
        }}},
      {"bias",
       {join({"reps", "seed", "n", "rules", "schemes", "K", "honest_ratio", "x"}, kDgpKeys),
        {"reps", "n", "rules", "schemes", "K"},
        [](const Config& c, const RunOptions& o) {
          auto res = bias_experiment(BiasParams::from_config(c), o);
          return ExperimentOutput{{res.table},
                                  {rows_note(res.table) + "; tau=" + fmt_real(res.tau)}};
        }}},
      {"sup-error",
       {join({"reps", "seed", "n", "rules", "schemes", "K", "honest_ratio", "b"}, kDgpKeys),
        {"reps", "n", "rules", "schemes", "K"},
        [](const Config& c, const RunOptions& o) {
          auto res = sup_error_experiment(SupErrorParams::from_config(c), o);
          std::string note = rows_note(res.table) + ";";
          for (std::size_t i = 0; i < res.methods.size(); ++i)
            note += " " + res.methods[i].name() + "=" + pct(res.rows[i].exceed_freq);
          return ExperimentOutput{{res.table}, {note}};
        }}},
      {"beta-measure",
       {join({"reps", "seed", "N", "rule", "min_count"}, kDgpKeys),
        {"reps", "N"},
        [](const Config& c, const RunOptions& o) {
          auto res = beta_measure_experiment(BetaMeasureParams::from_config(c), o);
          double pmin = 1.0;
          for (const auto& b : res.buckets) pmin = std::min(pmin, b.ks.p_value);
          return ExperimentOutput{{res.table},
                                  {rows_note(res.table) + "; min p=" + fmt_real(pmin)}};
        }}},
      {"ou-darling-erdos",
       {{"reps", "seed", "d", "c", "L", "dt"},
        {"reps", "d", "c", "L"},
        [](const Config& c, const RunOptions& o) {
          auto res = darling_erdos_experiment(DarlingErdosParams::from_config(c), o);
          return ExperimentOutput{{res.table},
                                  {rows_note(res.table) + "; KS(log c)=" +
                                   pct(res.ks_log_c.statistic) + " KS(2 log c)=" +
                                   pct(res.ks_2log_c.statistic)}};
        }}},
      {"ou-maxloc",
       {{"reps", "seed", "A", "B", "C", "dt"},
        {"reps", "A", "B", "C"},
        [](const Config& c, const RunOptions& o) {
          auto res = max_location_experiment(MaxLocParams::from_config(c), o);
          return ExperimentOutput{{res.table},
                                  {rows_note(res.table) + "; freq=" + pct(res.freq) +
                                   " se=" + pct(res.se)}};
        }}},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {
      "split-index", "rmse-grid",    "imse",           "bias",
      "sup-error",   "beta-measure", "ou-darling-erdos", "ou-maxloc"};
  return names;
}

ExperimentOutput run_experiment(const std::string& experiment, Config cfg,
                                const RunOptions& opt, std::size_t reps_override) {
  const auto it = registry().find(experiment);
  if (it == registry().end()) throw ConfigError("unknown experiment '" + experiment + "'");
  cfg.check_keys(it->second.allowed, it->second.required);
  if (reps_override > 0) cfg.set("reps", std::to_string(reps_override));
  if (cfg.count("reps") < 1) throw ConfigError("reps must be at least 1");
  auto out = it->second.run(cfg, opt);
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, fnv1a64(cfg.canonical()));
  for (auto& t : out.tables) {
    t.set_meta("experiment", experiment);
    t.set_meta("seed", std::to_string(opt.seed));
    t.set_meta("config_hash", hash);
  }
  return out;
}

}  // namespace ccart
