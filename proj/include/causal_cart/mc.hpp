#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <string>
#include <vector>

#include "causal_cart/config.hpp"
#include "causal_cart/dgp.hpp"
#include "causal_cart/schemes.hpp"
#include "causal_cart/stats.hpp"

namespace ccart {

/// Named-column table rendered as CSV (comma separated, LF endings, header
/// row first). Cells are stored already formatted so that the bytes written
/// are fixed at insertion time.
class ResultTable {
 public:
  ResultTable(std::string name, std::vector<std::string> header);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }
  [[nodiscard]] const std::vector<std::vector<std::string>>& rows() const noexcept {
    return rows_;
  }

  void add_row(std::vector<std::string> cells);
  void set_meta(const std::string& key, std::string value) { meta_[key] = std::move(value); }
  [[nodiscard]] const std::map<std::string, std::string>& meta() const noexcept { return meta_; }

  [[nodiscard]] std::string to_csv() const;
  // "key=value" lines (seed, config hash, experiment parameters).
  [[nodiscard]] std::string meta_text() const;

  // Writes <dir>/<name>.csv and <dir>/<name>.meta, each through a temporary
  // file and a rename. Returns the CSV path.
  std::string write(const std::string& dir) const;

 private:
  std::string name_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::map<std::string, std::string> meta_;
};

std::string fmt_real(double v);
std::string fmt_int(long long v);

void write_file_atomic(const std::string& path, const std::string& content);

struct RunOptions {
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: OpenMP default
};

int resolve_workers(unsigned workers);

// Replications are grouped into fixed blocks of this size; each block is
// reduced in replication order and blocks are merged in block order, so the
// result does not depend on the worker count.
inline constexpr std::size_t kRepBlock = 16;

/// Runs body(acc, rep) for rep in [0, reps) over a worker pool and folds the
/// per-block accumulators with merge(total, part). Exceptions thrown by a
/// replication are rethrown on the calling thread.
template <class Acc, class Body, class Merge>
Acc run_replications(std::size_t reps, unsigned workers, const Acc& init, Body body,
                     Merge merge) {
  const std::size_t blocks = (reps + kRepBlock - 1) / kRepBlock;
  std::vector<Acc> parts(blocks, init);
  std::exception_ptr failure;
  const int threads = resolve_workers(workers);
  const auto nblocks = static_cast<long long>(blocks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long long b = 0; b < nblocks; ++b) {
    try {
      const std::size_t lo = static_cast<std::size_t>(b) * kRepBlock;
      const std::size_t hi = std::min(reps, lo + kRepBlock);
      for (std::size_t rep = lo; rep < hi; ++rep) body(parts[b], rep);
    } catch (...) {
#pragma omp critical(ccart_replication_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  Acc total = init;
  for (const auto& part : parts) merge(total, part);
  return total;
}

// Fits one estimator for one replication. NSS and honest estimators use
// `data`; the honest permutation and the X-adaptive draws come from fixed
// lanes of `rep_stream`, so every method in a replication sees common random
// numbers.
FittedTree fit_method(const EstimatorSpec& spec, const DgpConfig& cfg, const Dataset& data,
                      const RngStream& rep_stream);

// Lanes of the per-replication stream.
inline constexpr std::uint32_t kLaneData = 0;
inline constexpr std::uint32_t kLaneHonest = 1;
inline constexpr std::uint32_t kLaneXAdaptive = 16;  // + K

// Max over leaves of |estimate - tau|; equals the sup over [0,1]^p of the
// prediction error because predictions are piecewise constant.
double sup_error(const FittedTree& ft, double tau);

// ---------------------------------------------------------------- configs

// DGP keys shared by the experiments: p, xi, c0, c1, error, sigma.
DgpConfig dgp_from_config(const Config& cfg, std::size_t n);
std::vector<EstimatorSpec> methods_from_config(const Config& cfg, double xi);

// ------------------------------------------------------------ experiments

struct SplitIndexParams {
  DgpConfig dgp;
  std::vector<RuleTag> rules;
  std::size_t reps = 0;
  double a = 0.1;
  double b = 0.9;
  static SplitIndexParams from_config(const Config& cfg);
};

struct SplitIndexSummary {
  RuleTag rule{};
  double two_tail = 0.0;              // P(i <= n^b or i >= n - n^b)
  std::vector<double> lower_a;        // per coordinate: P(n^a <= i <= n^b, j = l)
  std::vector<double> lower_a0;       // same with a = 0
  double bound_a = 0.0;               // (b - a) / (2 p e)
  double bound_a0 = 0.0;              // b / (2 p e)
};

struct SplitIndexResult {
  ResultTable table;
  std::vector<SplitIndexSummary> summary;
};
SplitIndexResult split_index_experiment(const SplitIndexParams& prm, const RunOptions& opt);

struct RmseGridParams {
  DgpConfig dgp;
  std::vector<EstimatorSpec> methods;
  std::vector<double> grid;
  std::size_t reps = 0;
  static RmseGridParams from_config(const Config& cfg);
};

struct RmseGridResult {
  ResultTable table;
  std::vector<EstimatorSpec> methods;
  std::vector<double> grid;
  std::vector<double> rmse;  // methods x grid
  std::vector<double> se;
  [[nodiscard]] double at(std::size_t method, std::size_t point) const {
    return rmse[method * grid.size() + point];
  }
  // Index of the grid point nearest to x.
  [[nodiscard]] std::size_t point_near(double x) const;
  [[nodiscard]] std::size_t method_index(const std::string& name) const;
};
RmseGridResult rmse_grid_experiment(const RmseGridParams& prm, const RunOptions& opt);

struct ImseParams {
  std::vector<std::size_t> K;
  std::vector<std::size_t> N;  // paired with K
  DgpConfig dgp;               // n is overwritten per pair with N (K + 1)
  double mu = 0.0;
  std::size_t reps = 0;
  static ImseParams from_config(const Config& cfg);
};

struct ImseRow {
  std::size_t K = 0;
  std::size_t N = 0;
  double imse = 0.0;
  double se = 0.0;
  double bound = 0.0;
};

struct ImseResult {
  ResultTable table;
  std::vector<ImseRow> rows;
};
ImseResult imse_experiment(const ImseParams& prm, const RunOptions& opt);

// 2^{K+1} (K+1) sigma^2 / (N+1)
double imse_bound(std::size_t K, std::size_t N, double sigma2);

struct BiasParams {
  DgpConfig dgp;
  std::vector<EstimatorSpec> methods;
  std::vector<double> points;
  std::size_t reps = 0;
  static BiasParams from_config(const Config& cfg);
};

struct BiasCell {
  double mean = 0.0;
  double se = 0.0;
  double p_empty = 0.0;  // share of replications whose leaf at x was degenerate
};

struct BiasResult {
  ResultTable table;
  std::vector<EstimatorSpec> methods;
  std::vector<double> points;
  std::vector<BiasCell> cells;  // methods x points
  double tau = 0.0;
  [[nodiscard]] const BiasCell& at(std::size_t method, std::size_t point) const {
    return cells[method * points.size() + point];
  }
};
BiasResult bias_experiment(const BiasParams& prm, const RunOptions& opt);

struct SupErrorParams {
  DgpConfig dgp;
  std::vector<EstimatorSpec> methods;
  double b = 0.9;
  std::size_t reps = 0;
  static SupErrorParams from_config(const Config& cfg);
};

// sigma n^{-b/2} sqrt(2 log log n)
double sup_error_threshold(double sigma, std::size_t n, double b);

struct SupErrorRow {
  double threshold = 0.0;
  double exceed_freq = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
};

struct SupErrorResult {
  ResultTable table;
  std::vector<EstimatorSpec> methods;
  std::vector<SupErrorRow> rows;
};
SupErrorResult sup_error_experiment(const SupErrorParams& prm, const RunOptions& opt);

struct BetaMeasureParams {
  DgpConfig dgp;  // n is overwritten with 2 N
  std::size_t N = 100;
  SplitRule rule{RuleTag::cart_sse};
  std::size_t min_count = 200;
  std::size_t reps = 0;
  static BetaMeasureParams from_config(const Config& cfg);
};

struct BetaBucket {
  std::size_t k = 0;
  std::size_t count = 0;
  KsResult ks;
};

struct BetaMeasureResult {
  ResultTable table;
  std::vector<BetaBucket> buckets;  // only buckets with >= min_count draws
  std::size_t stumps = 0;           // replications whose root was split
  bool measures_in_unit_interval = true;
};
BetaMeasureResult beta_measure_experiment(const BetaMeasureParams& prm, const RunOptions& opt);

struct DarlingErdosParams {
  std::size_t d = 1;
  double c = 2.0;
  double L = 0.0;
  double dt = 0.005;
  std::size_t reps = 0;
  static DarlingErdosParams from_config(const Config& cfg);
};

struct DarlingErdosResult {
  ResultTable table;
  std::vector<double> stats;
  KsResult ks_log_c;      // against Gumbel(log c)
  KsResult ks_2log_c;     // against Gumbel(2 log c)
};
DarlingErdosResult darling_erdos_experiment(const DarlingErdosParams& prm,
                                            const RunOptions& opt);

struct MaxLocParams {
  double A = 1.0, B = 2.0, C = 4.0;
  double dt = 0.005;
  std::size_t reps = 0;
  static MaxLocParams from_config(const Config& cfg);
};

struct MaxLocResult {
  ResultTable table;
  double freq = 0.0;
  double se = 0.0;
};
MaxLocResult max_location_experiment(const MaxLocParams& prm, const RunOptions& opt);

// ---------------------------------------------------------------- registry

struct ExperimentOutput {
  std::vector<ResultTable> tables;
  std::vector<std::string> summary;  // one line per table
};

// Experiment names, in CLI order (selftest excluded).
const std::vector<std::string>& experiment_names();
// Built-in configuration used when no --config is given.
std::string default_config(const std::string& experiment);
// Validates keys, applies `reps_override` when non-zero, runs, and stamps
// seed and config hash into every table's metadata.
ExperimentOutput run_experiment(const std::string& experiment, Config cfg,
                                const RunOptions& opt, std::size_t reps_override = 0);

}  // namespace ccart
