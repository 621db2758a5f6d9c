#include "sindex/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "sindex/csv.hpp"
#include "sindex/error.hpp"
#include "sindex/rng.hpp"

namespace sindex {

double trimmed_mean(const Vec& values, double trim_fraction) {
  if (values.empty()) raise(errc::invalid_input, "trimmed_mean of empty vector");
  if (trim_fraction < 0.0 || trim_fraction > 0.45)
    raise(errc::invalid_input, "trim fraction outside [0, 0.45]");
  Vec sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const int cut = static_cast<int>(std::ceil(trim_fraction * sorted.size()));
  const int lo = cut, hi = static_cast<int>(sorted.size()) - cut;
  if (lo >= hi) raise(errc::invalid_input, "trimming removed every value");
  double s = 0.0;
  for (int i = lo; i < hi; ++i) s += sorted[i];
  return s / (hi - lo);
}

double fit_loglog_slope(const std::vector<double>& ns, const Vec& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    const double x = std::log10(ns[i]);
    sx += x;
    sy += ys[i];
    sxx += x * x;
    sxy += x * ys[i];
    ++m;
  }
  if (m < 2) raise(errc::slope_undefined, "fewer than 2 finite points");
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) raise(errc::slope_undefined, "degenerate abscissae");
  return (m * sxy - sx * sy) / denom;
}

namespace {

int floor_log2_pos(double x) {
  return x >= 1.0 ? static_cast<int>(std::floor(std::log2(x))) : 0;
}

}  // namespace

int choose_level(int n, int d, double sigma, double s_width) {
  int l = floor_log2_pos(n / std::max(2.0 * d, 4.0));
  if (sigma > 0.0 && s_width > 0.0) l = std::min(l, floor_log2_pos(s_width / (2.0 * sigma)));
  return std::max(l, 0);
}

Dataset apply_standardization(const StandardizedDataset& sd, const Dataset& raw) {
  const int n = raw.n(), d = raw.d();
  Vec x(static_cast<std::size_t>(n) * d);
  Vec centered(d);
  for (int i = 0; i < n; ++i) {
    const double* r = raw.row(i);
    for (int j = 0; j < d; ++j) centered[j] = r[j] - sd.mean[j];
    const Vec w = sd.whitener.apply(centered);
    std::copy(w.begin(), w.end(), x.begin() + static_cast<std::size_t>(i) * d);
  }
  return Dataset(n, d, std::move(x), raw.y());
}

double FittedPipeline::predict_raw(const double* x, int d) const {
  Vec centered(d);
  for (int j = 0; j < d; ++j) centered[j] = x[j] - sd.mean[j];
  const Vec w = sd.whitener.apply(centered);
  return predict(model, w);
}

double FittedPipeline::predict_raw(const Vec& x) const {
  return predict_raw(x.data(), static_cast<int>(x.size()));
}

namespace {

AdmissibleSet prune_for_local_pca(const SlicedStats& stats, const AdmissibleSet& adm,
                                  CovarianceMode mode) {
  const int need = (mode == CovarianceMode::centered) ? 2 : 1;
  AdmissibleSet out;
  out.level = adm.level;
  for (int h : adm.indices)
    if (stats.counts[h] >= need) out.indices.push_back(h);
  if (out.indices.empty())
    raise(errc::no_admissible_bins, "no admissible bin can support a local PCA");
  return out;
}

IndexEstimate estimate_index(Method method, const SlicedStats& stats, int n, CovarianceMode mode) {
  switch (method) {
    case Method::sir:
      return sir(stats, n);
    case Method::save: {
      EstimatorOptions opt;
      opt.mode = mode;
      return save(stats, n, opt);
    }
    case Method::svr: {
      const AdmissibleSet adm = prune_for_local_pca(stats, admissible_bins(stats, n), mode);
      return svr(stats, adm, mode);
    }
  }
  raise(errc::invalid_input, "unknown method");
}

Interval expanded_projection_interval(const StandardizedDataset& sd, const Vec& v, double expand) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < sd.data.n(); ++i) {
    const double t = dot(v, sd.data.row_vec(i));
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  const double pad = expand * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

FittedPipeline fit_pipeline(const Dataset& ds, const PipelineOptions& opt) {
  FittedPipeline out;
  out.sd = opt.standardize ? standardize(ds, opt.rel_tol) : StandardizedDataset::wrap(ds);
  if (opt.filter.enabled) out.sd = filter_samples(out.sd, opt.filter);

  const int n = out.sd.data.n();
  const Vec& y = out.sd.data.y();
  const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
  const int level = opt.level >= 0
                        ? opt.level
                        : choose_level(n, out.sd.data.d(), opt.sigma_hint, *yhi - *ylo);

  const DyadicPartition part = build_partition(y, level);
  const SlicedStats stats = slice_stats(out.sd, part);
  out.index = estimate_index(opt.method, stats, n, opt.mode);

  const int scale_j =
      opt.scale_j >= 0 ? opt.scale_j : recommended_scale_j(n, opt.smoothness_s, opt.scale_b);
  const Interval iv = expanded_projection_interval(out.sd, out.index.v_hat, opt.interval_expand);
  out.model = fit_piecewise(out.sd, out.index, scale_j, opt.degree_m, iv);
  return out;
}

// ---------------------------------------------------------------------------
// Config plumbing

namespace {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

const std::vector<std::string> kKnownKeys = {
    "dist", "d", "d_grid", "function", "settings", "functions", "noise_percents", "f3_seed",
    "methods", "mode", "n_grid", "l_grid", "j_grid", "degree_m", "smoothness_s", "scale_b",
    "knn_k", "replicates", "trim_fraction", "base_seed", "threads", "test_n", "denoised",
    "interval_expand", "filter_enabled", "filter_cx", "filter_cy", "out_csv", "out_manifest"};

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) raise(errc::parse_error, "config root must be an object");
  for (const auto& [key, _] : j.items())
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
      raise(errc::invalid_input, "unknown config key '" + key + "'");

  ExperimentConfig c;
  read_key(j, "dist", &c.dist);
  read_key(j, "d", &c.d);
  read_key(j, "d_grid", &c.d_grid);
  read_key(j, "function", &c.function);
  read_key(j, "settings", &c.settings);
  read_key(j, "functions", &c.functions);
  read_key(j, "noise_percents", &c.noise_percents);
  read_key(j, "f3_seed", &c.f3_seed);
  read_key(j, "methods", &c.methods);
  read_key(j, "mode", &c.mode);
  read_key(j, "n_grid", &c.n_grid);
  read_key(j, "l_grid", &c.l_grid);
  read_key(j, "j_grid", &c.j_grid);
  read_key(j, "degree_m", &c.degree_m);
  read_key(j, "smoothness_s", &c.smoothness_s);
  read_key(j, "scale_b", &c.scale_b);
  read_key(j, "knn_k", &c.knn_k);
  read_key(j, "replicates", &c.replicates);
  read_key(j, "trim_fraction", &c.trim_fraction);
  read_key(j, "base_seed", &c.base_seed);
  read_key(j, "threads", &c.threads);
  read_key(j, "test_n", &c.test_n);
  read_key(j, "denoised", &c.denoised);
  read_key(j, "interval_expand", &c.interval_expand);
  read_key(j, "filter_enabled", &c.filter_enabled);
  read_key(j, "filter_cx", &c.filter_cx);
  read_key(j, "filter_cy", &c.filter_cy);
  read_key(j, "out_csv", &c.out_csv);
  read_key(j, "out_manifest", &c.out_manifest);

  if (c.n_grid.empty() || c.noise_percents.empty() || c.methods.empty())
    raise(errc::invalid_input, "grids must be nonempty");
  if (c.replicates < 1) raise(errc::invalid_input, "replicates must be >= 1");
  if (c.trim_fraction < 0.0 || c.trim_fraction > 0.45)
    raise(errc::invalid_input, "trim fraction outside [0, 0.45]");
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return nlohmann::json{{"dist", c.dist},
                        {"d", c.d},
                        {"d_grid", c.d_grid},
                        {"function", c.function},
                        {"settings", c.settings},
                        {"functions", c.functions},
                        {"noise_percents", c.noise_percents},
                        {"f3_seed", c.f3_seed},
                        {"methods", c.methods},
                        {"mode", c.mode},
                        {"n_grid", c.n_grid},
                        {"l_grid", c.l_grid},
                        {"j_grid", c.j_grid},
                        {"degree_m", c.degree_m},
                        {"smoothness_s", c.smoothness_s},
                        {"scale_b", c.scale_b},
                        {"knn_k", c.knn_k},
                        {"replicates", c.replicates},
                        {"trim_fraction", c.trim_fraction},
                        {"base_seed", c.base_seed},
                        {"threads", c.threads},
                        {"test_n", c.test_n},
                        {"denoised", c.denoised},
                        {"interval_expand", c.interval_expand},
                        {"filter_enabled", c.filter_enabled},
                        {"filter_cx", c.filter_cx},
                        {"filter_cy", c.filter_cy},
                        {"out_csv", c.out_csv},
                        {"out_manifest", c.out_manifest}};
}

// ---------------------------------------------------------------------------
// Shared run machinery

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void run_tasks(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      int i;
      while ((i = next.fetch_add(1)) < count) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct Agg {
  double value = std::numeric_limits<double>::quiet_NaN();
  double spread = std::numeric_limits<double>::quiet_NaN();
  int count = 0;
  int flagged = 0;
};

Agg aggregate(const Vec& raw, double trim) {
  Agg a;
  Vec vals;
  for (double v : raw)
    (std::isfinite(v) ? vals.push_back(v) : void(++a.flagged));
  a.count = static_cast<int>(vals.size());
  if (vals.empty()) return a;
  a.value = (trim > 0.0) ? trimmed_mean(vals, trim)
                         : std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
  if (vals.size() >= 2) {
    double ss = 0.0;
    const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
    for (double v : vals) ss += (v - mean) * (v - mean);
    a.spread = std::sqrt(ss / (vals.size() - 1));
  } else {
    a.spread = 0.0;
  }
  return a;
}

class StageClock {
 public:
  void add(const std::string& stage, double seconds) {
    std::lock_guard<std::mutex> lock(mu_);
    seconds_[stage] += seconds;
  }
  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : seconds_) j[k] = v;
    return j;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, double> seconds_;
};

class ScopedTimer {
 public:
  ScopedTimer(StageClock* clock, std::string stage)
      : clock_(clock), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    const auto end = std::chrono::steady_clock::now();
    clock_->add(stage_, std::chrono::duration<double>(end - start_).count());
  }

 private:
  StageClock* clock_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

DistributionSpec make_dist(const std::string& name, int d) {
  DistributionSpec spec;
  spec.kind = distribution_from_name(name);
  spec.d = d;
  return spec;
}

FunctionSpec make_func(const std::string& name, std::uint64_t f3_seed) {
  FunctionSpec spec;
  spec.kind = function_from_name(name);
  spec.f3_seed = f3_seed;
  return spec;
}

nlohmann::json base_manifest(const char* run, const ExperimentConfig& cfg) {
  nlohmann::json echo = config_to_json(cfg);
  return nlohmann::json{{"run", run},
                        {"config", echo},
                        {"base_seed", cfg.base_seed},
                        {"config_hash", fnv1a64(echo.dump())}};
}

int knn_k_for(const ExperimentConfig& cfg, int n, int d) {
  if (cfg.knn_k > 0) return std::min(cfg.knn_k, n);
  if (cfg.knn_k < 0) {
    const int k = static_cast<int>(std::lround(std::pow(n, 2.0 / (d + 2.0))));
    return std::clamp(k, 1, n);
  }
  return 0;  // cross-validated
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(int v) { return std::to_string(v); }

}  // namespace

// ---------------------------------------------------------------------------
// Index benchmark (Table-3 style)

ExperimentResult run_index_benchmark(const ExperimentConfig& cfg) {
  for (const auto& m : cfg.methods)
    method_from_name(m);  // knn not allowed here; throws on it
  const std::vector<std::string> settings = cfg.settings.empty()
                                                ? std::vector<std::string>{cfg.dist}
                                                : cfg.settings;
  const std::vector<std::string> functions = cfg.functions.empty()
                                                 ? std::vector<std::string>{cfg.function}
                                                 : cfg.functions;
  struct Cell {
    int si, fi, qi, ni;
  };
  std::vector<Cell> cells;
  for (int si = 0; si < static_cast<int>(settings.size()); ++si)
    for (int fi = 0; fi < static_cast<int>(functions.size()); ++fi)
      for (int qi = 0; qi < static_cast<int>(cfg.noise_percents.size()); ++qi)
        for (int ni = 0; ni < static_cast<int>(cfg.n_grid.size()); ++ni)
          cells.push_back({si, fi, qi, ni});

  const int reps = cfg.replicates;
  const int n_methods = static_cast<int>(cfg.methods.size());
  const int n_tasks = static_cast<int>(cells.size()) * reps;
  std::vector<Vec> values(n_tasks, Vec(n_methods, std::numeric_limits<double>::quiet_NaN()));
  std::vector<int> levels(n_tasks, -1);
  StageClock clock;

  const auto t0 = std::chrono::steady_clock::now();
  run_tasks(n_tasks, cfg.threads, [&](int tid) {
    const int cell_id = tid / reps;
    const int rep = tid % reps;
    const Cell& cell = cells[cell_id];
    try {
      const std::uint64_t seed = derive_seed(cfg.base_seed, cell_id, rep);
      const DistributionSpec dist = make_dist(settings[cell.si], cfg.d);
      const FunctionSpec func = make_func(functions[cell.fi], cfg.f3_seed);
      const NoiseSpec noise = NoiseSpec::resolve(func, cfg.noise_percents[cell.qi]);

      SyntheticDataset synth;
      {
        ScopedTimer t(&clock, "generate");
        synth = make_dataset(dist, func, noise, cfg.n_grid[cell.ni], seed);
      }
      // Generator output is already coordinate-normalized; the paper's index
      // errors live in these coordinates, so no joint whitening here.
      StandardizedDataset sd = StandardizedDataset::wrap(synth.data);
      if (cfg.filter_enabled) sd = filter_samples(sd, {cfg.filter_cx, cfg.filter_cy, true});
      const Vec& v_true = synth.v;
      const Vec& y = sd.data.y();
      const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
      const int level =
          cfg.l_grid.size() == 1
              ? cfg.l_grid.front()
              : choose_level(sd.data.n(), sd.data.d(), noise.resolved_sigma, *yhi - *ylo);
      levels[tid] = level;

      ScopedTimer t(&clock, "index");
      const DyadicPartition part = build_partition(y, level);
      const SlicedStats stats = slice_stats(sd, part);
      const CovarianceMode mode =
          cfg.mode == "uncentered" ? CovarianceMode::uncentered : CovarianceMode::centered;
      for (int mi = 0; mi < n_methods; ++mi) {
        try {
          const IndexEstimate est =
              estimate_index(method_from_name(cfg.methods[mi]), stats, sd.data.n(), mode);
          const double err = index_error(est.v_hat, v_true);
          values[tid][mi] = std::log10(err * err);
        } catch (const Error&) {
          // flagged cell entry; the run continues
        }
      }
    } catch (const Error&) {
      // whole replicate flagged for every method
    }
  });

  ExperimentResult out;
  out.columns = {"setting", "function", "noise_percent", "method", "n",     "d",
                 "level",   "statistic", "value",        "spread", "count", "flagged"};
  for (int cell_id = 0; cell_id < static_cast<int>(cells.size()); ++cell_id) {
    const Cell& cell = cells[cell_id];
    const int d = distribution_from_name(settings[cell.si]) == DistributionKind::gaussian ? cfg.d : 2;
    int level = -1;
    for (int rep = 0; rep < reps && level < 0; ++rep) level = levels[cell_id * reps + rep];
    for (int mi = 0; mi < n_methods; ++mi) {
      Vec vals(reps);
      for (int rep = 0; rep < reps; ++rep) vals[rep] = values[cell_id * reps + rep][mi];
      const Agg a = aggregate(vals, cfg.trim_fraction);
      out.rows.push_back({settings[cell.si], functions[cell.fi], fmt(cfg.noise_percents[cell.qi]),
                          cfg.methods[mi], fmt(cfg.n_grid[cell.ni]), fmt(d), fmt(level),
                          "mean_log10_sq_index_error", fmt(a.value), fmt(a.spread), fmt(a.count),
                          fmt(a.flagged)});
    }
  }
  out.manifest = base_manifest("bench_index", cfg);
  out.manifest["stage_seconds"] = clock.to_json();
  out.manifest["walltime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.manifest["cells"] = out.rows.size();
  return out;
}

// ---------------------------------------------------------------------------
// Rate sweep

RateTarget rate_target_from_name(const std::string& name) {
  if (name == "index_error" || name == "index") return RateTarget::index_error;
  if (name == "regression_mse" || name == "rate" || name == "mse")
    return RateTarget::regression_mse;
  raise(errc::invalid_input, "unknown rate target '" + name + "'");
}

ExperimentResult run_rate_sweep(const ExperimentConfig& cfg, RateTarget target) {
  if (cfg.n_grid.size() < 4)
    raise(errc::invalid_input, "rate sweep needs an n grid with >= 4 points");
  const std::vector<int> d_grid = cfg.d_grid.empty() ? std::vector<int>{cfg.d} : cfg.d_grid;
  const std::vector<int> l_grid = cfg.l_grid.empty() ? std::vector<int>{-1} : cfg.l_grid;

  const double noise_percent = cfg.noise_percents.front();
  const int reps = cfg.replicates;
  const int n_methods = static_cast<int>(cfg.methods.size());
  const int n_l = (target == RateTarget::index_error) ? static_cast<int>(l_grid.size()) : 1;

  struct Cell {
    int di, ni;
  };
  std::vector<Cell> cells;
  for (int di = 0; di < static_cast<int>(d_grid.size()); ++di)
    for (int ni = 0; ni < static_cast<int>(cfg.n_grid.size()); ++ni) cells.push_back({di, ni});

  const int slots = n_methods * n_l;
  const int n_tasks = static_cast<int>(cells.size()) * reps;
  std::vector<Vec> values(n_tasks, Vec(slots, std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::vector<int>> used_level(n_tasks, std::vector<int>(slots, -1));
  std::vector<std::vector<int>> used_j(n_tasks, std::vector<int>(slots, -1));
  std::vector<std::vector<int>> used_k(n_tasks, std::vector<int>(slots, -1));
  StageClock clock;

  const auto t0 = std::chrono::steady_clock::now();
  run_tasks(n_tasks, cfg.threads, [&](int tid) {
    const int cell_id = tid / reps;
    const int rep = tid % reps;
    const Cell& cell = cells[cell_id];
    const int n = cfg.n_grid[cell.ni];
    try {
      const std::uint64_t seed = derive_seed(cfg.base_seed, cell_id, rep);
      const DistributionSpec dist = make_dist(cfg.dist, d_grid[cell.di]);
      const FunctionSpec func = make_func(cfg.function, cfg.f3_seed);
      const NoiseSpec noise = NoiseSpec::resolve(func, noise_percent);

      SyntheticDataset synth;
      {
        ScopedTimer t(&clock, "generate");
        synth = make_dataset(dist, func, noise, n, seed);
      }

      if (target == RateTarget::index_error) {
        const StandardizedDataset sd = StandardizedDataset::wrap(synth.data);
        const Vec& v_true = synth.v;
        const Vec& y = sd.data.y();
        const auto [ylo, yhi] = std::minmax_element(y.begin(), y.end());
        const CovarianceMode mode =
            cfg.mode == "uncentered" ? CovarianceMode::uncentered : CovarianceMode::centered;
        ScopedTimer t(&clock, "index");
        for (int li = 0; li < n_l; ++li) {
          const int level = l_grid[li] >= 0 ? l_grid[li]
                                            : choose_level(sd.data.n(), sd.data.d(),
                                                           noise.resolved_sigma, *yhi - *ylo);
          try {
            const DyadicPartition part = build_partition(y, level);
            const SlicedStats stats = slice_stats(sd, part);
            for (int mi = 0; mi < n_methods; ++mi) {
              const int slot = mi * n_l + li;
              used_level[tid][slot] = level;
              try {
                const IndexEstimate est =
                    estimate_index(method_from_name(cfg.methods[mi]), stats, sd.data.n(), mode);
                values[tid][slot] = std::log10(index_error(est.v_hat, v_true));
              } catch (const Error&) {
              }
            }
          } catch (const Error&) {
          }
        }
        return;
      }

      // regression_mse
      SyntheticDataset test;
      {
        ScopedTimer t(&clock, "generate");
        test = make_dataset(dist, func, noise, cfg.test_n, derive_seed(seed, 1, 0));
      }
      for (int mi = 0; mi < n_methods; ++mi) {
        const int slot = mi;
        try {
          if (cfg.methods[mi] == "knn") {
            ScopedTimer t(&clock, "knn");
            const int k = knn_k_for(cfg, n, d_grid[cell.di]);
            const KnnModel km = knn_fit(synth.data, k > 0 ? std::optional<int>(k) : std::nullopt);
            used_k[tid][slot] = km.k;
            const double m =
                mse(km, test.data, cfg.denoised ? &test.noiseless : nullptr);
            values[tid][slot] = std::log10(m);
          } else {
            PipelineOptions opt;
            opt.method = method_from_name(cfg.methods[mi]);
            opt.mode = cfg.mode == "uncentered" ? CovarianceMode::uncentered
                                                : CovarianceMode::centered;
            opt.level = cfg.l_grid.size() == 1 ? cfg.l_grid.front() : -1;
            opt.scale_j = cfg.j_grid.size() == 1 ? cfg.j_grid.front() : -1;
            opt.degree_m = cfg.degree_m;
            opt.smoothness_s = cfg.smoothness_s;
            opt.scale_b = cfg.scale_b;
            opt.sigma_hint = noise.resolved_sigma;
            opt.interval_expand = cfg.interval_expand;
            opt.standardize = false;  // generator coordinates
            FittedPipeline pipe;
            {
              ScopedTimer t(&clock, "fit");
              pipe = fit_pipeline(synth.data, opt);
            }
            used_level[tid][slot] = pipe.index.level;
            used_j[tid][slot] = pipe.model.scale_j;
            ScopedTimer t(&clock, "evaluate");
            const double m = mse(pipe.model, test.data, cfg.denoised ? &test.noiseless : nullptr);
            values[tid][slot] = std::log10(m);
          }
        } catch (const Error&) {
        }
      }
    } catch (const Error&) {
    }
  });

  ExperimentResult out;
  out.columns = {"target", "method", "function", "noise_percent", "d",     "l",
                 "j",      "k",      "n",        "statistic",     "value", "spread",
                 "count",  "flagged"};
  const char* stat_name = (target == RateTarget::index_error)
                              ? "mean_log10_index_error"
                              : (cfg.denoised ? "mean_log10_mse_true" : "mean_log10_mse");
  const char* target_name =
      (target == RateTarget::index_error) ? "index_error" : "regression_mse";

  nlohmann::json slopes = nlohmann::json::array();
  for (int di = 0; di < static_cast<int>(d_grid.size()); ++di) {
    for (int mi = 0; mi < n_methods; ++mi) {
      for (int li = 0; li < n_l; ++li) {
        std::vector<double> ns;
        Vec curve;
        for (int ni = 0; ni < static_cast<int>(cfg.n_grid.size()); ++ni) {
          // locate the cell
          int cell_id = -1;
          for (int c = 0; c < static_cast<int>(cells.size()); ++c)
            if (cells[c].di == di && cells[c].ni == ni) cell_id = c;
          const int slot = (target == RateTarget::index_error) ? mi * n_l + li : mi;
          Vec vals(reps);
          int level = -1, jj = -1, kk = -1;
          for (int rep = 0; rep < reps; ++rep) {
            const int tid = cell_id * reps + rep;
            vals[rep] = values[tid][slot];
            if (level < 0) level = used_level[tid][slot];
            if (jj < 0) jj = used_j[tid][slot];
            if (kk < 0) kk = used_k[tid][slot];
          }
          const Agg a = aggregate(vals, cfg.trim_fraction);
          out.rows.push_back({target_name, cfg.methods[mi], cfg.function, fmt(noise_percent),
                              fmt(d_grid[di]), level >= 0 ? fmt(level) : "",
                              jj >= 0 ? fmt(jj) : "", kk >= 0 ? fmt(kk) : "",
                              fmt(cfg.n_grid[ni]), stat_name, fmt(a.value), fmt(a.spread),
                              fmt(a.count), fmt(a.flagged)});
          ns.push_back(cfg.n_grid[ni]);
          curve.push_back(a.value);
        }
        nlohmann::json entry{{"method", cfg.methods[mi]},
                             {"d", d_grid[di]},
                             {"statistic", stat_name},
                             {"values", curve}};
        if (target == RateTarget::index_error && l_grid[li] >= 0) entry["l"] = l_grid[li];
        try {
          entry["slope"] = fit_loglog_slope(ns, curve);
        } catch (const Error&) {
          entry["slope"] = nullptr;
        }
        slopes.push_back(entry);
      }
    }
  }

  out.manifest = base_manifest("bench_rate", cfg);
  out.manifest["target"] = target_name;
  out.manifest["slopes"] = slopes;
  out.manifest["stage_seconds"] = clock.to_json();
  out.manifest["walltime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.manifest["cells"] = out.rows.size();
  return out;
}

// ---------------------------------------------------------------------------
// Heatmap

ExperimentResult run_heatmap(const ExperimentConfig& cfg) {
  std::vector<int> l_grid = cfg.l_grid;
  std::vector<int> j_grid = cfg.j_grid;
  if (l_grid.empty())
    for (int l = 1; l <= 8; ++l) l_grid.push_back(l);
  if (j_grid.empty())
    for (int j = 0; j <= 8; ++j) j_grid.push_back(j);

  const double noise_percent = cfg.noise_percents.front();
  const int reps = cfg.replicates;
  const int n_l = static_cast<int>(l_grid.size());
  const int n_j = static_cast<int>(j_grid.size());
  const int slots = n_l * n_j;
  const int n_tasks = static_cast<int>(cfg.n_grid.size()) * reps;
  std::vector<Vec> values(n_tasks, Vec(slots, std::numeric_limits<double>::quiet_NaN()));
  StageClock clock;

  const auto t0 = std::chrono::steady_clock::now();
  run_tasks(n_tasks, cfg.threads, [&](int tid) {
    const int ni = tid / reps;
    const int rep = tid % reps;
    try {
      const std::uint64_t seed = derive_seed(cfg.base_seed, ni, rep);
      const DistributionSpec dist = make_dist(cfg.dist, cfg.d);
      const FunctionSpec func = make_func(cfg.function, cfg.f3_seed);
      const NoiseSpec noise = NoiseSpec::resolve(func, noise_percent);

      SyntheticDataset synth, test;
      {
        ScopedTimer t(&clock, "generate");
        synth = make_dataset(dist, func, noise, cfg.n_grid[ni], seed);
        test = make_dataset(dist, func, noise, cfg.test_n, derive_seed(seed, 1, 0));
      }
      const StandardizedDataset sd = StandardizedDataset::wrap(synth.data);
      const Dataset& test_w = test.data;
      const Vec& y = sd.data.y();
      const CovarianceMode mode =
          cfg.mode == "uncentered" ? CovarianceMode::uncentered : CovarianceMode::centered;

      for (int li = 0; li < n_l; ++li) {
        IndexEstimate est;
        try {
          ScopedTimer t(&clock, "index");
          const DyadicPartition part = build_partition(y, l_grid[li]);
          const SlicedStats stats = slice_stats(sd, part);
          const AdmissibleSet adm =
              prune_for_local_pca(stats, admissible_bins(stats, sd.data.n()), mode);
          est = svr(stats, adm, mode);
        } catch (const Error&) {
          continue;  // whole row flagged for this replicate
        }
        const Interval iv = expanded_projection_interval(sd, est.v_hat, cfg.interval_expand);
        for (int ji = 0; ji < n_j; ++ji) {
          try {
            ScopedTimer t(&clock, "regress");
            const PiecewiseModel model =
                fit_piecewise(sd, est, j_grid[ji], cfg.degree_m, iv);
            const double m = mse(model, test_w, cfg.denoised ? &test.noiseless : nullptr);
            values[tid][li * n_j + ji] = std::log10(m);
          } catch (const Error&) {
          }
        }
      }
    } catch (const Error&) {
    }
  });

  ExperimentResult out;
  out.columns = {"function", "noise_percent", "d",     "n",      "l",     "j",
                 "statistic", "value",        "spread", "count", "flagged"};
  const char* stat_name = cfg.denoised ? "trimmed_log10_mse_true" : "trimmed_log10_mse";
  for (int ni = 0; ni < static_cast<int>(cfg.n_grid.size()); ++ni) {
    for (int li = 0; li < n_l; ++li) {
      for (int ji = 0; ji < n_j; ++ji) {
        Vec vals(reps);
        for (int rep = 0; rep < reps; ++rep) vals[rep] = values[ni * reps + rep][li * n_j + ji];
        const Agg a = aggregate(vals, cfg.trim_fraction);
        out.rows.push_back({cfg.function, fmt(noise_percent), fmt(cfg.d), fmt(cfg.n_grid[ni]),
                            fmt(l_grid[li]), fmt(j_grid[ji]), stat_name, fmt(a.value),
                            fmt(a.spread), fmt(a.count), fmt(a.flagged)});
      }
    }
  }
  out.manifest = base_manifest("bench_heatmap", cfg);
  out.manifest["l_grid"] = l_grid;
  out.manifest["j_grid"] = j_grid;
  out.manifest["stage_seconds"] = clock.to_json();
  out.manifest["walltime_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.manifest["cells"] = out.rows.size();
  return out;
}

void write_result_csv(const std::string& path, const ExperimentResult& result) {
  std::ofstream out(path);
  if (!out) raise(errc::parse_error, "cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < result.columns.size(); ++i)
    out << result.columns[i] << (i + 1 < result.columns.size() ? ',' : '\n');
  for (const auto& row : result.rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? ',' : '\n');
}

void write_manifest_json(const std::string& path, const ExperimentResult& result) {
  std::ofstream out(path);
  if (!out) raise(errc::parse_error, "cannot open '" + path + "' for writing");
  out << result.manifest.dump(2) << "\n";
}

}  // namespace sindex
