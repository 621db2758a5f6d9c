#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sindex/dataset.hpp"
#include "sindex/estimators.hpp"
#include "sindex/knn.hpp"
#include "sindex/piecewise.hpp"
#include "sindex/synthetic.hpp"

namespace sindex {

// Mean after removing ceil(trim * count) smallest and largest values.
double trimmed_mean(const Vec& values, double trim_fraction);

// Least squares slope of ys against log10(ns); non-finite ys are dropped.
// Fewer than 2 usable points -> SlopeUndefined.
double fit_loglog_slope(const std::vector<double>& ns, const Vec& ys);

// Default slicing level: largest l such that admissible bins keep at least
// max(2d, 4) samples, capped so the bin width stays above twice the noise
// level (|S| 2^-l >= 2 sigma).
int choose_level(int n, int d, double sigma, double s_width);

// Applies a fitted standardization map to fresh raw samples.
Dataset apply_standardization(const StandardizedDataset& sd, const Dataset& raw);

struct PipelineOptions {
  Method method = Method::svr;
  CovarianceMode mode = CovarianceMode::centered;
  int level = -1;    // -1: choose_level
  int scale_j = -1;  // -1: recommended_scale_j
  int degree_m = 1;
  double smoothness_s = 1.0;
  double scale_b = 1.0;
  double sigma_hint = 0.0;        // feeds the level heuristic
  double interval_expand = 0.0;   // widen I by this fraction of its width per side
  double rel_tol = 1e-10;
  // Joint whitening preprocessing. The Monte Carlo benches turn this off:
  // their generators already emit coordinate-normalized data and the paper's
  // reported index errors live in those coordinates.
  bool standardize = true;
  FilterConfig filter;
};

struct FittedPipeline {
  StandardizedDataset sd;
  IndexEstimate index;
  PiecewiseModel model;

  double predict_raw(const double* x, int d) const;
  double predict_raw(const Vec& x) const;
};

// Standardize, slice, estimate the index, regress: Algorithm steps 1.a-2.c.
FittedPipeline fit_pipeline(const Dataset& ds, const PipelineOptions& opt);

struct ExperimentConfig {
  // data model
  std::string dist = "gaussian";
  int d = 10;
  std::vector<int> d_grid;          // regression rate sweeps; empty -> {d}
  std::string function = "f2";
  std::vector<std::string> settings;   // index benchmark; empty -> {dist}
  std::vector<std::string> functions;  // index benchmark; empty -> {function}
  std::vector<double> noise_percents = {0.01};
  std::uint64_t f3_seed = 7;

  // estimation
  std::vector<std::string> methods = {"svr"};
  std::string mode = "centered";
  std::vector<int> n_grid = {1000};
  std::vector<int> l_grid;  // empty -> auto level
  std::vector<int> j_grid;  // empty -> auto scale
  int degree_m = 1;
  double smoothness_s = 1.0;
  double scale_b = 1.0;
  int knn_k = 0;  // 0: cross-validated, >0: fixed, -1: n^{2/(d+2)} schedule

  // protocol
  int replicates = 10;
  double trim_fraction = 0.0;
  std::uint64_t base_seed = 20240613;
  int threads = 0;  // 0: hardware concurrency
  int test_n = 10000;
  bool denoised = false;
  double interval_expand = 0.05;
  bool filter_enabled = false;
  double filter_cx = 4.0;
  double filter_cy = 4.0;

  // outputs
  std::string out_csv;
  std::string out_manifest;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // one row per grid cell
  nlohmann::json manifest;
};

// Table-3 style benchmark: per (setting, function, sigma, method) cell, mean
// over replicates of log10 squared index error.
ExperimentResult run_index_benchmark(const ExperimentConfig& cfg);

enum class RateTarget { index_error, regression_mse };
RateTarget rate_target_from_name(const std::string& name);

// Convergence-rate sweep over the n grid, with per-curve fitted slopes in the
// manifest. index_error sweeps l as well when an explicit l grid is given.
ExperimentResult run_rate_sweep(const ExperimentConfig& cfg, RateTarget target);

// Trimmed-mean log10 MSE over the (l, j, n) grid.
ExperimentResult run_heatmap(const ExperimentConfig& cfg);

void write_result_csv(const std::string& path, const ExperimentResult& result);
void write_manifest_json(const std::string& path, const ExperimentResult& result);

}  // namespace sindex
