// sindex: conditional regression for single-index models.
//
// Subcommands: simulate, fit, predict, bench index|rate|heatmap.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sindex/config.hpp"
#include "sindex/csv.hpp"
#include "sindex/error.hpp"
#include "sindex/harness.hpp"

namespace {

using nlohmann::json;
using namespace sindex;

Vec parse_double_list(const std::string& csv) {
  Vec out;
  std::stringstream ss(csv);
  std::string tok;
  int i = 0;
  while (std::getline(ss, tok, ',')) out.push_back(parse_double(tok, ++i));
  return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  for (double v : parse_double_list(csv)) out.push_back(static_cast<int>(v));
  return out;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) raise(errc::parse_error, "cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(errc::parse_error, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    raise(errc::parse_error, std::string(e.what()));
  }
}

// --------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string dist = "gaussian";
  int d = 2;
  std::string function = "f1";
  std::string poly_coeffs;
  std::uint64_t f3_seed = 7;
  std::string v_csv;
  double noise_percent = 0.0;
  int n = 1000;
  std::uint64_t seed = 42;
  std::string out;
  std::string truth;
};

int run_simulate(const SimulateArgs& a) {
  DistributionSpec dist{distribution_from_name(a.dist), a.d};
  FunctionSpec func;
  func.kind = function_from_name(a.function);
  func.f3_seed = a.f3_seed;
  if (!a.poly_coeffs.empty()) func.poly = parse_double_list(a.poly_coeffs);
  if (!a.v_csv.empty()) func.v = parse_double_list(a.v_csv);
  const NoiseSpec noise = NoiseSpec::resolve(func, a.noise_percent);

  const SyntheticDataset synth = make_dataset(dist, func, noise, a.n, a.seed);
  write_dataset_csv_file(a.out, synth.data);
  if (!a.truth.empty()) {
    json truth{{"v", synth.v},
               {"function", function_name(func.kind)},
               {"f3_seed", func.f3_seed},
               {"sigma", synth.sigma},
               {"noise_percent", a.noise_percent},
               {"seed", a.seed},
               {"dist", distribution_name(dist.kind)},
               {"d", dist.dim()},
               {"n", a.n}};
    if (!func.poly.empty()) truth["poly"] = func.poly;
    write_json_file(a.truth, truth);
  }
  std::cout << "wrote " << a.n << " samples (d=" << dist.dim() << ") to " << a.out << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string data;
  std::string method = "svr";
  int level = -1;
  int scale_j = -1;
  int degree = 1;
  std::string mode = "centered";
  double smoothness = 1.0;
  double scale_b = 1.0;
  double sigma_hint = 0.0;
  double interval_expand = 0.05;
  bool filter = false;
  double cx = 4.0, cy = 4.0;
  double rel_tol = 1e-10;
  std::string out = "model.json";
};

json standardization_to_json(const StandardizedDataset& sd) {
  std::vector<Vec> w(sd.data.d(), Vec(sd.data.d()));
  for (int i = 0; i < sd.data.d(); ++i)
    for (int j = 0; j < sd.data.d(); ++j) w[i][j] = sd.whitener(i, j);
  return json{{"mean", sd.mean}, {"whitener", w}};
}

int run_fit(const FitArgs& a) {
  const Dataset ds = read_dataset_csv_file(a.data);
  PipelineOptions opt;
  opt.method = method_from_name(a.method);
  opt.mode = a.mode == "uncentered" ? CovarianceMode::uncentered : CovarianceMode::centered;
  opt.level = a.level;
  opt.scale_j = a.scale_j;
  opt.degree_m = a.degree;
  opt.smoothness_s = a.smoothness;
  opt.scale_b = a.scale_b;
  opt.sigma_hint = a.sigma_hint;
  opt.interval_expand = a.interval_expand;
  opt.rel_tol = a.rel_tol;
  opt.filter = {a.cx, a.cy, a.filter};

  const FittedPipeline pipe = fit_pipeline(ds, opt);
  json out{{"model", model_to_json(pipe.model)},
           {"standardization", standardization_to_json(pipe.sd)},
           {"train", {{"n", ds.n()}, {"d", ds.d()}, {"kept", pipe.sd.data.n()}}}};
  write_json_file(a.out, out);
  std::cout << "fit " << a.method << " model: level=" << pipe.index.level
            << " scale_j=" << pipe.model.scale_j << " degree=" << pipe.model.degree_m
            << " eigengap=" << format_double(pipe.index.eigengap) << " -> " << a.out << "\n";
  if (pipe.index.degenerate)
    std::cerr << "warning: degenerate final spectrum (gap < 1e-12); direction chosen by "
                 "canonical tie-break\n";
  return 0;
}

// --------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
  bool print_mse = false;
};

int run_predict(const PredictArgs& a) {
  const json mj = read_json_file(a.model);
  if (!mj.contains("model")) raise(errc::parse_error, "model file missing 'model' object");
  const PiecewiseModel model = model_from_json(mj.at("model"));

  const Dataset raw = read_dataset_csv_file(a.data);
  Dataset data = raw;
  if (mj.contains("standardization")) {
    const auto& st = mj.at("standardization");
    StandardizedDataset sd;
    sd.mean = st.at("mean").get<Vec>();
    const auto rows = st.at("whitener").get<std::vector<Vec>>();
    Vec flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    sd.whitener = SymMatrix(static_cast<int>(rows.size()), flat);
    sd.data = raw;  // only the transform matters here
    data = apply_standardization(sd, raw);
  }
  if (data.d() != static_cast<int>(model.direction.v_hat.size()))
    raise(errc::invalid_input, "model dimension does not match data");

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!a.out.empty() && a.out != "-") {
    file.open(a.out);
    if (!file) raise(errc::parse_error, "cannot open '" + a.out + "' for writing");
    out = &file;
  }
  *out << "prediction,y\n";
  double sse = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double p = predict(model, data.row(i), data.d());
    *out << format_double(p) << "," << format_double(data.y_at(i)) << "\n";
    sse += (p - data.y_at(i)) * (p - data.y_at(i));
  }
  if (a.print_mse) std::cout << "mse " << format_double(sse / data.n()) << "\n";
  return 0;
}

// --------------------------------------------------------------------------
// bench

json preset_index() {
  return json{{"settings", {"s1", "s2"}},
              {"functions", {"f1", "f2"}},
              {"noise_percents", {0.0, 0.01, 0.02}},
              {"methods", {"sir", "save", "svr"}},
              {"n_grid", {1000}},
              {"d", 2},
              {"replicates", 100}};
}

json preset_rate_index() {
  return json{{"dist", "gaussian"}, {"d", 10},
              {"function", "f2"},   {"noise_percents", {0.01}},
              {"methods", {"svr"}}, {"n_grid", {2500, 5000, 10000, 20000, 40000}},
              {"replicates", 10}};
}

json preset_rate_regression() {
  return json{{"dist", "gaussian"},
              {"function", "f3"},
              {"noise_percents", {0.05}},
              {"methods", {"svr", "knn"}},
              {"d_grid", {5, 10}},
              {"n_grid", {2500, 5000, 10000, 20000, 40000}},
              {"replicates", 10},
              {"knn_k", 0}};
}

json preset_heatmap() {
  json l = json::array();
  for (int i = 1; i <= 8; ++i) l.push_back(i);
  json jg = json::array();
  for (int i = 0; i <= 8; ++i) jg.push_back(i);
  return json{{"dist", "gaussian"},      {"d", 10},
              {"function", "f2"},        {"noise_percents", {0.01}},
              {"methods", {"svr"}},      {"n_grid", {250, 1000, 4000}},
              {"l_grid", l},             {"j_grid", jg},
              {"replicates", 50},        {"trim_fraction", 0.10}};
}

struct BenchArgs {
  std::string config;
  std::string target = "index_error";
  std::string out_csv = "results.csv";
  std::string out_manifest = "manifest.json";
  // overrides; only applied when the flag was passed
  CLI::App* cmd = nullptr;
  int threads = 0;
  int replicates = 0;
  std::uint64_t base_seed = 0;
  int test_n = 0;
  bool denoised = false;
  double trim_fraction = 0.0;
  std::string n_grid, l_grid, j_grid, d_grid, noise_percents, methods, settings, functions;
  std::string dist, function, mode;
  int d = 0;
  int knn_k = 0;
  int degree_m = -1;
};

void apply_override(json& cfg, const CLI::App* cmd, const std::string& flag, const char* key,
                    const json& value) {
  if (cmd->count(flag) > 0) cfg[key] = value;
}

json bench_config(const BenchArgs& a, const json& preset) {
  json cfg = preset;
  if (!a.config.empty()) {
    const json file_cfg = load_config_file(a.config);
    cfg.update(file_cfg);
  }
  const CLI::App* cmd = a.cmd;
  apply_override(cfg, cmd, "--threads", "threads", a.threads);
  apply_override(cfg, cmd, "--replicates", "replicates", a.replicates);
  apply_override(cfg, cmd, "--base-seed", "base_seed", a.base_seed);
  apply_override(cfg, cmd, "--test-n", "test_n", a.test_n);
  apply_override(cfg, cmd, "--denoised", "denoised", a.denoised);
  apply_override(cfg, cmd, "--trim", "trim_fraction", a.trim_fraction);
  apply_override(cfg, cmd, "--n-grid", "n_grid", a.n_grid.empty() ? json::array() : json(parse_int_list(a.n_grid)));
  apply_override(cfg, cmd, "--l-grid", "l_grid", a.l_grid.empty() ? json::array() : json(parse_int_list(a.l_grid)));
  apply_override(cfg, cmd, "--j-grid", "j_grid", a.j_grid.empty() ? json::array() : json(parse_int_list(a.j_grid)));
  apply_override(cfg, cmd, "--d-grid", "d_grid", a.d_grid.empty() ? json::array() : json(parse_int_list(a.d_grid)));
  apply_override(cfg, cmd, "--noise-percents", "noise_percents",
                 a.noise_percents.empty() ? json::array() : json(parse_double_list(a.noise_percents)));
  apply_override(cfg, cmd, "--methods", "methods", json(parse_string_list(a.methods)));
  apply_override(cfg, cmd, "--settings", "settings", json(parse_string_list(a.settings)));
  apply_override(cfg, cmd, "--functions", "functions", json(parse_string_list(a.functions)));
  apply_override(cfg, cmd, "--dist", "dist", a.dist);
  apply_override(cfg, cmd, "--function", "function", a.function);
  apply_override(cfg, cmd, "--mode", "mode", a.mode);
  apply_override(cfg, cmd, "--d", "d", a.d);
  apply_override(cfg, cmd, "--knn-k", "knn_k", a.knn_k);
  apply_override(cfg, cmd, "--degree", "degree_m", a.degree_m);
  cfg["out_csv"] = a.out_csv;
  cfg["out_manifest"] = a.out_manifest;
  return cfg;
}

int finish_bench(const ExperimentResult& result, const ExperimentConfig& cfg) {
  write_result_csv(cfg.out_csv, result);
  write_manifest_json(cfg.out_manifest, result);
  std::cout << result.rows.size() << " cells -> " << cfg.out_csv << " (manifest "
            << cfg.out_manifest << ", " << format_double(result.manifest["walltime_seconds"].get<double>())
            << " s)\n";
  if (result.manifest.contains("slopes"))
    for (const auto& s : result.manifest["slopes"])
      std::cout << "slope method=" << s["method"].get<std::string>() << " d=" << s["d"]
                << (s.contains("l") ? " l=" + s["l"].dump() : "") << ": " << s["slope"].dump()
                << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional regression for single-index models"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset CSV");
  simulate->add_option("--dist", sim.dist, "gaussian|s1|s2");
  simulate->add_option("--d", sim.d, "dimension (gaussian only)");
  simulate->add_option("--function", sim.function, "f1|f2|f3|linear|polynomial");
  simulate->add_option("--poly-coeffs", sim.poly_coeffs, "ascending coefficients, comma separated");
  simulate->add_option("--f3-seed", sim.f3_seed, "seed of the f3 realization");
  simulate->add_option("--v", sim.v_csv, "index direction, comma separated");
  simulate->add_option("--noise-percent", sim.noise_percent, "sigma as fraction of |f(-4)-f(4)|");
  simulate->add_option("--n", sim.n, "sample count")->required();
  simulate->add_option("--seed", sim.seed, "RNG seed");
  simulate->add_option("--out", sim.out, "output CSV path")->required();
  simulate->add_option("--truth", sim.truth, "sidecar JSON with ground truth");

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit an index direction and piecewise model");
  fit_cmd->add_option("--data", fit.data, "training CSV")->required();
  fit_cmd->add_option("--method", fit.method, "sir|save|svr");
  fit_cmd->add_option("--level", fit.level, "slicing level l (-1 = auto)");
  fit_cmd->add_option("--scale-j", fit.scale_j, "regression scale j (-1 = auto)");
  fit_cmd->add_option("--degree", fit.degree, "polynomial degree m");
  fit_cmd->add_option("--mode", fit.mode, "centered|uncentered local matrices");
  fit_cmd->add_option("--smoothness", fit.smoothness, "s in [1/2,2] for the auto scale");
  fit_cmd->add_option("--scale-b", fit.scale_b, "B constant for the auto scale");
  fit_cmd->add_option("--sigma-hint", fit.sigma_hint, "noise level for the auto level");
  fit_cmd->add_option("--interval-expand", fit.interval_expand, "widen I by this fraction per side");
  fit_cmd->add_flag("--filter", fit.filter, "enable the tail filter");
  fit_cmd->add_option("--cx", fit.cx, "filter constant C_X");
  fit_cmd->add_option("--cy", fit.cy, "filter constant C_Y");
  fit_cmd->add_option("--rel-tol", fit.rel_tol, "covariance degeneracy tolerance");
  fit_cmd->add_option("--out", fit.out, "output model JSON");

  PredictArgs pred;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Evaluate a fitted model on a CSV");
  predict_cmd->add_option("--model", pred.model, "model JSON from fit")->required();
  predict_cmd->add_option("--data", pred.data, "input CSV")->required();
  predict_cmd->add_option("--out", pred.out, "predictions CSV ('-' = stdout)");
  predict_cmd->add_flag("--mse", pred.print_mse, "print MSE against the y column");

  CLI::App* bench = app.add_subcommand("bench", "Monte Carlo benchmark runs");
  bench->require_subcommand(1);
  BenchArgs bi, br, bh;
  CLI::App* bench_index = bench->add_subcommand("index", "index-error benchmark table");
  CLI::App* bench_rate = bench->add_subcommand("rate", "convergence rate sweep");
  CLI::App* bench_heatmap = bench->add_subcommand("heatmap", "(l, j) MSE heatmap");
  bench_rate->add_option("--target", br.target, "index_error|regression_mse");
  for (auto [cmd, args] : {std::pair{bench_index, &bi}, {bench_rate, &br}, {bench_heatmap, &bh}}) {
    args->cmd = cmd;
    cmd->add_option("--config", args->config, "TOML or JSON config file");
    cmd->add_option("--out-csv", args->out_csv, "long-format results CSV");
    cmd->add_option("--out-manifest", args->out_manifest, "run manifest JSON");
    cmd->add_option("--threads", args->threads, "worker threads (0 = hardware)");
    cmd->add_option("--replicates", args->replicates, "Monte Carlo replicates per cell");
    cmd->add_option("--base-seed", args->base_seed, "base seed");
    cmd->add_option("--test-n", args->test_n, "test draw size");
    cmd->add_flag("--denoised", args->denoised, "MSE against noiseless truth");
    cmd->add_option("--trim", args->trim_fraction, "trimmed-mean fraction");
    cmd->add_option("--n-grid", args->n_grid, "comma separated n grid");
    cmd->add_option("--l-grid", args->l_grid, "comma separated l grid");
    cmd->add_option("--j-grid", args->j_grid, "comma separated j grid");
    cmd->add_option("--d-grid", args->d_grid, "comma separated d grid");
    cmd->add_option("--noise-percents", args->noise_percents, "comma separated noise fractions");
    cmd->add_option("--methods", args->methods, "comma separated methods");
    cmd->add_option("--settings", args->settings, "comma separated settings");
    cmd->add_option("--functions", args->functions, "comma separated functions");
    cmd->add_option("--dist", args->dist, "distribution");
    cmd->add_option("--function", args->function, "link function");
    cmd->add_option("--mode", args->mode, "centered|uncentered");
    cmd->add_option("--d", args->d, "dimension");
    cmd->add_option("--knn-k", args->knn_k, "kNN k (0 = CV, -1 = n^{2/(d+2)})");
    cmd->add_option("--degree", args->degree_m, "polynomial degree m");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (fit_cmd->parsed()) return run_fit(fit);
    if (predict_cmd->parsed()) return run_predict(pred);
    if (bench_index->parsed()) {
      const ExperimentConfig cfg = config_from_json(bench_config(bi, preset_index()));
      return finish_bench(run_index_benchmark(cfg), cfg);
    }
    if (bench_rate->parsed()) {
      const RateTarget target = rate_target_from_name(br.target);
      const json preset = target == RateTarget::index_error ? preset_rate_index()
                                                            : preset_rate_regression();
      const ExperimentConfig cfg = config_from_json(bench_config(br, preset));
      return finish_bench(run_rate_sweep(cfg, target), cfg);
    }
    if (bench_heatmap->parsed()) {
      const ExperimentConfig cfg = config_from_json(bench_config(bh, preset_heatmap()));
      return finish_bench(run_heatmap(cfg), cfg);
    }
  } catch (const sindex::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_class();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
