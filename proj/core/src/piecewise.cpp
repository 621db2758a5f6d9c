#include "sindex/piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "sindex/error.hpp"

namespace sindex {

namespace {

int bin_of(const Interval& iv, int level, double t) {
  const int bins = 1 << level;
  int h = static_cast<int>(std::floor((t - iv.a) / (iv.b - iv.a) * bins));
  if (h >= bins) h = bins - 1;
  return h;
}

}  // namespace

PiecewiseModel fit_piecewise(const StandardizedDataset& sd, const IndexEstimate& v_hat,
                             int scale_j, int degree_m, std::optional<Interval> i_override) {
  if (scale_j < 0) raise(errc::invalid_input, "negative scale");
  if (degree_m < 0) raise(errc::invalid_input, "negative degree");
  const Dataset& ds = sd.data;
  const int n = ds.n();

  Vec t(n);
  for (int i = 0; i < n; ++i) t[i] = dot(v_hat.v_hat, ds.row_vec(i));

  Interval iv;
  if (i_override) {
    iv = *i_override;
  } else {
    const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    iv = {*lo, *hi};
  }
  if (!(iv.b > iv.a)) raise(errc::invalid_interval, "degenerate projection interval");

  // In-interval samples in canonical (t, y) order; all per-bin accumulation
  // below inherits that order.
  std::vector<std::pair<double, double>> samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i)
    if (t[i] >= iv.a && t[i] <= iv.b) samples.emplace_back(t[i], ds.y_at(i));
  if (samples.empty()) raise(errc::empty_dataset, "no sample projects into the interval");
  std::sort(samples.begin(), samples.end());

  PiecewiseModel model;
  model.interval = iv;
  model.scale_j = scale_j;
  model.degree_m = degree_m;
  model.direction = v_hat;
  const int bins = model.bin_count();
  model.coeffs.assign(bins, Vec());
  model.bin_nonempty.assign(bins, 0);
  model.fallback_from.assign(bins, -1);

  std::vector<std::vector<int>> members(bins);
  for (int i = 0; i < static_cast<int>(samples.size()); ++i)
    members[bin_of(iv, scale_j, samples[i].first)].push_back(i);

  Vec ts, ys;
  for (int h = 0; h < bins; ++h) {
    if (members[h].empty()) continue;
    ts.clear();
    ys.clear();
    for (int i : members[h]) {
      ts.push_back(samples[i].first);
      ys.push_back(samples[i].second);
    }
    model.coeffs[h] = polyfit_ls(ts, ys, degree_m);
    model.bin_nonempty[h] = 1;
  }

  // Empty bins take the fit of the nearest nonempty ancestor interval.
  std::map<std::pair<int, int>, Vec> ancestor_cache;
  for (int h = 0; h < bins; ++h) {
    if (model.bin_nonempty[h]) continue;
    for (int level = scale_j - 1; level >= 0; --level) {
      const int k = h >> (scale_j - level);
      const double lo = iv.a + (iv.b - iv.a) * k / (1 << level);
      const double hi = iv.a + (iv.b - iv.a) * (k + 1) / (1 << level);
      const bool last = (k == (1 << level) - 1);
      const auto key = std::make_pair(level, k);
      auto it = ancestor_cache.find(key);
      if (it == ancestor_cache.end()) {
        ts.clear();
        ys.clear();
        for (const auto& [tv, yv] : samples) {
          if (tv >= lo && (tv < hi || (last && tv <= hi))) {
            ts.push_back(tv);
            ys.push_back(yv);
          }
        }
        if (ts.empty()) continue;
        it = ancestor_cache.emplace(key, polyfit_ls(ts, ys, degree_m)).first;
      }
      model.coeffs[h] = it->second;
      model.fallback_from[h] = level;
      break;
    }
    if (model.coeffs[h].empty())
      raise(errc::numerical_failure, "no populated ancestor for bin " + std::to_string(h));
  }
  return model;
}

double predict(const PiecewiseModel& model, const double* x, int d) {
  double t = 0.0;
  for (int j = 0; j < d; ++j) t += model.direction.v_hat[j] * x[j];
  if (t < model.interval.a || t > model.interval.b) return 0.0;
  return polyval(model.coeffs[bin_of(model.interval, model.scale_j, t)], t);
}

double predict(const PiecewiseModel& model, const Vec& x) {
  return predict(model, x.data(), static_cast<int>(x.size()));
}

int recommended_scale_j(int n, double smoothness_s, double b) {
  if (n < 2) raise(errc::invalid_input, "need n >= 2");
  if (smoothness_s <= 0.0 || b < 1.0) raise(errc::invalid_input, "bad scale parameters");
  const double target = std::pow(n / std::log(static_cast<double>(n)), 1.0 / (2.0 * smoothness_s + 1.0)) / std::sqrt(b);
  const int j = static_cast<int>(std::lround(std::log2(target)));
  const int jmax = static_cast<int>(std::floor(std::log2(static_cast<double>(n))));
  return std::clamp(j, 0, jmax);
}

double mse(const PiecewiseModel& model, const Dataset& test, const Vec* truth) {
  if (test.n() < 1) raise(errc::invalid_input, "empty test set");
  double acc = 0.0;
  for (int i = 0; i < test.n(); ++i) {
    const double target = truth ? (*truth)[i] : test.y_at(i);
    const double e = predict(model, test.row(i), test.d()) - target;
    acc += e * e;
  }
  return acc / test.n();
}

nlohmann::json model_to_json(const PiecewiseModel& model) {
  nlohmann::json j;
  j["direction"] = model.direction.v_hat;
  j["method"] = method_name(model.direction.method);
  j["level_l"] = model.direction.level;
  j["interval_i"] = {model.interval.a, model.interval.b};
  j["scale_j"] = model.scale_j;
  j["degree_m"] = model.degree_m;
  j["coeffs"] = model.coeffs;
  j["bin_nonempty"] = nlohmann::json::array();
  for (char c : model.bin_nonempty) j["bin_nonempty"].push_back(c != 0);
  nlohmann::json fb = nlohmann::json::object();
  for (int h = 0; h < model.bin_count(); ++h)
    if (model.fallback_from[h] >= 0) fb[std::to_string(h)] = model.fallback_from[h];
  j["fallback"] = fb;
  j["diagnostics"] = {{"eigengap", model.direction.eigengap},
                      {"admissible_bins", model.direction.admissible_count},
                      {"degenerate", model.direction.degenerate}};
  return j;
}

PiecewiseModel model_from_json(const nlohmann::json& j) {
  PiecewiseModel m;
  m.direction.v_hat = j.at("direction").get<Vec>();
  m.direction.method = method_from_name(j.at("method").get<std::string>());
  m.direction.level = j.at("level_l").get<int>();
  m.interval.a = j.at("interval_i").at(0).get<double>();
  m.interval.b = j.at("interval_i").at(1).get<double>();
  m.scale_j = j.at("scale_j").get<int>();
  m.degree_m = j.at("degree_m").get<int>();
  m.coeffs = j.at("coeffs").get<std::vector<Vec>>();
  if (static_cast<int>(m.coeffs.size()) != m.bin_count())
    raise(errc::parse_error, "model has wrong number of coefficient slots");
  m.bin_nonempty.assign(m.bin_count(), 1);
  if (j.contains("bin_nonempty")) {
    const auto flags = j.at("bin_nonempty").get<std::vector<bool>>();
    for (int h = 0; h < m.bin_count() && h < static_cast<int>(flags.size()); ++h)
      m.bin_nonempty[h] = flags[h] ? 1 : 0;
  }
  m.fallback_from.assign(m.bin_count(), -1);
  if (j.contains("fallback"))
    for (const auto& [key, val] : j.at("fallback").items())
      m.fallback_from[std::stoi(key)] = val.get<int>();
  if (j.contains("diagnostics")) {
    const auto& d = j.at("diagnostics");
    m.direction.eigengap = d.value("eigengap", 0.0);
    m.direction.admissible_count = d.value("admissible_bins", 0);
    m.direction.degenerate = d.value("degenerate", false);
  }
  return m;
}

}  // namespace sindex
