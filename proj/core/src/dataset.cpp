#include "sindex/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sindex/error.hpp"

namespace sindex {

Dataset::Dataset(int n, int d, Vec x, Vec y) : n_(n), d_(d), x_(std::move(x)), y_(std::move(y)) {
  if (n_ < 1 || d_ < 1) raise(errc::invalid_input, "dataset needs n >= 1 and d >= 1");
  if (x_.size() != static_cast<std::size_t>(n_) * d_ || y_.size() != static_cast<std::size_t>(n_))
    raise(errc::invalid_input, "dataset size mismatch");
  for (double v : x_)
    if (!std::isfinite(v)) raise(errc::invalid_input, "non-finite predictor entry");
  for (double v : y_)
    if (!std::isfinite(v)) raise(errc::invalid_input, "non-finite response entry");
}

Vec Dataset::row_vec(int i) const {
  return Vec(row(i), row(i) + d_);
}

StandardizedDataset StandardizedDataset::wrap(const Dataset& ds) {
  StandardizedDataset sd;
  sd.data = ds;
  sd.mean.assign(ds.d(), 0.0);
  sd.whitener = SymMatrix::identity(ds.d());
  sd.kept.resize(ds.n());
  std::iota(sd.kept.begin(), sd.kept.end(), 0);
  return sd;
}

std::vector<int> canonical_order(const Dataset& ds) {
  std::vector<int> idx(ds.n());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (ds.y_at(a) != ds.y_at(b)) return ds.y_at(a) < ds.y_at(b);
    const double* ra = ds.row(a);
    const double* rb = ds.row(b);
    for (int j = 0; j < ds.d(); ++j)
      if (ra[j] != rb[j]) return ra[j] < rb[j];
    return a < b;
  });
  return idx;
}

StandardizedDataset standardize(const Dataset& ds, double rel_tol) {
  const int n = ds.n(), d = ds.d();
  if (n <= d) raise(errc::invalid_input, "standardize needs n > d");

  const std::vector<int> order = canonical_order(ds);

  Vec mean(d, 0.0);
  for (int i : order) {
    const double* r = ds.row(i);
    for (int j = 0; j < d; ++j) mean[j] += r[j];
  }
  for (double& m : mean) m /= n;

  // Biased 1/n covariance, two-pass, canonical order.
  SymMatrix cov(d);
  Vec centered(d);
  for (int i : order) {
    const double* r = ds.row(i);
    for (int j = 0; j < d; ++j) centered[j] = r[j] - mean[j];
    cov.add_outer(centered, 1.0);
  }
  cov.scale(1.0 / n);

  const SymMatrix w = inv_sqrt(cov, rel_tol);

  Vec xw(static_cast<std::size_t>(n) * d);
  for (int i = 0; i < n; ++i) {
    const double* r = ds.row(i);
    for (int j = 0; j < d; ++j) centered[j] = r[j] - mean[j];
    const Vec t = w.apply(centered);
    std::copy(t.begin(), t.end(), xw.begin() + static_cast<std::size_t>(i) * d);
  }

  StandardizedDataset out;
  out.data = Dataset(n, d, std::move(xw), ds.y());
  out.mean = std::move(mean);
  out.whitener = w;
  out.kept.resize(n);
  std::iota(out.kept.begin(), out.kept.end(), 0);
  return out;
}

StandardizedDataset filter_samples(const StandardizedDataset& sd, const FilterConfig& cfg) {
  if (!cfg.enabled) return sd;
  if (!(cfg.c_x > 0.0) || !(cfg.c_y > 0.0)) raise(errc::invalid_input, "filter thresholds must be positive");

  const Dataset& ds = sd.data;
  const int n = ds.n(), d = ds.d();

  const std::vector<int> order = canonical_order(ds);
  double y_mean = 0.0;
  for (int i : order) y_mean += ds.y_at(i);
  y_mean /= n;
  double y_var = 0.0;
  for (int i : order) y_var += (ds.y_at(i) - y_mean) * (ds.y_at(i) - y_mean);
  const double y_sd = std::sqrt(y_var / n);

  // Post-whitening the per-coordinate scale is 1, so R_X = 1 and the X bound
  // is c_x sqrt(d); the Y bound uses the sample standard deviation.
  const double x_bound = cfg.c_x * std::sqrt(static_cast<double>(d));
  const double y_bound = cfg.c_y * y_sd;

  std::vector<int> keep_local;
  for (int i = 0; i < n; ++i) {
    const double xn = norm2(ds.row_vec(i));
    if (xn <= x_bound && std::abs(ds.y_at(i) - y_mean) <= y_bound) keep_local.push_back(i);
  }
  if (keep_local.empty()) raise(errc::empty_dataset, "filter removed every sample");
  if (keep_local.size() == static_cast<std::size_t>(n)) return sd;

  const int m = static_cast<int>(keep_local.size());
  Vec x(static_cast<std::size_t>(m) * d);
  Vec y(m);
  std::vector<int> kept(m);
  for (int i = 0; i < m; ++i) {
    const int src = keep_local[i];
    std::copy(ds.row(src), ds.row(src) + d, x.begin() + static_cast<std::size_t>(i) * d);
    y[i] = ds.y_at(src);
    kept[i] = sd.kept[src];
  }

  StandardizedDataset out;
  out.data = Dataset(m, d, std::move(x), std::move(y));
  out.mean = sd.mean;
  out.whitener = sd.whitener;
  out.kept = std::move(kept);
  return out;
}

Vec back_map_direction(const StandardizedDataset& sd, const Vec& v_white) {
  return normalized(sd.whitener.apply(v_white));
}

Vec to_whitened_direction(const StandardizedDataset& sd, const Vec& v_orig) {
  const EigenDecomposition e = sym_eigen(sd.whitener);
  Vec out(v_orig.size(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double c = dot(e.eigenvectors[k], v_orig) / e.eigenvalues[k];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c * e.eigenvectors[k][i];
  }
  return normalized(out);
}

}  // namespace sindex
