#include "sindex/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sindex/error.hpp"

namespace sindex {

const char* method_name(Method m) {
  switch (m) {
    case Method::sir: return "sir";
    case Method::save: return "save";
    case Method::svr: return "svr";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "sir" || name == "SIR") return Method::sir;
  if (name == "save" || name == "SAVE") return Method::save;
  if (name == "svr" || name == "SVR") return Method::svr;
  raise(errc::invalid_input, "unknown method '" + name + "'");
}

namespace {

IndexEstimate top_eigenvector_estimate(const SymMatrix& m, Method method, int level, int bins_used) {
  const EigenDecomposition e = sym_eigen(m);
  IndexEstimate out;
  out.v_hat = e.eigenvectors[0];
  out.method = method;
  out.level = level;
  out.eigengap = (m.dim() >= 2) ? e.eigenvalues[0] - e.eigenvalues[1] : 1.0;
  out.admissible_count = bins_used;
  out.degenerate = out.eigengap < 1e-12;
  return out;
}

std::vector<int> moment_bins(const SlicedStats& stats, int n, const EstimatorOptions& opt) {
  std::vector<int> hs;
  if (opt.restrict_moment_methods_to_admissible) {
    hs = admissible_bins(stats, n).indices;
  } else {
    for (int h = 0; h < stats.partition.bin_count(); ++h)
      if (stats.counts[h] > 0) hs.push_back(h);
  }
  if (hs.empty()) raise(errc::no_admissible_bins, "all bins empty");
  return hs;
}

}  // namespace

IndexEstimate sir(const SlicedStats& stats, int n, const EstimatorOptions& opt) {
  const std::vector<int> hs = moment_bins(stats, n, opt);
  const int d = static_cast<int>(stats.means[hs.front()].size());
  SymMatrix m(d);
  for (int h : hs) m.add_outer(stats.means[h], static_cast<double>(stats.counts[h]) / n);
  return top_eigenvector_estimate(m, Method::sir, stats.partition.level,
                                  static_cast<int>(hs.size()));
}

IndexEstimate save(const SlicedStats& stats, int n, const EstimatorOptions& opt) {
  const std::vector<int> hs = moment_bins(stats, n, opt);
  const int d = static_cast<int>(stats.means[hs.front()].size());
  SymMatrix m(d);
  SymMatrix diff(d);
  for (int h : hs) {
    const SymMatrix& cov =
        (opt.mode == CovarianceMode::centered) ? stats.covariances[h] : stats.second_moments[h];
    // (I - cov)^2, accumulated with weight #C_h / n
    diff = SymMatrix::identity(d);
    diff.add_scaled(cov, -1.0);
    const double w = static_cast<double>(stats.counts[h]) / n;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += diff(i, k) * diff(k, j);
        m.at(i, j) += w * s;
        if (j != i) m.at(j, i) += w * s;
      }
  }
  return top_eigenvector_estimate(m, Method::save, stats.partition.level,
                                  static_cast<int>(hs.size()));
}

LocalDirection svr_local(const SlicedStats& stats, int h, CovarianceMode mode) {
  const int need = (mode == CovarianceMode::centered) ? 2 : 1;
  if (h < 0 || h >= stats.partition.bin_count()) raise(errc::invalid_input, "bin out of range");
  if (stats.counts[h] < need)
    raise(errc::bin_too_small, "bin " + std::to_string(h) + " has " +
                                   std::to_string(stats.counts[h]) + " samples, needs " +
                                   std::to_string(need));
  const SymMatrix& m =
      (mode == CovarianceMode::centered) ? stats.covariances[h] : stats.second_moments[h];
  const SmallestEigenvector se = smallest_eigenvector(m);
  LocalDirection out;
  out.bin = h;
  out.v_local = se.v;
  out.weight = stats.counts[h];
  out.eigengap = se.gap;
  out.degenerate = se.degenerate;
  return out;
}

IndexEstimate svr(const SlicedStats& stats, const AdmissibleSet& adm, CovarianceMode mode) {
  if (adm.indices.empty()) raise(errc::no_admissible_bins, "admissible set is empty");
  const int d = stats.means.front().empty() ? stats.covariances.front().dim()
                                            : static_cast<int>(stats.means.front().size());
  SymMatrix m(d);
  long long total_weight = 0;
  for (int h : adm.indices) {
    const LocalDirection loc = svr_local(stats, h, mode);
    m.add_outer(loc.v_local, static_cast<double>(loc.weight));
    total_weight += loc.weight;
  }
  m.scale(1.0 / static_cast<double>(total_weight));
  return top_eigenvector_estimate(m, Method::svr, stats.partition.level,
                                  static_cast<int>(adm.indices.size()));
}

double index_error(const Vec& v_hat, const Vec& v_true) {
  double dm = 0.0, dp = 0.0;
  for (std::size_t i = 0; i < v_hat.size(); ++i) {
    dm += (v_hat[i] - v_true[i]) * (v_hat[i] - v_true[i]);
    dp += (v_hat[i] + v_true[i]) * (v_hat[i] + v_true[i]);
  }
  return std::sqrt(std::min(dm, dp));
}

}  // namespace sindex
