#include "sindex/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sindex/error.hpp"

namespace sindex {

DyadicPartition build_partition(const Vec& y, int level, std::optional<Interval> s_override) {
  if (level < 0) raise(errc::invalid_input, "negative level");
  DyadicPartition p;
  p.level = level;
  if (s_override) {
    p.a = s_override->a;
    p.b = s_override->b;
  } else {
    if (y.empty()) raise(errc::invalid_input, "empty response vector and no interval override");
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    p.a = *lo;
    p.b = *hi;
  }
  if (!(p.b > p.a))
    raise(errc::invalid_interval,
          "degenerate interval [" + std::to_string(p.a) + "," + std::to_string(p.b) + "]");
  return p;
}

std::optional<int> assign(const DyadicPartition& p, double y) {
  if (y < p.a || y > p.b) return std::nullopt;
  const int bins = p.bin_count();
  int h = static_cast<int>(std::floor((y - p.a) / (p.b - p.a) * bins));
  if (h >= bins) h = bins - 1;  // y == b
  return h;
}

SlicedStats slice_stats(const StandardizedDataset& sd, const DyadicPartition& p) {
  const Dataset& ds = sd.data;
  const int d = ds.d();
  const int bins = p.bin_count();

  SlicedStats out;
  out.partition = p;
  out.counts.assign(bins, 0);
  out.means.assign(bins, Vec(d, 0.0));
  out.covariances.assign(bins, SymMatrix(d));
  out.second_moments.assign(bins, SymMatrix(d));

  // Bucket in canonical order so per-bin sums have a fixed summation order.
  std::vector<std::vector<int>> buckets(bins);
  for (int i : canonical_order(ds)) {
    if (const auto h = assign(p, ds.y_at(i))) {
      buckets[*h].push_back(i);
      ++out.total_in_s;
    }
  }

  Vec centered(d), raw(d);
  for (int h = 0; h < bins; ++h) {
    const auto& members = buckets[h];
    out.counts[h] = static_cast<int>(members.size());
    if (members.empty()) continue;
    Vec& mu = out.means[h];
    for (int i : members) {
      const double* r = ds.row(i);
      for (int j = 0; j < d; ++j) mu[j] += r[j];
    }
    for (double& m : mu) m /= members.size();
    SymMatrix& cov = out.covariances[h];
    SymMatrix& mom = out.second_moments[h];
    for (int i : members) {
      const double* r = ds.row(i);
      for (int j = 0; j < d; ++j) {
        centered[j] = r[j] - mu[j];
        raw[j] = r[j];
      }
      cov.add_outer(centered, 1.0);
      mom.add_outer(raw, 1.0);
    }
    cov.scale(1.0 / members.size());
    mom.scale(1.0 / members.size());
  }
  return out;
}

AdmissibleSet admissible_bins(const SlicedStats& stats, int n) {
  const int bins = stats.partition.bin_count();
  const double threshold = std::ldexp(static_cast<double>(n), -stats.partition.level);  // 2^-l n
  AdmissibleSet out;
  out.level = stats.partition.level;
  for (int h = 0; h < bins; ++h)
    if (stats.counts[h] >= threshold) out.indices.push_back(h);
  if (out.indices.empty())
    raise(errc::no_admissible_bins, "no bin reaches 2^-l n = " + std::to_string(threshold) +
                                        " samples; level too fine for n");
  return out;
}

}  // namespace sindex
