#pragma once

#include <optional>
#include <vector>

#include "sindex/dataset.hpp"
#include "sindex/linalg.hpp"

namespace sindex {

// Dyadic partition of [a,b] at level l: 2^l bins of equal width, half-open
// except the last, which is right-closed so the bins tile [a,b] exactly.
struct DyadicPartition {
  double a = 0.0;
  double b = 0.0;
  int level = 0;

  int bin_count() const { return 1 << level; }
  double width() const { return (b - a) / bin_count(); }
  double lo(int h) const { return a + (b - a) * h / bin_count(); }
  double hi(int h) const { return a + (b - a) * (h + 1) / bin_count(); }
};

struct Interval {
  double a = 0.0;
  double b = 0.0;
};

DyadicPartition build_partition(const Vec& y, int level, std::optional<Interval> s_override = {});

// Bin index for y, or nullopt when y lies outside [a,b]. y == b maps into the
// last bin.
std::optional<int> assign(const DyadicPartition& p, double y);

struct SlicedStats {
  DyadicPartition partition;
  std::vector<int> counts;               // #C_{l,h}
  std::vector<Vec> means;                // per-bin sample means
  std::vector<SymMatrix> covariances;    // centered, biased 1/#C
  std::vector<SymMatrix> second_moments; // uncentered, (1/#C) sum x x^T
  int total_in_s = 0;

  bool empty_bin(int h) const { return counts[h] == 0; }
};

// Per-bin count, mean, centered covariance and uncentered second moment.
// Bins may run concurrently upstream; per-bin accumulation is in canonical
// sample order, so the output is independent of processing order.
SlicedStats slice_stats(const StandardizedDataset& sd, const DyadicPartition& p);

struct AdmissibleSet {
  int level = 0;
  std::vector<int> indices;  // H_l: bins with counts[h] >= 2^{-l} n
};

AdmissibleSet admissible_bins(const SlicedStats& stats, int n);

}  // namespace sindex
