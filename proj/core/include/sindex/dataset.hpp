#pragma once

#include <cstddef>
#include <vector>

#include "sindex/linalg.hpp"

namespace sindex {

// Immutable sample container: x is n x d row-major, y has n entries.
class Dataset {
 public:
  Dataset() = default;
  Dataset(int n, int d, Vec x, Vec y);

  int n() const { return n_; }
  int d() const { return d_; }
  const Vec& x() const { return x_; }
  const Vec& y() const { return y_; }
  const double* row(int i) const { return x_.data() + static_cast<std::size_t>(i) * d_; }
  Vec row_vec(int i) const;
  double y_at(int i) const { return y_[i]; }

 private:
  int n_ = 0, d_ = 0;
  Vec x_;
  Vec y_;
};

struct StandardizedDataset {
  Dataset data;        // whitened samples, y untouched
  Vec mean;            // sample mean of the original x
  SymMatrix whitener;  // W with W Cov W = I; transform is x -> W (x - mean)
  std::vector<int> kept;  // indices into the original dataset (after filtering)

  // Wraps a dataset without transforming it (mean 0, whitener = I). Used when
  // the caller wants the estimator machinery on raw coordinates.
  static StandardizedDataset wrap(const Dataset& ds);
};

struct FilterConfig {
  double c_x = 4.0;
  double c_y = 4.0;
  bool enabled = false;
};

// Whitens to empirical mean 0 and covariance I (biased 1/n covariance).
// Accumulation runs in a canonical sample order so the result is bit-identical
// under row permutations. Requires n > d.
StandardizedDataset standardize(const Dataset& ds, double rel_tol = 1e-10);

// Tail filter on standardized data: keeps samples with
// ||X_i|| <= c_x sqrt(d) and |Y_i - mean(Y)| <= c_y sd(Y). No-op when disabled.
StandardizedDataset filter_samples(const StandardizedDataset& sd, const FilterConfig& cfg);

// Index direction expressed in original data coordinates: normalize(W v).
Vec back_map_direction(const StandardizedDataset& sd, const Vec& v_white);

// The converse map: a direction v in original coordinates corresponds to
// normalize(W^{-1} v) in whitened coordinates.
Vec to_whitened_direction(const StandardizedDataset& sd, const Vec& v_orig);

// Canonical sample ordering: indices sorted by (y, x lexicographic). All
// statistics in this library accumulate in this order, which makes every
// downstream estimate bit-identical under permutations of the input rows.
std::vector<int> canonical_order(const Dataset& ds);

}  // namespace sindex
