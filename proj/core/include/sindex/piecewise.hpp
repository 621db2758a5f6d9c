#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "sindex/dataset.hpp"
#include "sindex/estimators.hpp"
#include "sindex/slicing.hpp"

namespace sindex {

// Dyadic piecewise polynomial of <v_hat, x> on the interval I at scale j.
// Evaluation outside I is exactly 0. Empty bins inherit the fit of their
// nearest nonempty ancestor bin; `fallback_from[h]` records that ancestor's
// scale, or -1 for bins fitted on their own samples.
struct PiecewiseModel {
  Interval interval;
  int scale_j = 0;
  int degree_m = 0;
  std::vector<Vec> coeffs;        // 2^j vectors, ascending power, length m+1
  std::vector<char> bin_nonempty;
  std::vector<int> fallback_from;
  IndexEstimate direction;

  int bin_count() const { return 1 << scale_j; }
};

PiecewiseModel fit_piecewise(const StandardizedDataset& sd, const IndexEstimate& v_hat,
                             int scale_j, int degree_m, std::optional<Interval> i_override = {});

double predict(const PiecewiseModel& model, const double* x, int d);
double predict(const PiecewiseModel& model, const Vec& x);

// Theorem-guided scale: j = round(log2((n/log n)^{1/(2s+1)} / sqrt(b))),
// clamped to [0, floor(log2 n)].
int recommended_scale_j(int n, double smoothness_s, double b);

// Mean squared prediction error over a test set, against the observed
// responses or, when `truth` is given, against noiseless function values.
double mse(const PiecewiseModel& model, const Dataset& test, const Vec* truth = nullptr);

nlohmann::json model_to_json(const PiecewiseModel& model);
PiecewiseModel model_from_json(const nlohmann::json& j);

}  // namespace sindex
