#pragma once

#include <optional>

#include "sindex/dataset.hpp"

namespace sindex {

// Brute-force k-nearest-neighbor regression on the full d-dimensional X.
struct KnnModel {
  Dataset train;
  int k = 1;
};

// When k is absent it is chosen by 5-fold cross-validation (fold = index mod
// 5) over {1, 2, 4, ..., 2^floor(log2 n)}; ties go to the smaller k.
KnnModel knn_fit(const Dataset& ds, std::optional<int> k = {});

double knn_predict(const KnnModel& model, const double* x, int d);
double knn_predict(const KnnModel& model, const Vec& x);

double mse(const KnnModel& model, const Dataset& test, const Vec* truth = nullptr);

}  // namespace sindex
