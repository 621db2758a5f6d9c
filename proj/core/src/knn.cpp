#include "sindex/knn.hpp"

#include <algorithm>
#include <cmath>

#include "sindex/error.hpp"

namespace sindex {

namespace {

double sq_dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

// Neighbors ordered by (distance, response); exact duplicates are
// interchangeable in the mean, so this makes predictions independent of the
// training row order.
struct Neighbor {
  double dist;
  double y;
  bool operator<(const Neighbor& o) const {
    if (dist != o.dist) return dist < o.dist;
    return y < o.y;
  }
};

double mean_of_k_nearest(std::vector<Neighbor>& cand, int k) {
  const int kk = std::min<int>(k, static_cast<int>(cand.size()));
  std::nth_element(cand.begin(), cand.begin() + (kk - 1), cand.end());
  std::sort(cand.begin(), cand.begin() + kk);
  double s = 0.0;
  for (int i = 0; i < kk; ++i) s += cand[i].y;
  return s / kk;
}

}  // namespace

KnnModel knn_fit(const Dataset& ds, std::optional<int> k) {
  if (ds.n() < 1) raise(errc::empty_dataset, "empty training set");
  KnnModel model;
  model.train = ds;
  if (k) {
    if (*k < 1 || *k > ds.n()) raise(errc::invalid_input, "k out of range [1, n]");
    model.k = *k;
    return model;
  }

  const int n = ds.n(), d = ds.d();
  std::vector<int> grid;
  for (int kk = 1; kk <= n; kk *= 2) grid.push_back(kk);

  std::vector<double> sse(grid.size(), 0.0);
  std::vector<Neighbor> cand;
  for (int i = 0; i < n; ++i) {
    const int fold = i % 5;
    cand.clear();
    for (int j = 0; j < n; ++j)
      if (j % 5 != fold) cand.push_back({sq_dist(ds.row(i), ds.row(j), d), ds.y_at(j)});
    if (cand.empty()) continue;
    std::sort(cand.begin(), cand.end());
    // Prefix means give every k in the grid from one sorted pass.
    double prefix = 0.0;
    std::size_t at = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::size_t kk = std::min<std::size_t>(grid[g], cand.size());
      while (at < kk) prefix += cand[at++].y;
      const double e = prefix / kk - ds.y_at(i);
      sse[g] += e * e;
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (sse[g] < sse[best]) best = g;
  model.k = grid[best];
  return model;
}

double knn_predict(const KnnModel& model, const double* x, int d) {
  if (d != model.train.d()) raise(errc::invalid_input, "query dimension mismatch");
  std::vector<Neighbor> cand(model.train.n());
  for (int j = 0; j < model.train.n(); ++j)
    cand[j] = {sq_dist(x, model.train.row(j), d), model.train.y_at(j)};
  return mean_of_k_nearest(cand, model.k);
}

double knn_predict(const KnnModel& model, const Vec& x) {
  return knn_predict(model, x.data(), static_cast<int>(x.size()));
}

double mse(const KnnModel& model, const Dataset& test, const Vec* truth) {
  if (test.n() < 1) raise(errc::invalid_input, "empty test set");
  double acc = 0.0;
  for (int i = 0; i < test.n(); ++i) {
    const double target = truth ? (*truth)[i] : test.y_at(i);
    const double e = knn_predict(model, test.row(i), test.d()) - target;
    acc += e * e;
  }
  return acc / test.n();
}

}  // namespace sindex
