#pragma once

#include <string>
#include <vector>

#include "sindex/slicing.hpp"

namespace sindex {

enum class Method { sir, save, svr };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

// Which per-bin matrix feeds the local PCA: the centered covariance, or the
// uncentered second moment.
enum class CovarianceMode { centered, uncentered };

struct IndexEstimate {
  Vec v_hat;                 // unit norm, canonical sign
  Method method = Method::svr;
  int level = 0;
  double eigengap = 0.0;     // gap of the final eigenproblem
  int admissible_count = 0;  // bins that contributed
  bool degenerate = false;   // final gap below 1e-12
};

struct LocalDirection {
  int bin = 0;
  Vec v_local;  // unit norm
  int weight = 0;
  double eigengap = 0.0;
  bool degenerate = false;
};

struct EstimatorOptions {
  CovarianceMode mode = CovarianceMode::centered;
  // SIR/SAVE sum over all nonempty bins by default; setting this restricts
  // them to the admissible set as well (ablation flag).
  bool restrict_moment_methods_to_admissible = false;
};

// Top eigenvector of M_l = sum_h mu_h mu_h^T (#C_h / n).
IndexEstimate sir(const SlicedStats& stats, int n, const EstimatorOptions& opt = {});

// Top eigenvector of S_l = sum_h (I - Cov_h)^2 (#C_h / n).
IndexEstimate save(const SlicedStats& stats, int n, const EstimatorOptions& opt = {});

// Smallest eigenvector of the selected per-bin matrix.
LocalDirection svr_local(const SlicedStats& stats, int h,
                         CovarianceMode mode = CovarianceMode::centered);

// Top eigenvector of V_l = (sum_{h in H} v_h v_h^T #C_h) / (sum_{h in H} #C_h).
IndexEstimate svr(const SlicedStats& stats, const AdmissibleSet& adm,
                  CovarianceMode mode = CovarianceMode::centered);

// Sign-aligned distance min(||v1 - v2||, ||v1 + v2||).
double index_error(const Vec& v_hat, const Vec& v_true);

}  // namespace sindex
