#include "sindex/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sindex/error.hpp"

namespace sindex {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec normalized(const Vec& a) {
  const double n = norm2(a);
  if (n == 0.0 || !std::isfinite(n)) raise(errc::numerical_failure, "cannot normalize zero vector");
  Vec out(a);
  for (double& x : out) x /= n;
  return out;
}

SymMatrix::SymMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {}

SymMatrix::SymMatrix(int dim, Vec entries) : dim_(dim), a_(std::move(entries)) {
  if (dim <= 0 || a_.size() != static_cast<std::size_t>(dim) * dim)
    raise(errc::invalid_input, "matrix size mismatch");
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double x = (*this)(i, j), y = (*this)(j, i);
      if (!std::isfinite(x) || !std::isfinite(y))
        raise(errc::invalid_input, "non-finite matrix entry");
      if (std::abs(x - y) > 1e-12 * std::max(1.0, std::abs(x)))
        raise(errc::invalid_input, "matrix not symmetric at (" + std::to_string(i) + "," +
                                       std::to_string(j) + ")");
    }
  }
}

SymMatrix SymMatrix::identity(int dim) {
  SymMatrix m(dim);
  for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
  return m;
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
  SymMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.dim(); ++i) m.at(i, i) = d[i];
  return m;
}

Vec SymMatrix::apply(const Vec& x) const {
  Vec y(dim_, 0.0);
  for (int i = 0; i < dim_; ++i) {
    double s = 0.0;
    const double* row = a_.data() + static_cast<std::size_t>(i) * dim_;
    for (int j = 0; j < dim_; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

double SymMatrix::frobenius() const {
  double s = 0.0;
  for (double x : a_) s += x * x;
  return std::sqrt(s);
}

SymMatrix& SymMatrix::add_scaled(const SymMatrix& other, double factor) {
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += factor * other.a_[i];
  return *this;
}

SymMatrix& SymMatrix::add_outer(const Vec& v, double factor) {
  for (int i = 0; i < dim_; ++i) {
    const double vi = factor * v[i];
    double* row = a_.data() + static_cast<std::size_t>(i) * dim_;
    for (int j = 0; j < dim_; ++j) row[j] += vi * v[j];
  }
  return *this;
}

void SymMatrix::scale(double factor) {
  for (double& x : a_) x *= factor;
}

double spectral_norm(const SymMatrix& a) {
  const EigenDecomposition e = sym_eigen(a);
  double m = 0.0;
  for (double lambda : e.eigenvalues) m = std::max(m, std::abs(lambda));
  return m;
}

namespace {

void canonical_sign(Vec& v) {
  for (double x : v) {
    if (std::abs(x) > 1e-12) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      return;
    }
  }
}

bool lex_greater(const Vec& a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return false;
}

double offdiag_mass(const std::vector<double>& a, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s += a[static_cast<std::size_t>(i) * n + j] * a[static_cast<std::size_t>(i) * n + j];
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition sym_eigen(const SymMatrix& m) {
  const int n = m.dim();
  if (n <= 0) raise(errc::invalid_input, "empty matrix");

  // Work on a symmetrized copy so rotations stay exactly symmetric.
  std::vector<double> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a[static_cast<std::size_t>(i) * n + j] = 0.5 * (m(i, j) + m(j, i));
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  auto V = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(i) * n + j]; };

  const double fro = m.frobenius();
  const double tol = 1e-14 * fro;

  bool converged = offdiag_mass(a, n) <= tol;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1.0 / std::numeric_limits<double>::epsilon()) {
          t = 1.0 / (2.0 * theta);
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = A(p, p), aqq = A(q, q);
        A(p, p) = app - t * apq;
        A(q, q) = aqq + t * apq;
        A(p, q) = A(q, p) = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = A(i, p), aiq = A(i, q);
          A(i, p) = A(p, i) = aip - s * (aiq + tau * aip);
          A(i, q) = A(q, i) = aiq + s * (aip - tau * aiq);
        }
        for (int i = 0; i < n; ++i) {
          const double vip = V(i, p), viq = V(i, q);
          V(i, p) = vip - s * (viq + tau * vip);
          V(i, q) = viq + s * (vip - tau * viq);
        }
      }
    }
    converged = offdiag_mass(a, n) <= tol;
  }
  if (!converged) raise(errc::numerical_failure, "Jacobi sweeps exhausted");

  std::vector<std::pair<double, Vec>> pairs(n);
  for (int j = 0; j < n; ++j) {
    Vec col(n);
    for (int i = 0; i < n; ++i) col[i] = V(i, j);
    canonical_sign(col);
    pairs[j] = {A(j, j), std::move(col)};
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return lex_greater(x.second, y.second);
  });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n);
  for (int i = 0; i < n; ++i) {
    out.eigenvalues[i] = pairs[i].first;
    out.eigenvectors[i] = std::move(pairs[i].second);
  }
  out.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < n; ++i)
    out.min_gap = std::min(out.min_gap, out.eigenvalues[i] - out.eigenvalues[i + 1]);
  if (n == 1) out.min_gap = std::numeric_limits<double>::infinity();
  out.degenerate = out.min_gap < 1e-12;
  return out;
}

SmallestEigenvector smallest_eigenvector(const SymMatrix& a) {
  const EigenDecomposition e = sym_eigen(a);
  const int n = a.dim();
  SmallestEigenvector out;
  out.v = e.eigenvectors[n - 1];
  out.eigenvalue = e.eigenvalues[n - 1];
  out.gap = (n >= 2) ? e.eigenvalues[n - 2] - e.eigenvalues[n - 1]
                     : std::numeric_limits<double>::infinity();
  out.degenerate = out.gap < 1e-12;
  return out;
}

SymMatrix inv_sqrt(const SymMatrix& a, double rel_tol) {
  const EigenDecomposition e = sym_eigen(a);
  const int n = a.dim();
  const double lmax = e.eigenvalues[0];
  const double lmin = e.eigenvalues[n - 1];
  if (!(lmax > 0.0) || !(lmin > rel_tol * lmax))
    raise(errc::singular_covariance,
          "matrix not positive definite within tolerance (lambda_min=" + std::to_string(lmin) + ")");
  SymMatrix w(n);
  for (int k = 0; k < n; ++k) {
    const double f = 1.0 / std::sqrt(e.eigenvalues[k]);
    w.add_outer(e.eigenvectors[k], f);
  }
  return w;
}

namespace {

// Plain Householder QR least squares on the Vandermonde columns 0..deg;
// returns false if any diagonal of R falls below rel_pivot * max diagonal.
bool vandermonde_qr_solve(const Vec& t, const Vec& y, int deg, double rel_pivot, Vec* coeffs) {
  const int rows = static_cast<int>(t.size());
  const int cols = deg + 1;
  std::vector<double> a(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    double p = 1.0;
    for (int j = 0; j < cols; ++j) {
      a[static_cast<std::size_t>(i) * cols + j] = p;
      p *= t[i];
    }
  }
  Vec rhs = y;
  auto M = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * cols + j]; };

  std::vector<double> diag(cols, 0.0);
  for (int k = 0; k < cols && k < rows; ++k) {
    double alpha = 0.0;
    for (int i = k; i < rows; ++i) alpha += M(i, k) * M(i, k);
    alpha = std::sqrt(alpha);
    if (M(k, k) > 0.0) alpha = -alpha;
    diag[k] = std::abs(alpha);
    if (alpha == 0.0) continue;
    // Householder vector stored in-place below the diagonal.
    M(k, k) -= alpha;
    double beta = 0.0;
    for (int i = k; i < rows; ++i) beta += M(i, k) * M(i, k);
    if (beta == 0.0) {
      M(k, k) = alpha;
      continue;
    }
    for (int j = k + 1; j < cols; ++j) {
      double s = 0.0;
      for (int i = k; i < rows; ++i) s += M(i, k) * M(i, j);
      s = 2.0 * s / beta;
      for (int i = k; i < rows; ++i) M(i, j) -= s * M(i, k);
    }
    double sy = 0.0;
    for (int i = k; i < rows; ++i) sy += M(i, k) * rhs[i];
    sy = 2.0 * sy / beta;
    for (int i = k; i < rows; ++i) rhs[i] -= sy * M(i, k);
    M(k, k) = alpha;
  }

  double dmax = 0.0;
  for (int k = 0; k < cols; ++k) dmax = std::max(dmax, diag[k]);
  if (rows < cols || dmax == 0.0) return false;
  for (int k = 0; k < cols; ++k)
    if (diag[k] <= rel_pivot * dmax) return false;

  Vec x(cols, 0.0);
  for (int k = cols - 1; k >= 0; --k) {
    double s = rhs[k];
    for (int j = k + 1; j < cols; ++j) s -= M(k, j) * x[j];
    x[k] = s / M(k, k);
  }
  *coeffs = std::move(x);
  return true;
}

// Numerical rank of the Vandermonde matrix via QR with column pivoting.
int vandermonde_rank(const Vec& t, int deg, double rel_pivot) {
  const int rows = static_cast<int>(t.size());
  const int cols = deg + 1;
  std::vector<double> a(static_cast<std::size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    double p = 1.0;
    for (int j = 0; j < cols; ++j) {
      a[static_cast<std::size_t>(i) * cols + j] = p;
      p *= t[i];
    }
  }
  auto M = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * cols + j]; };
  std::vector<double> colnorm(cols, 0.0);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) colnorm[j] += M(i, j) * M(i, j);

  double first_pivot = 0.0;
  int rank = 0;
  for (int k = 0; k < cols && k < rows; ++k) {
    int pivot = k;
    for (int j = k + 1; j < cols; ++j)
      if (colnorm[j] > colnorm[pivot]) pivot = j;
    if (pivot != k) {
      for (int i = 0; i < rows; ++i) std::swap(M(i, k), M(i, pivot));
      std::swap(colnorm[k], colnorm[pivot]);
    }
    double alpha = 0.0;
    for (int i = k; i < rows; ++i) alpha += M(i, k) * M(i, k);
    alpha = std::sqrt(alpha);
    if (k == 0) first_pivot = alpha;
    if (alpha <= rel_pivot * first_pivot) break;
    ++rank;
    if (M(k, k) > 0.0) alpha = -alpha;
    M(k, k) -= alpha;
    double beta = 0.0;
    for (int i = k; i < rows; ++i) beta += M(i, k) * M(i, k);
    if (beta == 0.0) continue;
    for (int j = k + 1; j < cols; ++j) {
      double s = 0.0;
      for (int i = k; i < rows; ++i) s += M(i, k) * M(i, j);
      s = 2.0 * s / beta;
      for (int i = k; i < rows; ++i) M(i, j) -= s * M(i, k);
    }
    for (int j = k + 1; j < cols; ++j) {
      colnorm[j] = 0.0;
      for (int i = k + 1; i < rows; ++i) colnorm[j] += M(i, j) * M(i, j);
    }
  }
  return rank;
}

}  // namespace

Vec polyfit_ls(const Vec& abscissae, const Vec& ordinates, int degree) {
  if (abscissae.empty()) raise(errc::empty_bin, "no points to fit");
  if (abscissae.size() != ordinates.size())
    raise(errc::invalid_input, "abscissae/ordinates length mismatch");
  if (degree < 0) raise(errc::invalid_input, "negative degree");
  for (std::size_t i = 0; i < abscissae.size(); ++i)
    if (!std::isfinite(abscissae[i]) || !std::isfinite(ordinates[i]))
      raise(errc::invalid_input, "non-finite fit input");

  constexpr double kRelPivot = 1e-10;
  const int max_deg = std::min<int>(degree, static_cast<int>(abscissae.size()) - 1);
  int deg = max_deg;
  if (deg < degree || vandermonde_rank(abscissae, degree, kRelPivot) < degree + 1) {
    deg = vandermonde_rank(abscissae, max_deg, kRelPivot) - 1;
  }
  Vec coeffs;
  for (; deg >= 1; --deg) {
    if (vandermonde_qr_solve(abscissae, ordinates, deg, kRelPivot, &coeffs)) break;
  }
  if (deg < 1) {
    // Degree 0: the mean always exists.
    const double mean =
        std::accumulate(ordinates.begin(), ordinates.end(), 0.0) / ordinates.size();
    coeffs = {mean};
  }
  coeffs.resize(static_cast<std::size_t>(degree) + 1, 0.0);
  return coeffs;
}

double polyval(const Vec& coeffs, double t) {
  double acc = 0.0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * t + coeffs[i];
  return acc;
}

}  // namespace sindex
