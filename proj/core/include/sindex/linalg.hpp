#pragma once

#include <cstddef>
#include <vector>

namespace sindex {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
Vec normalized(const Vec& a);

// Dense symmetric matrix, full row-major storage. The constructor rejects
// non-finite entries and asymmetry beyond 1e-12 * max(1, |a_ij|).
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim);  // zero matrix
  SymMatrix(int dim, Vec entries);

  static SymMatrix identity(int dim);
  static SymMatrix diagonal(const Vec& d);

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
  double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
  const Vec& data() const { return a_; }

  Vec apply(const Vec& x) const;  // A x
  double frobenius() const;

  SymMatrix& add_scaled(const SymMatrix& other, double factor);  // this += factor * other
  SymMatrix& add_outer(const Vec& v, double factor);             // this += factor * v v^T
  void scale(double factor);

 private:
  int dim_ = 0;
  Vec a_;
};

double spectral_norm(const SymMatrix& a);

struct EigenDecomposition {
  Vec eigenvalues;                   // descending
  std::vector<Vec> eigenvectors;     // eigenvectors[i] pairs with eigenvalues[i], canonical sign
  bool degenerate = false;           // smallest gap below 1e-12
  double min_gap = 0.0;              // min over consecutive eigenvalue gaps
};

// Full spectrum of a symmetric matrix by cyclic Jacobi rotations. Converges
// when the off-diagonal Frobenius mass drops below 1e-14 * ||A||_F, capped at
// 100 sweeps. Eigenvectors come out orthonormal, in canonical sign (first
// coordinate with |.| > 1e-12 made positive), sorted by eigenvalue descending
// with lexicographic tie-break on the vector.
EigenDecomposition sym_eigen(const SymMatrix& a);

struct SmallestEigenvector {
  Vec v;
  double eigenvalue = 0.0;
  double gap = 0.0;          // lambda_{d-1} - lambda_d
  bool degenerate = false;   // gap below 1e-12
};

SmallestEigenvector smallest_eigenvector(const SymMatrix& a);

// Symmetric inverse square root: W with W A W = I. Requires
// lambda_min > rel_tol * lambda_max, else SingularCovariance.
SymMatrix inv_sqrt(const SymMatrix& a, double rel_tol);

// Least squares polynomial fit of degree <= m, coefficients in ascending
// power order, length m+1. Uses Householder QR with column pivoting on the
// Vandermonde matrix; a pivot below 1e-10 relative drops to the largest
// degree with full column rank and zero-pads the result.
Vec polyfit_ls(const Vec& abscissae, const Vec& ordinates, int degree);

double polyval(const Vec& coeffs, double t);

}  // namespace sindex
