#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sindex/dataset.hpp"
#include "sindex/rng.hpp"

namespace sindex {

enum class FunctionKind { f1, f2, f3, linear, polynomial };

FunctionKind function_from_name(const std::string& name);
const char* function_name(FunctionKind k);

// Realized link function. f1(t) = exp(t/3); f2 = f1 + sin(20 t)/15; f3 is a
// seeded monotone piecewise quadratic on [-4,4], extended linearly outside.
class LinkFunction {
 public:
  double operator()(double t) const;

  FunctionKind kind = FunctionKind::f1;
  Vec poly;  // ascending coefficients for linear / polynomial kinds

  // f3 realization
  Vec knots;                                  // -4 = k_0 < ... < k_9 = 4
  std::vector<std::array<double, 3>> pieces;  // per piece (c, b, a): a t^2 + b t + c
};

struct FunctionSpec {
  FunctionKind kind = FunctionKind::f1;
  std::uint64_t f3_seed = 0;
  Vec v;       // index direction; empty selects the distribution default
  Vec poly;    // for kind polynomial; kind linear means f(t) = t

  LinkFunction realize() const;
};

double eval_f(const FunctionSpec& spec, double t);

// sigma = percent * |f(-4) - f(4)|, with the reference interval [-4,4] taken
// literally regardless of where the projected data fall.
double resolve_sigma(const FunctionSpec& spec, double percent);

struct NoiseSpec {
  double percent = 0.0;
  double resolved_sigma = 0.0;

  static NoiseSpec resolve(const FunctionSpec& f, double percent);
};

enum class DistributionKind { gaussian, s1, s2 };

DistributionKind distribution_from_name(const std::string& name);
const char* distribution_name(DistributionKind k);

struct DistributionSpec {
  DistributionKind kind = DistributionKind::gaussian;
  int d = 2;  // s1 and s2 force d = 2

  int dim() const { return kind == DistributionKind::gaussian ? d : 2; }
  Vec default_direction() const;
};

// i.i.d. draws, row-major n x d. s1 = (standard normal) x (skew-normal with
// shape 5), s2 = uniform on the triangle (0,0),(1,1),(0,1); both renormalized
// coordinate-wise to population mean 0 and standard deviation 1.
Vec sample_x(const DistributionSpec& spec, int n, std::uint64_t seed);

// Pre-normalization draws (for moment checks against closed-form values).
Vec sample_x_raw(const DistributionSpec& spec, int n, std::uint64_t seed);

struct SyntheticDataset {
  Dataset data;
  Vec v;               // true index direction
  LinkFunction link;
  double sigma = 0.0;
  Vec noiseless;       // F(X_i) without noise
  std::uint64_t seed = 0;
};

// Y = f(<v, X>) + zeta with zeta ~ N(0, sigma^2). Identical (specs, n, seed)
// give bit-identical output.
SyntheticDataset make_dataset(const DistributionSpec& dist, const FunctionSpec& func,
                              const NoiseSpec& noise, int n, std::uint64_t seed);

}  // namespace sindex
