#include "sindex/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "sindex/error.hpp"

namespace sindex {

FunctionKind function_from_name(const std::string& name) {
  if (name == "f1" || name == "F1") return FunctionKind::f1;
  if (name == "f2" || name == "F2") return FunctionKind::f2;
  if (name == "f3" || name == "F3") return FunctionKind::f3;
  if (name == "linear") return FunctionKind::linear;
  if (name == "polynomial" || name == "poly") return FunctionKind::polynomial;
  raise(errc::invalid_input, "unknown function '" + name + "'");
}

const char* function_name(FunctionKind k) {
  switch (k) {
    case FunctionKind::f1: return "f1";
    case FunctionKind::f2: return "f2";
    case FunctionKind::f3: return "f3";
    case FunctionKind::linear: return "linear";
    case FunctionKind::polynomial: return "polynomial";
  }
  return "?";
}

double LinkFunction::operator()(double t) const {
  switch (kind) {
    case FunctionKind::f1:
      return std::exp(t / 3.0);
    case FunctionKind::f2:
      return std::exp(t / 3.0) + std::sin(20.0 * t) / 15.0;
    case FunctionKind::linear:
      return t;
    case FunctionKind::polynomial: {
      double acc = 0.0;
      for (std::size_t i = poly.size(); i-- > 0;) acc = acc * t + poly[i];
      return acc;
    }
    case FunctionKind::f3:
      break;
  }
  // f3: piecewise quadratic inside [-4,4], linear extension outside.
  const auto eval_piece = [&](int p, double x) {
    const auto& c = pieces[p];
    return (c[2] * x + c[1]) * x + c[0];
  };
  const auto slope_piece = [&](int p, double x) { return 2.0 * pieces[p][2] * x + pieces[p][1]; };
  const int last = static_cast<int>(pieces.size()) - 1;
  if (t < knots.front()) return eval_piece(0, knots.front()) + slope_piece(0, knots.front()) * (t - knots.front());
  if (t > knots.back()) return eval_piece(last, knots.back()) + slope_piece(last, knots.back()) * (t - knots.back());
  int p = static_cast<int>(std::upper_bound(knots.begin(), knots.end(), t) - knots.begin()) - 1;
  p = std::clamp(p, 0, last);
  return eval_piece(p, t);
}

LinkFunction FunctionSpec::realize() const {
  LinkFunction f;
  f.kind = kind;
  if (kind == FunctionKind::linear) {
    f.kind = FunctionKind::polynomial;
    f.poly = {0.0, 1.0};
    return f;
  }
  if (kind == FunctionKind::polynomial) {
    if (poly.empty()) raise(errc::invalid_input, "polynomial kind needs coefficients");
    f.poly = poly;
    return f;
  }
  if (kind != FunctionKind::f3) return f;

  // Monotone piecewise quadratic: 8 breakpoints uniform in [-4,4], per-piece
  // curvature a in [-0.3,0.3], slope floor 0.1, constants chained for
  // continuity with f(-4) = 0.
  Rng rng(f3_seed, /*stream=*/0x66333333u);
  Vec breaks(8);
  for (double& b : breaks) b = rng.uniform(-4.0, 4.0);
  std::sort(breaks.begin(), breaks.end());
  f.knots.clear();
  f.knots.push_back(-4.0);
  for (double b : breaks) f.knots.push_back(b);
  f.knots.push_back(4.0);

  const int npieces = static_cast<int>(f.knots.size()) - 1;
  f.pieces.resize(npieces);
  double value = 0.0;  // f(knot left end)
  for (int p = 0; p < npieces; ++p) {
    const double t0 = f.knots[p], t1 = f.knots[p + 1];
    const double a = rng.uniform(-0.3, 0.3);
    const double floor_slope = rng.uniform(0.1, 1.1);
    const double b = floor_slope - std::min(2.0 * a * t0, 2.0 * a * t1);
    const double c = value - (a * t0 + b) * t0;
    f.pieces[p] = {c, b, a};
    value = (a * t1 + b) * t1 + c;
  }
  return f;
}

double eval_f(const FunctionSpec& spec, double t) { return spec.realize()(t); }

double resolve_sigma(const FunctionSpec& spec, double percent) {
  if (percent < 0.0) raise(errc::invalid_input, "negative noise percent");
  if (percent == 0.0) return 0.0;
  const LinkFunction f = spec.realize();
  return percent * std::abs(f(-4.0) - f(4.0));
}

NoiseSpec NoiseSpec::resolve(const FunctionSpec& f, double percent) {
  NoiseSpec n;
  n.percent = percent;
  n.resolved_sigma = resolve_sigma(f, percent);
  return n;
}

DistributionKind distribution_from_name(const std::string& name) {
  if (name == "gaussian" || name == "normal") return DistributionKind::gaussian;
  if (name == "s1" || name == "S1") return DistributionKind::s1;
  if (name == "s2" || name == "S2") return DistributionKind::s2;
  raise(errc::invalid_input, "unknown distribution '" + name + "'");
}

const char* distribution_name(DistributionKind k) {
  switch (k) {
    case DistributionKind::gaussian: return "gaussian";
    case DistributionKind::s1: return "s1";
    case DistributionKind::s2: return "s2";
  }
  return "?";
}

Vec DistributionSpec::default_direction() const {
  switch (kind) {
    case DistributionKind::s1:
      return {1.0 / std::sqrt(5.0), 2.0 / std::sqrt(5.0)};
    case DistributionKind::s2:
      return {1.0, 0.0};
    case DistributionKind::gaussian:
      break;
  }
  Vec v(dim(), 1.0 / std::sqrt(static_cast<double>(dim())));
  return v;
}

namespace {

constexpr double kSkewShape = 5.0;

Vec sample_impl(const DistributionSpec& spec, int n, std::uint64_t seed, bool normalize) {
  if (n < 1) raise(errc::invalid_input, "need n >= 1");
  const int d = spec.dim();
  Vec x(static_cast<std::size_t>(n) * d);
  Rng rng(seed, /*stream=*/1);

  const double delta = kSkewShape / std::sqrt(1.0 + kSkewShape * kSkewShape);
  const double skew_mean = delta * std::sqrt(2.0 / 3.14159265358979323846);
  const double skew_sd = std::sqrt(1.0 - 2.0 * delta * delta / 3.14159265358979323846);
  const double tri_sd = 1.0 / std::sqrt(18.0);

  for (int i = 0; i < n; ++i) {
    double* row = x.data() + static_cast<std::size_t>(i) * d;
    switch (spec.kind) {
      case DistributionKind::gaussian:
        for (int j = 0; j < d; ++j) row[j] = rng.gaussian();
        break;
      case DistributionKind::s1: {
        row[0] = rng.gaussian();
        // Skew-normal via the two-normal representation.
        const double u1 = rng.gaussian();
        const double u2 = rng.gaussian();
        double z = delta * std::abs(u1) + std::sqrt(1.0 - delta * delta) * u2;
        if (normalize) z = (z - skew_mean) / skew_sd;
        row[1] = z;
        break;
      }
      case DistributionKind::s2: {
        // Square fold: uniform on the triangle u <= w, no rejection.
        double u = rng.uniform();
        double w = rng.uniform();
        if (u > w) std::swap(u, w);
        if (normalize) {
          row[0] = (u - 1.0 / 3.0) / tri_sd;
          row[1] = (w - 2.0 / 3.0) / tri_sd;
        } else {
          row[0] = u;
          row[1] = w;
        }
        break;
      }
    }
  }
  return x;
}

}  // namespace

Vec sample_x(const DistributionSpec& spec, int n, std::uint64_t seed) {
  return sample_impl(spec, n, seed, true);
}

Vec sample_x_raw(const DistributionSpec& spec, int n, std::uint64_t seed) {
  return sample_impl(spec, n, seed, false);
}

SyntheticDataset make_dataset(const DistributionSpec& dist, const FunctionSpec& func,
                              const NoiseSpec& noise, int n, std::uint64_t seed) {
  const int d = dist.dim();
  Vec v = func.v.empty() ? dist.default_direction() : func.v;
  if (static_cast<int>(v.size()) != d)
    raise(errc::invalid_input, "index direction has dimension " + std::to_string(v.size()) +
                                   ", distribution has " + std::to_string(d));
  v = normalized(v);

  SyntheticDataset out;
  out.link = func.realize();
  out.v = v;
  out.sigma = noise.resolved_sigma;
  out.seed = seed;

  Vec x = sample_x(dist, n, seed);
  out.noiseless.resize(n);
  Vec y(n);
  Rng noise_rng(seed, /*stream=*/2);
  for (int i = 0; i < n; ++i) {
    const double* row = x.data() + static_cast<std::size_t>(i) * d;
    double t = 0.0;
    for (int j = 0; j < d; ++j) t += v[j] * row[j];
    out.noiseless[i] = out.link(t);
    y[i] = out.noiseless[i] + (out.sigma > 0.0 ? out.sigma * noise_rng.gaussian() : 0.0);
  }
  out.data = Dataset(n, d, std::move(x), std::move(y));
  return out;
}

}  // namespace sindex
