#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "momfilter/polyops.hpp"

namespace momfilter {

class FitError : public Error {
 public:
  using Error::Error;
};

enum class Parity { Any, Odd, Even };

struct TaylorMethod {
  double center = 0.0;
  unsigned degree = 3;
  double scale = 1.0;  // length scale for finite-difference steps
};

struct WeightedLsmMethod {
  double x_lo = -2.5, x_hi = 2.5, step = 0.1;
  unsigned degree = 11;
  double weight_w = 2.0;
  double sigma = 0.5;  // model sigma in g(x) = exp(-w x^2 / (2 sigma^2))
  Parity parity = Parity::Odd;
};

struct FitTarget {
  std::function<double(double)> value;
  // k-th derivative; when absent Taylor fits fall back to finite differences
  std::function<double(double, unsigned)> derivative;
  double offset = 0.0;  // subtracted from the target before fitting

  static FitTarget tanh_drift(double a, double sigma);  // a sigma tanh(a x / sigma)
  static FitTarget sqrt_vol(double mu);                 // sqrt(x) - sqrt(mu)
  static FitTarget table(std::vector<double> x, std::vector<double> y);  // linear interpolation
};

struct FitSpec {
  std::variant<TaylorMethod, WeightedLsmMethod> method;
  FitTarget target;
};

MultiPoly taylor_fit(const FitSpec& spec);
MultiPoly lsm_fit(const FitSpec& spec);
MultiPoly fit(const FitSpec& spec);

std::vector<double> lsm_abscissae(const WeightedLsmMethod& m);
double weighted_residual(const WeightedLsmMethod& m, const FitTarget& target, const MultiPoly& p);

// Largest r <= limit such that |p(x)| <= cap on [-r, r] (scanned on a fine grid).
double stable_reach(const MultiPoly& p, double limit, double cap);

}  // namespace momfilter
