#pragma once

#include <array>
#include <functional>

#include "momfilter/simulate.hpp"
#include "momfilter/spectral.hpp"

namespace momfilter {

struct OracleDensity {
  enum class Normalization { Analytic, NumericOnWindow };
  std::function<double(double)> pdf;
  Normalization normalization = Normalization::Analytic;

  DensityGrid sample(double lo, double hi, std::size_t points) const;
};

struct CirParams {
  double theta, mu, sigma, x0;
};

// Transition density of dX = theta(mu - X)dt + sigma sqrt(X) dV from x0.
OracleDensity cir_exact_density(const CirParams& p, double t);
// Poisson-mixture series for the non-central chi-squared density; the series
// is summed outward from the Poisson mode until the remaining weight is < 1e-12.
double noncentral_chi2_pdf(double x, double df, double nc);

std::array<Complex, 4> cir_first_order_coeffs(double theta, double mu, double sigma, double t);
// The order-1 correction phi^[1] (no order-0 part) on the window.
DensityGrid cir_first_order_density(const CirParams& p, double t, const ZWindow& window);

struct BenesParams {
  double a, sigma, h1, h2;
};

// Exact filtered density of dX = a sigma tanh(a X / sigma) dt + sigma dV,
// dY = (h1 X + h2) dt + dW with X_0 = 0, normalized on [lo, hi].
OracleDensity benes_exact_density(const BenesParams& p, const ObservationPath& path, double t,
                                  double lo, double hi);

struct KalmanBucyPoint {
  double t, mean, var;
};

// dX = (A X + b) dt + sigma dV, dY = (h1 X + h2) dt + dW. The Riccati equation
// is integrated exactly through its linearization P = U / V, and the mean uses
// the exact transition with left-point innovation sums on the path grid.
std::vector<KalmanBucyPoint> kalman_bucy(double A, double b, double h1, double h2, double sigma,
                                         double x0, double var0, const ObservationPath& path);

}  // namespace momfilter
