#include "momfilter/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace momfilter {

namespace {

double log_chi2_pdf(double x, double nu) {
  return (0.5 * nu - 1.0) * std::log(x) - 0.5 * x - 0.5 * nu * std::numbers::ln2 -
         std::lgamma(0.5 * nu);
}

// sinh(a)/sinh(b) without overflow
double sinh_ratio(double a, double b) {
  if (std::abs(b) < 30.0) return std::sinh(a) / std::sinh(b);
  const double s = (a < 0) != (b < 0) ? -1.0 : 1.0;
  return s * std::exp(std::abs(a) - std::abs(b)) * -std::expm1(-2.0 * std::abs(a)) /
         -std::expm1(-2.0 * std::abs(b));
}

double inv_sinh(double x) {
  if (std::abs(x) < 30.0) return 1.0 / std::sinh(x);
  return (x < 0 ? -2.0 : 2.0) * std::exp(-std::abs(x));
}

double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// probabilists' Hermite polynomials He_0..He_k at u
std::vector<double> hermite(double u, unsigned k) {
  std::vector<double> he(k + 1);
  he[0] = 1.0;
  if (k >= 1) he[1] = u;
  for (unsigned j = 2; j <= k; ++j) he[j] = u * he[j - 1] - (j - 1) * he[j - 2];
  return he;
}

}  // namespace

DensityGrid OracleDensity::sample(double lo, double hi, std::size_t points) const {
  DensityGrid g;
  std::vector<double> z(points);
  g.values.resize(points);
  for (std::size_t p = 0; p < points; ++p) {
    z[p] = lo + (hi - lo) * static_cast<double>(p) / static_cast<double>(points - 1);
    g.values[p] = pdf(z[p]);
  }
  g.axes.push_back(std::move(z));
  g.mass = trapezoid(g.axes, g.values);
  return g;
}

double noncentral_chi2_pdf(double x, double df, double nc) {
  if (!(x > 0.0)) return 0.0;
  const double half = 0.5 * nc;
  if (half == 0.0) return std::exp(log_chi2_pdf(x, df));
  auto log_w = [&](double i) { return -half + i * std::log(half) - std::lgamma(i + 1.0); };
  const double mode = std::floor(half);
  double sum = 0.0, covered = 0.0;
  // chi-squared densities with >= 2 degrees of freedom are bounded by 1/2, so an
  // uncovered Poisson weight below 2e-12 bounds the truncation error by 1e-12
  for (double i = mode; i >= 0.0; i -= 1.0) {
    const double lw = log_w(i);
    covered += std::exp(lw);
    sum += std::exp(lw + log_chi2_pdf(x, df + 2.0 * i));
    if (1.0 - covered < 2e-12) break;
    if (lw < -60.0 && i < mode) break;
  }
  for (double i = mode + 1.0; 1.0 - covered >= 2e-12; i += 1.0) {
    const double lw = log_w(i);
    covered += std::exp(lw);
    sum += std::exp(lw + log_chi2_pdf(x, df + 2.0 * i));
    if (lw < -60.0 && i > half) break;
  }
  return sum;
}

OracleDensity cir_exact_density(const CirParams& p, double t) {
  if (!(2.0 * p.theta * p.mu > p.sigma * p.sigma))
    throw ConfigError("CIR oracle requires the Feller condition 2 theta mu > sigma^2");
  if (!(t > 0.0)) throw ConfigError("CIR oracle requires t > 0");
  const double decay = std::exp(-p.theta * t);
  const double c = 2.0 * p.theta / (p.sigma * p.sigma * (1.0 - decay));
  const double df = 4.0 * p.theta * p.mu / (p.sigma * p.sigma);
  const double nc = 2.0 * c * p.x0 * decay;
  OracleDensity o;
  o.pdf = [=](double x) { return x > 0.0 ? 2.0 * c * noncentral_chi2_pdf(2.0 * c * x, df, nc) : 0.0; };
  return o;
}

std::array<Complex, 4> cir_first_order_coeffs(double theta, double mu, double sigma, double t) {
  const double s2 = sigma * sigma, s4 = s2 * s2, s6 = s4 * s2, s8 = s4 * s4;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
  return {Complex(t2 * s2 * (8.0 * theta * mu + s2) / 16.0, 0.0),
          Complex(0.0, -t2 * s4 * (4.0 * mu + t * s2) / 16.0),
          Complex(-t3 * mu * s6 / 24.0, 0.0),
          Complex(0.0, t4 * mu * s8 / 64.0)};
}

DensityGrid cir_first_order_density(const CirParams& p, double t, const ZWindow& window) {
  if (window.lo.size() != 1) throw DimensionError("CIR first-order density is one-dimensional");
  const auto a = cir_first_order_coeffs(p.theta, p.mu, p.sigma, t);
  const double var = p.mu * p.sigma * p.sigma * t;
  const double s = std::sqrt(var);
  // phi1 = (-a2 d^2 - i a3 d^3 + a4 d^4 + i a5 d^5) phi0,
  // d^k phi0 = (-1)^k s^-k He_k(u) phi0
  const Complex I(0.0, 1.0);
  const std::array<Complex, 4> c = {-a[0], -I * a[1], a[2], I * a[3]};
  DensityGrid g;
  std::vector<double> z(window.points[0]);
  g.values.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = window.lo[0] + (window.hi[0] - window.lo[0]) * static_cast<double>(i) /
                              static_cast<double>(z.size() - 1);
    const double u = (z[i] - p.mu) / s;
    const double phi0 = std::exp(-0.5 * u * u) / (s * std::sqrt(2.0 * std::numbers::pi));
    const auto he = hermite(u, 5);
    Complex acc = 0.0;
    for (unsigned k = 2; k <= 5; ++k)
      acc += c[k - 2] * ((k % 2) ? -1.0 : 1.0) * std::pow(s, -static_cast<double>(k)) * he[k];
    g.values[i] = (acc * phi0).real();
  }
  g.axes.push_back(std::move(z));
  g.mass = trapezoid(g.axes, g.values);
  return g;
}

OracleDensity benes_exact_density(const BenesParams& p, const ObservationPath& path, double t,
                                  double lo, double hi) {
  if (!(p.sigma > 0.0)) throw ConfigError("Benes oracle requires sigma > 0");
  if (p.h1 == 0.0) throw ConfigError("Benes oracle requires h1 != 0");
  if (!(hi > lo)) throw ConfigError("Benes oracle window must satisfy hi > lo");
  path.validate();
  std::size_t end = path.times.size();
  for (std::size_t i = 0; i < path.times.size(); ++i)
    if (std::abs(path.times[i] - t) <= 1e-9 * std::max(1.0, t)) end = i;
  if (end == path.times.size() || end == 0)
    throw ConfigError("Benes oracle time must be a positive point of the path grid");

  const double k = p.h1 * p.sigma;
  const double x = t * k;
  double B = 0.0;
  for (std::size_t i = 0; i < end; ++i) B += sinh_ratio(path.times[i] * k, x) * path.dY(static_cast<Eigen::Index>(i), 0);
  B *= p.h1;
  const double coth = 1.0 / std::tanh(x);
  B += p.h2 / p.sigma * inv_sinh(x) - p.h2 / p.sigma * coth;
  const double quad = 0.5 * p.h1 / p.sigma * coth;
  const double a_s = p.a / p.sigma;

  auto log_density = [=](double z) { return log_cosh(a_s * z) - quad * z * z + B * z; };
  // normalize on a fine trapezoid grid over the window
  constexpr std::size_t kPoints = 20001;
  std::vector<double> zs(kPoints), ls(kPoints);
  double lmax = -INFINITY;
  for (std::size_t i = 0; i < kPoints; ++i) {
    zs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kPoints - 1);
    ls[i] = log_density(zs[i]);
    lmax = std::max(lmax, ls[i]);
  }
  for (double& v : ls) v = std::exp(v - lmax);
  const double Z = trapezoid({zs}, ls);
  OracleDensity o;
  o.normalization = OracleDensity::Normalization::NumericOnWindow;
  o.pdf = [=](double z) { return std::exp(log_density(z) - lmax) / Z; };
  return o;
}

std::vector<KalmanBucyPoint> kalman_bucy(double A, double b, double h1, double h2, double sigma,
                                         double x0, double var0, const ObservationPath& path) {
  path.validate();
  if (var0 < 0.0) throw ConfigError("Kalman-Bucy initial variance must be non-negative");
  const double s2 = sigma * sigma, hh = h1 * h1;
  const double lam = std::sqrt(A * A + s2 * hh);
  // E(tau) = cosh(lam tau) I + sinh(lam tau)/lam M and its integral over [0, tau]
  auto propagate = [&](double tau, double u0, double v0, double& u, double& v, double& iu,
                       double& iv) {
    double ch, sh_l, ich, ish;  // cosh, sinh/lam, int cosh, int sinh/lam
    if (lam * tau < 1e-8) {
      ch = 1.0;
      sh_l = tau;
      ich = tau;
      ish = 0.5 * tau * tau;
    } else {
      ch = std::cosh(lam * tau);
      sh_l = std::sinh(lam * tau) / lam;
      ich = sh_l;
      ish = (ch - 1.0) / (lam * lam);
    }
    const double mu_u = A * u0 + s2 * v0, mu_v = hh * u0 - A * v0;  // M (u0, v0)
    u = ch * u0 + sh_l * mu_u;
    v = ch * v0 + sh_l * mu_v;
    iu = ich * u0 + ish * mu_u;
    iv = ich * v0 + ish * mu_v;
  };

  std::vector<KalmanBucyPoint> out;
  double m = x0, P = var0;
  out.push_back({0.0, m, P});
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
    const double tau = path.times[k + 1] - path.times[k];
    double u, v, iu, iv;
    propagate(tau, P, 1.0, u, v, iu, iv);
    const double dY = path.dY(static_cast<Eigen::Index>(k), 0);
    m = (m + P * h1 * dY + b * iv - h1 * h2 * iu) / v;
    P = u / v;
    out.push_back({path.times[k + 1], m, P});
  }
  return out;
}

}  // namespace momfilter
