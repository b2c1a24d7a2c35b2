#include "momfilter/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace momfilter {

namespace {

double real_eval(const MultiPoly& p, double x) { return poly_eval(p, Complex(x)).real(); }

// central difference of order k with a step balancing truncation and rounding
double fd_derivative(const std::function<double(double)>& f, double x, unsigned k, double scale) {
  if (k == 0) return f(x);
  const double h = scale * std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 2.0));
  // k-th central difference: sum_j (-1)^j C(k,j) f(x + (k/2 - j) h) / h^k
  double s = 0.0, c = 1.0;
  for (unsigned j = 0; j <= k; ++j) {
    s += ((j % 2) ? -c : c) * f(x + (0.5 * k - j) * h);
    c = c * (k - j) / (j + 1);
  }
  return s / std::pow(h, k);
}

std::vector<unsigned> powers(unsigned degree, Parity parity) {
  std::vector<unsigned> p;
  for (unsigned k = 0; k <= degree; ++k) {
    if (parity == Parity::Odd && k % 2 == 0) continue;
    if (parity == Parity::Even && k % 2 == 1) continue;
    p.push_back(k);
  }
  return p;
}

}  // namespace

FitTarget FitTarget::tanh_drift(double a, double sigma) {
  FitTarget t;
  t.value = [a, sigma](double x) { return a * sigma * std::tanh(a * x / sigma); };
  return t;
}

FitTarget FitTarget::sqrt_vol(double mu) {
  FitTarget t;
  t.value = [](double x) { return std::sqrt(x); };
  t.derivative = [](double x, unsigned k) {
    // d^k x^(1/2) = (1/2)(-1/2)...(1/2 - k + 1) x^(1/2 - k)
    double c = 1.0;
    for (unsigned j = 0; j < k; ++j) c *= 0.5 - j;
    return c * std::pow(x, 0.5 - k);
  };
  t.offset = std::sqrt(mu);
  return t;
}

FitTarget FitTarget::table(std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size() || x.size() < 2) throw FitError("fit table needs >= 2 (x, y) rows");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw FitError("fit table abscissae must increase");
  FitTarget t;
  t.value = [x = std::move(x), y = std::move(y)](double v) {
    auto it = std::upper_bound(x.begin(), x.end(), v);
    std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - x.begin()), 1, x.size() - 1);
    const double w = (v - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - w) * y[i - 1] + w * y[i];
  };
  return t;
}

MultiPoly taylor_fit(const FitSpec& spec) {
  const auto* m = std::get_if<TaylorMethod>(&spec.method);
  if (!m) throw FitError("taylor_fit needs a Taylor method");
  if (!spec.target.value) throw FitError("fit target has no value function");
  MultiPoly shift = MultiPoly::univariate({-m->center, 1.0});  // x - c
  MultiPoly result = MultiPoly::constant(1, 0.0);
  MultiPoly power = MultiPoly::constant(1, 1.0);
  double factorial = 1.0;
  for (unsigned k = 0; k <= m->degree; ++k) {
    if (k > 0) {
      factorial *= k;
      power = power * shift;
    }
    double dk = spec.target.derivative ? spec.target.derivative(m->center, k)
                                       : fd_derivative(spec.target.value, m->center, k, m->scale);
    if (k == 0) dk -= spec.target.offset;
    if (!std::isfinite(dk))
      throw FitError("derivative of order " + std::to_string(k) + " is not finite at the center");
    result = result + Complex(dk / factorial) * power;
  }
  return result;
}

std::vector<double> lsm_abscissae(const WeightedLsmMethod& m) {
  if (!(m.step > 0.0) || !(m.x_hi >= m.x_lo)) throw FitError("invalid LSM sample range");
  std::vector<double> x;
  const auto count = static_cast<std::size_t>(std::floor((m.x_hi - m.x_lo) / m.step + 1e-9)) + 1;
  for (std::size_t k = 0; k < count; ++k) x.push_back(m.x_lo + static_cast<double>(k) * m.step);
  return x;
}

double weighted_residual(const WeightedLsmMethod& m, const FitTarget& target, const MultiPoly& p) {
  double s = 0.0;
  for (double x : lsm_abscissae(m)) {
    const double g = std::exp(-m.weight_w * x * x / (2.0 * m.sigma * m.sigma));
    const double r = real_eval(p, x) - (target.value(x) - target.offset);
    s += g * r * r;
  }
  return s;
}

MultiPoly lsm_fit(const FitSpec& spec) {
  const auto* m = std::get_if<WeightedLsmMethod>(&spec.method);
  if (!m) throw FitError("lsm_fit needs a weighted LSM method");
  if (!spec.target.value) throw FitError("fit target has no value function");
  if (m->weight_w < 0.0) throw FitError("weight w must be non-negative");
  if (!(m->sigma > 0.0)) throw FitError("weight sigma must be positive");
  const std::vector<double> x = lsm_abscissae(*m);
  const std::vector<unsigned> pw = powers(m->degree, m->parity);
  if (x.empty()) throw FitError("empty sample set");
  if (x.size() <= pw.size())
    throw FitError("sample count must exceed the number of free coefficients");

  const auto rows = static_cast<Eigen::Index>(x.size());
  const auto cols = static_cast<Eigen::Index>(pw.size());
  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    const double sg = std::exp(-m->weight_w * xi * xi / (4.0 * m->sigma * m->sigma));  // sqrt(g)
    for (Eigen::Index j = 0; j < cols; ++j)
      A(i, j) = sg * std::pow(xi, static_cast<int>(pw[static_cast<std::size_t>(j)]));
    b(i) = sg * (spec.target.value(xi) - spec.target.offset);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < cols)
    throw FitError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                   std::to_string(cols) + ")");
  Eigen::VectorXd c = qr.solve(b);
  std::vector<Complex> coeffs(m->degree + 1, 0.0);
  for (Eigen::Index j = 0; j < cols; ++j) coeffs[pw[static_cast<std::size_t>(j)]] = c(j);
  return MultiPoly::univariate(coeffs);
}

MultiPoly fit(const FitSpec& spec) {
  return std::holds_alternative<TaylorMethod>(spec.method) ? taylor_fit(spec) : lsm_fit(spec);
}

double stable_reach(const MultiPoly& p, double limit, double cap) {
  constexpr int kSamples = 4000;
  double reach = limit;
  for (int i = 1; i <= kSamples; ++i) {
    const double r = limit * i / kSamples;
    if (std::abs(poly_eval(p, Complex(r))) > cap || std::abs(poly_eval(p, Complex(-r))) > cap) {
      reach = limit * (i - 1) / kSamples;
      break;
    }
  }
  return reach;
}

}  // namespace momfilter
