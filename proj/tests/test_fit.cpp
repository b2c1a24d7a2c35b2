#include <doctest.h>

#include <cmath>
#include <random>

#include "momfilter/fit.hpp"

using namespace momfilter;

namespace {

double eval(const MultiPoly& p, double x) { return poly_eval(p, Complex(x)).real(); }

WeightedLsmMethod benes_method(double w) {
  WeightedLsmMethod m;
  m.x_lo = -2.5;
  m.x_hi = 2.5;
  m.step = 0.1;
  m.degree = 11;
  m.weight_w = w;
  m.sigma = 0.5;
  m.parity = Parity::Odd;
  return m;
}

// Weighted normal equations in long double, in the scaled basis (x / L)^k to
// keep the Gram matrix tame, solved by Gaussian elimination with pivoting.
std::vector<long double> normal_equations(const WeightedLsmMethod& m, const FitTarget& t,
                                          const std::vector<unsigned>& pw) {
  const std::size_t n = pw.size();
  const long double L = std::max(std::abs(m.x_lo), std::abs(m.x_hi));
  std::vector<std::vector<long double>> G(n, std::vector<long double>(n + 1, 0.0L));
  const auto count = static_cast<int>(std::floor((m.x_hi - m.x_lo) / m.step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) {
    const long double x = static_cast<long double>(m.x_lo) + i * static_cast<long double>(m.step);
    const long double g = std::exp(-static_cast<long double>(m.weight_w) * x * x / (2.0L * m.sigma * m.sigma));
    const long double y = t.value(static_cast<double>(x));
    for (std::size_t a = 0; a < n; ++a) {
      const long double pa = std::pow(x / L, static_cast<int>(pw[a]));
      for (std::size_t b = 0; b < n; ++b) G[a][b] += g * pa * std::pow(x / L, static_cast<int>(pw[b]));
      G[a][n] += g * pa * y;
    }
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(G[r][c]) > std::abs(G[piv][c])) piv = r;
    std::swap(G[c], G[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const long double f = G[r][c] / G[c][c];
      for (std::size_t k = c; k <= n; ++k) G[r][k] -= f * G[c][k];
    }
  }
  std::vector<long double> out(n);
  for (std::size_t a = 0; a < n; ++a) out[a] = G[a][n] / G[a][a] / std::pow(L, static_cast<int>(pw[a]));
  return out;
}

}  // namespace

TEST_CASE("Taylor fit of sqrt around mu = 1") {
  // 1/2 (x-1) - 1/8 (x-1)^2 + 1/16 (x-1)^3
  const auto R = taylor_fit({TaylorMethod{1.0, 3, 1.0}, FitTarget::sqrt_vol(1.0)});
  for (double x : {0.0, 0.4, 1.0, 1.7, 2.5}) {
    const double u = x - 1.0;
    CHECK(eval(R, x) == doctest::Approx(0.5 * u - 0.125 * u * u + u * u * u / 16.0).epsilon(1e-14));
  }
  CHECK(R.degree() == 3);
}

TEST_CASE("Taylor fit squared expands term by term") {
  const auto R = taylor_fit({TaylorMethod{1.0, 3, 1.0}, FitTarget::sqrt_vol(1.0)});
  const auto R2 = R * R;
  CHECK(R2.degree() == 6);
  // in u = x - 1: 1/4 u^2 - 1/8 u^3 + (1/64 + 1/16) u^4 - 1/64 u^5 + 1/256 u^6
  for (double x : {-0.3, 0.5, 1.9}) {
    const double u = x - 1.0;
    const double expect = 0.25 * u * u - 0.125 * std::pow(u, 3) + (1.0 / 64 + 1.0 / 16) * std::pow(u, 4) -
                          std::pow(u, 5) / 64.0 + std::pow(u, 6) / 256.0;
    CHECK(eval(R2, x) == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("Taylor fit reproduces a line exactly") {
  FitTarget t;
  t.value = [](double x) { return 2.0 - 3.0 * x; };
  for (double c : {-1.0, 0.0, 2.5}) {
    const auto p = taylor_fit({TaylorMethod{c, 2, 1.0}, t});
    CHECK(eval(p, 0.0) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(std::abs(p.coeff({1}) - Complex(-3.0)) < 1e-6);
    CHECK(std::abs(p.coeff({2})) < 1e-4);
  }
}

TEST_CASE("finite-difference Taylor coefficients of exp") {
  FitTarget t;
  t.value = [](double x) { return std::exp(x); };
  const auto p = taylor_fit({TaylorMethod{0.0, 3, 1.0}, t});
  CHECK(std::abs(p.coeff({0}) - 1.0) < 1e-12);
  CHECK(std::abs(p.coeff({1}) - 1.0) < 1e-7);
  CHECK(std::abs(p.coeff({2}) - 0.5) < 1e-5);
  CHECK(std::abs(p.coeff({3}) - 1.0 / 6.0) < 1e-3);
}

TEST_CASE("weighted LSM matches an extended-precision normal-equations solve") {
  const double a = 0.8, sigma = 0.5;
  const auto target = FitTarget::tanh_drift(a, sigma);
  const auto m = benes_method(2.0);
  const auto p = lsm_fit({m, target});
  const auto ref = normal_equations(m, target, {1, 3, 5, 7, 9, 11});
  unsigned j = 0;
  for (unsigned k : {1u, 3u, 5u, 7u, 9u, 11u}) {
    const double got = p.coeff({k}).real();
    CHECK(std::abs(got - static_cast<double>(ref[j])) <= 1e-8 * std::abs(static_cast<double>(ref[j])));
    ++j;
  }
}

TEST_CASE("weighted LSM is a minimizer") {
  const auto target = FitTarget::tanh_drift(1.5, 0.5);
  const auto m = benes_method(1.0);
  const auto p = lsm_fit({m, target});
  const double r0 = weighted_residual(m, target, p);
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    MultiPoly q = p;
    for (unsigned k : {1u, 3u, 5u, 7u, 9u, 11u}) q.add_term({k}, 1e-4 * g(rng) / std::pow(2.5, k));
    CHECK(weighted_residual(m, target, q) >= r0);
  }
}

TEST_CASE("parity restricts the free powers") {
  FitTarget t;
  t.value = [](double x) { return std::cos(x) + 0.3 * x; };
  auto m = benes_method(1.0);
  m.degree = 6;
  const auto odd = lsm_fit({m, t});
  for (const auto& [e, c] : odd.terms()) CHECK(e[0] % 2 == 1);
  m.parity = Parity::Even;
  const auto even = lsm_fit({m, t});
  for (const auto& [e, c] : even.terms()) CHECK(e[0] % 2 == 0);
  m.parity = Parity::Any;
  CHECK(lsm_fit({m, t}).degree() == 6);
}

TEST_CASE("odd fit of an odd target is odd at every sample") {
  const auto p = lsm_fit({benes_method(0.5), FitTarget::tanh_drift(2.0, 0.5)});
  for (double x : {0.3, 1.1, 2.4}) CHECK(eval(p, -x) == doctest::Approx(-eval(p, x)).epsilon(1e-14));
}

TEST_CASE("polynomials of the admissible class are recovered") {
  FitTarget t;
  t.value = [](double x) { return 0.4 * x - 0.2 * x * x * x + 0.01 * std::pow(x, 7); };
  for (double w : {0.0, 2.0, 4.0}) {
    const auto m = benes_method(w);
    const auto p = lsm_fit({m, t});
    CHECK(weighted_residual(m, t, p) < 1e-10);
    CHECK(std::abs(p.coeff({3}) - Complex(-0.2)) < 1e-8);
  }
}

TEST_CASE("heavier weights pull the slope at the origin toward the target") {
  // d/dx a sigma tanh(a x / sigma) at 0 is a^2
  const double a = 2.0;
  double prev = INFINITY;
  for (double w : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    const auto p = lsm_fit({benes_method(w), FitTarget::tanh_drift(a, 0.5)});
    const double gap = std::abs(p.coeff({1}).real() - a * a);
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("abscissae include both ends") {
  const auto x = lsm_abscissae(benes_method(1.0));
  CHECK(x.size() == 51);
  CHECK(x.front() == -2.5);
  CHECK(x.back() == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("stable reach") {
  CHECK(stable_reach(MultiPoly::variable(1, 0), 5.0, 2.0) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(stable_reach(MultiPoly::monomial({3}), 5.0, 8.0) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(stable_reach(MultiPoly::variable(1, 0, 0.1), 5.0, 8.0) == 5.0);
}

TEST_CASE("invalid fits are rejected") {
  auto m = benes_method(1.0);
  m.weight_w = -1.0;
  CHECK_THROWS_AS(lsm_fit({m, FitTarget::tanh_drift(1, 0.5)}), FitError);
  m = benes_method(1.0);
  m.step = 1.0;  // 6 samples for 6 odd coefficients
  CHECK_THROWS_AS(lsm_fit({m, FitTarget::tanh_drift(1, 0.5)}), FitError);
  m = benes_method(1.0);
  m.step = 0.0;
  CHECK_THROWS_AS(lsm_fit({m, FitTarget::tanh_drift(1, 0.5)}), FitError);
  CHECK_THROWS_AS(taylor_fit({benes_method(1.0), FitTarget::tanh_drift(1, 0.5)}), FitError);
  CHECK_THROWS_AS(FitTarget::table({1.0, 0.5}, {0.0, 1.0}), FitError);
  // sqrt has no finite derivatives at 0
  CHECK_THROWS_AS(taylor_fit({TaylorMethod{0.0, 2, 1.0}, FitTarget::sqrt_vol(1.0)}), FitError);
}

TEST_CASE("table targets interpolate linearly") {
  const auto t = FitTarget::table({0.0, 1.0, 3.0}, {0.0, 2.0, 0.0});
  CHECK(t.value(0.5) == doctest::Approx(1.0));
  CHECK(t.value(2.0) == doctest::Approx(1.0));
}
