#include <doctest.h>

#include <random>

#include "momfilter/kernels.hpp"

using namespace momfilter::kernels;

namespace {

std::vector<Complex> random_field(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Complex> v(n);
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v;
}

double max_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace

TEST_CASE("shape strides are row-major") {
  const Shape s{{3, 4, 5}};
  CHECK(s.size() == 60);
  CHECK(s.stride(2) == 1);
  CHECK(s.stride(1) == 5);
  CHECK(s.stride(0) == 20);
}

TEST_CASE("serial and parallel differencing agree on a large grid") {
  // 257 x 129 is far above the parallel threshold
  const Shape s{{257, 129}};
  const auto in = random_field(s.size(), 1);
  for (int order : {2, 4})
    for (std::size_t axis : {0u, 1u}) {
      std::vector<Complex> a(s.size()), b(s.size());
      diff_axis_serial(in, a, s, axis, 0.1, order);
      diff_axis_parallel(in, b, s, axis, 0.1, order);
      CHECK(max_diff(a, b) == 0.0);
    }
}

TEST_CASE("serial and parallel pointwise kernels agree") {
  const std::size_t n = 50000;
  const auto f = random_field(n, 2), src = random_field(n, 3), y0 = random_field(n, 4);
  auto a = y0, b = y0;
  exp_update_serial(f, src, a);
  exp_update_parallel(f, src, b);
  CHECK(max_diff(a, b) == 0.0);
  axpy_serial(Complex(0.5, -2.0), src, a);
  axpy_parallel(Complex(0.5, -2.0), src, b);
  CHECK(max_diff(a, b) == 0.0);
  CHECK(std::abs(a[7] - f[7] * (y0[7] + src[7]) - Complex(0.5, -2.0) * src[7]) < 1e-12);
}

TEST_CASE("serial and parallel scale and scan agree") {
  const std::size_t n = 50001;
  const auto f = random_field(n, 6), y0 = random_field(n, 7);
  auto a = y0, b = y0;
  scale_serial(f, a);
  scale_parallel(f, b);
  CHECK(max_diff(a, b) == 0.0);
  CHECK(a[11] == f[11] * y0[11]);
  const auto sa = scan_serial(a), sb = scan_parallel(a);
  CHECK(sa.max_norm2 == sb.max_norm2);
  CHECK(sa.max_mirror_gap2 == sb.max_mirror_gap2);
  double top = 0.0;
  for (const auto& v : a) top = std::max(top, std::norm(v));
  CHECK(sa.max_norm2 == top);
  // a Hermitian field has no mirror gap
  std::vector<Complex> h(n);
  for (std::size_t k = 0; k < n; ++k) h[k] = k < n / 2 ? a[k] : (k == n / 2 ? Complex(1.5) : std::conj(a[n - 1 - k]));
  CHECK(scan_parallel(h).max_mirror_gap2 == 0.0);
  h[3] += Complex(0.0, 0.25);
  CHECK(scan_serial(h).max_mirror_gap2 == doctest::Approx(0.0625));
}

TEST_CASE("serial and parallel inversion agree on a 2-D plan") {
  InversionPlan plan;
  plan.xi_shape = Shape{{65, 65}};
  plan.z_shape = Shape{{80, 70}};
  for (std::size_t a = 0; a < 2; ++a) {
    std::vector<double> xi(65), w(65, 0.1);
    for (std::size_t k = 0; k < 65; ++k) xi[k] = -3.2 + 0.1 * static_cast<double>(k);
    plan.xi.push_back(xi);
    plan.weights.push_back(w);
    std::vector<double> z(plan.z_shape.extent[a]);
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = -2.0 + 0.05 * static_cast<double>(k);
    plan.z.push_back(z);
  }
  const auto rho = random_field(plan.xi_shape.size(), 5);
  std::vector<Complex> a(plan.z_shape.size()), b(plan.z_shape.size());
  invert_serial(plan, rho, a);
  invert_parallel(plan, rho, b);
  CHECK(max_diff(a, b) <= 1e-12);
  // brute-force check of one output point
  const std::size_t p = 17 * 70 + 23;
  Complex direct = 0.0;
  for (std::size_t i = 0; i < 65; ++i)
    for (std::size_t j = 0; j < 65; ++j)
      direct += 0.01 * std::exp(Complex(0.0, -(plan.xi[0][i] * plan.z[0][17] + plan.xi[1][j] * plan.z[1][23]))) *
                rho[i * 65 + j];
  CHECK(std::abs(a[p] - direct) < 1e-11);
}

TEST_CASE("differencing is exact on polynomials of the stencil degree") {
  const Shape s{{21}};
  std::vector<Complex> in(21), out(21);
  const double h = 0.25;
  for (int order : {2, 4}) {
    for (std::size_t k = 0; k < 21; ++k) {
      const double x = h * static_cast<double>(k);
      in[k] = order == 4 ? x * x * x * x : x * x;
    }
    diff_axis_serial(in, out, s, 0, h, order);
    for (std::size_t k = 0; k < 21; ++k) {
      const double x = h * static_cast<double>(k);
      const double d = order == 4 ? 4 * x * x * x : 2 * x;
      CHECK(std::abs(out[k] - Complex(0.0, -d)) < 1e-10);
    }
  }
}

TEST_CASE("stencil bandwidths") {
  CHECK(stencil_kappa(2) == 1.0);
  CHECK(stencil_kappa(4) == doctest::Approx(1.3722).epsilon(1e-4));
  CHECK_THROWS(stencil_kappa(3));
}
