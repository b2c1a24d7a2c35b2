#include <doctest.h>

#include <random>

#include "momfilter/model.hpp"

using namespace momfilter;

namespace {

// value of a descriptor with D replaced by a point x (the classical symbol)
Complex symbol_at(const OperatorDescriptor& op, const std::vector<Complex>& xi,
                  const std::vector<Complex>& x) {
  Complex s = 0.0;
  for (const auto& t : op) s += poly_eval(t.xi_factor, xi) * poly_eval(t.x_poly, x);
  return s;
}

MultiPoly random_poly(std::mt19937& rng, std::size_t n, unsigned deg) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> e(0, static_cast<int>(deg));
  MultiPoly p(n);
  for (int k = 0; k < 4; ++k) {
    Exponent a(n);
    for (auto& v : a) v = static_cast<unsigned>(e(rng));
    p.add_term(a, u(rng));
  }
  return p;
}

PerturbedModel random_model(std::mt19937& rng, std::size_t n, std::size_t d, std::size_t m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd f(n);
  for (auto& v : f) v = u(rng);
  Eigen::MatrixXd nu = Eigen::MatrixXd::Identity(n, d);
  for (Eigen::Index i = 0; i < nu.rows(); ++i)
    for (Eigen::Index j = 0; j < nu.cols(); ++j) nu(i, j) += 0.3 * u(rng);
  auto model = PerturbedModel::free(f, nu, m);
  for (auto& p : model.F) p = random_poly(rng, n, 2);
  for (auto& p : model.sigma.entries) p = random_poly(rng, n, 1);
  for (auto& p : model.gamma.entries) p = random_poly(rng, n, 1);
  for (auto& p : model.H) p = random_poly(rng, n, 2);
  return model;
}

}  // namespace

TEST_CASE("generator symbol splits by powers of eps") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 1 + trial % 2, d = n + trial % 3, m = 1 + trial % 2;
    const auto model = random_model(rng, n, d, m);
    const OperatorSymbols sym(model);
    std::vector<double> xi(n);
    std::vector<Complex> xic(n), x(n);
    Eigen::VectorXd xr(n);
    for (std::size_t i = 0; i < n; ++i) {
      xi[i] = u(rng);
      xic[i] = xi[i];
      xr(i) = u(rng);
      x[i] = xr(i);
    }
    const auto& nu = model.nu.at(0.0);
    auto full = [&](double eps) {
      Eigen::MatrixXd s = nu;
      Eigen::MatrixXd g(n, m);
      Eigen::VectorXd drift = model.f.at(0.0);
      for (std::size_t i = 0; i < n; ++i) {
        drift(i) += eps * poly_eval(model.F[i], x).real();
        for (std::size_t k = 0; k < d; ++k) s(i, k) += eps * poly_eval(model.sigma(i, k), x).real();
        for (std::size_t k = 0; k < m; ++k) g(i, k) = eps * poly_eval(model.gamma(i, k), x).real();
      }
      Eigen::Map<const Eigen::VectorXd> v(xi.data(), static_cast<Eigen::Index>(n));
      const Eigen::MatrixXd q = s * s.transpose() + g * g.transpose();
      return Complex(-0.5 * v.dot(q * v), v.dot(drift));
    };
    for (double eps : {0.0, 0.3, 1.0}) {
      const Complex lhs = sym.a0(0.0, xi) + eps * symbol_at(sym.a1(0.0), xic, x) +
                          eps * eps * symbol_at(sym.a2(0.0), xic, x);
      CHECK(std::abs(lhs - full(eps)) <= 1e-12 * (1.0 + std::abs(lhs)));
    }
    // obs_k = H_k + i xi . gamma_.k
    for (std::size_t k = 0; k < m; ++k) {
      Complex expect = poly_eval(model.H[k], x);
      for (std::size_t i = 0; i < n; ++i) expect += Complex(0, xi[i]) * poly_eval(model.gamma(i, k), x);
      CHECK(std::abs(symbol_at(sym.obs(0.0)[k], xic, x) - expect) <= 1e-12);
    }
  }
}

TEST_CASE("CIR symbols") {
  // F = theta(mu - x), sigma(x) = s R(x), nu = s sqrt(mu)
  const double theta = 0.1, mu = 1.0, s = 0.15;
  auto model = PerturbedModel::free(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, s * std::sqrt(mu)), 1);
  model.F[0] = MultiPoly::univariate({theta * mu, -theta});
  model.sigma(0, 0) = MultiPoly::univariate({-0.5 * s, 0.5 * s});
  const OperatorSymbols sym(model);
  const double xi[] = {2.0};
  CHECK(std::abs(sym.a0(0.5, xi) - Complex(-0.5 * s * s * mu * 4.0)) < 1e-15);
  CHECK(std::abs(sym.a0_integral(0.0, 3.0, xi) - Complex(-0.5 * s * s * mu * 4.0 * 3.0)) < 1e-15);
  const auto& a1 = sym.a1(0.0);
  REQUIRE(a1.size() == 2);
  CHECK(a1[0].xi_factor == MultiPoly::monomial({1}));
  CHECK(a1[0].x_poly == Complex(0, 1) * model.F[0]);
  CHECK(a1[1].xi_factor == MultiPoly::monomial({2}));
  CHECK(a1[1].x_poly == Complex(-s * std::sqrt(mu)) * model.sigma(0, 0));
  REQUIRE(sym.a2(0.0).size() == 1);
  CHECK(sym.a2(0.0)[0].x_poly == Complex(-0.5) * model.sigma(0, 0) * model.sigma(0, 0));
  CHECK(descriptor_degree(sym.a2(0.0)) == 2);
}

TEST_CASE("Benes observation symbol") {
  auto model = PerturbedModel::free(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 0.5), 1);
  model.H[0] = MultiPoly::univariate({0.5, 0.8});
  const OperatorSymbols sym(model);
  REQUIRE(sym.obs(0.0).size() == 1);
  REQUIRE(sym.obs(0.0)[0].size() == 1);
  CHECK(sym.obs(0.0)[0][0].xi_factor == MultiPoly::constant(1, 1.0));
  CHECK(sym.obs(0.0)[0][0].x_poly == model.H[0]);
  CHECK(sym.a2(0.0).empty());
}

TEST_CASE("piecewise schedules integrate exactly") {
  auto model = PerturbedModel::free(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 1.0), 1);
  Eigen::VectorXd f1(1), f2(1);
  f1 << 1.0;
  f2 << -2.0;
  model.f = PiecewiseConstant<Eigen::VectorXd>({0.0, 1.0}, {f1, f2});
  const OperatorSymbols sym(model);
  const auto inc = sym.a0_increment(0.5, 1.5);
  CHECK(inc.lin(0) == doctest::Approx(0.5 * 1.0 + 0.5 * -2.0).epsilon(1e-15));
  CHECK(inc.quad(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  const double xi[] = {1.0};
  CHECK(sym.a0(0.99, xi).imag() == 1.0);
  CHECK(sym.a0(1.0, xi).imag() == -2.0);
}

TEST_CASE("schedule validation") {
  CHECK_THROWS_AS(PiecewiseConstant<double>({0.5}, {1.0}), ConfigError);
  CHECK_THROWS_AS(PiecewiseConstant<double>({0.0, 0.0}, {1.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(PiecewiseConstant<double>({0.0, 1.0}, {1.0}), ConfigError);
}

TEST_CASE("model validation") {
  auto model = PerturbedModel::free(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), 1);
  CHECK_NOTHROW(model.validate());
  auto bad = model;
  bad.F[0] = MultiPoly(3);
  CHECK_THROWS_AS(bad.validate(), DimensionError);
  bad = model;
  bad.nu = PiecewiseConstant<Eigen::MatrixXd>(Eigen::MatrixXd::Zero(2, 2));
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = model;
  bad.eps = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = model;
  bad.H.clear();
  CHECK_THROWS_AS(bad.validate(), DimensionError);
}

TEST_CASE("initial law validation") {
  CHECK_THROWS_AS(InitialLaw::gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, -1.0)), ConfigError);
  CHECK_THROWS_AS(InitialLaw::gaussian(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(1, 1)), DimensionError);
  CHECK_THROWS_AS(InitialLaw::gram_charlier(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), MultiPoly(2)),
                  DimensionError);
}

TEST_CASE("Gaussian characteristic function") {
  // x0 = 1, Sigma0 = 0.04 at xi = 2: exp(2i - 0.08)
  const auto law = InitialLaw::gaussian(Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(1, 1, 0.04));
  const double xi[] = {2.0};
  CHECK(std::abs(initial_cf(law, xi) - std::exp(Complex(-0.08, 2.0))) < 1e-15);
  const auto dirac = InitialLaw::dirac(Eigen::VectorXd::Constant(1, 1.0));
  CHECK(std::abs(initial_cf(dirac, xi) - std::exp(Complex(0.0, 2.0))) < 1e-15);
}

TEST_CASE("Gram-Charlier characteristic function matches quadrature") {
  // density P(z) N(z; 0.3, 0.5); P = 1 + 0.2 z - 0.1 z^2 + 0.05 z^3 (positive on the bulk)
  const auto P = MultiPoly::univariate({1.0, 0.2, -0.1, 0.05});
  const double m = 0.3, v = 0.5;
  const auto law = InitialLaw::gram_charlier(Eigen::VectorXd::Constant(1, m), Eigen::MatrixXd::Constant(1, 1, v), P);
  for (double xi : {-1.7, 0.0, 0.4, 2.5}) {
    Complex q = 0.0;
    const int N = 20000;
    const double lo = m - 12.0, hi = m + 12.0, h = (hi - lo) / N;
    for (int k = 0; k <= N; ++k) {
      const double z = lo + k * h, w = (k == 0 || k == N) ? 0.5 : 1.0;
      const double g = std::exp(-0.5 * (z - m) * (z - m) / v) / std::sqrt(2 * M_PI * v);
      q += w * h * poly_eval(P, Complex(z)) * g * std::exp(Complex(0, xi * z));
    }
    const double x[] = {xi};
    CHECK(std::abs(initial_cf(law, x) - q) < 1e-10);
  }
}

TEST_CASE("Gram-Charlier prefactor z gives i Sigma0 xi") {
  const auto law = InitialLaw::gram_charlier(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 2.0),
                                             MultiPoly::variable(1, 0));
  CHECK(initial_cf_polynomial(law) == MultiPoly::variable(1, 0, Complex(0, 2.0)));
  CHECK(initial_cf_polynomial(InitialLaw::dirac(Eigen::VectorXd::Zero(1))) == MultiPoly::constant(1, 1.0));
}

TEST_CASE("free moments") {
  auto model = PerturbedModel::free(Eigen::VectorXd::Constant(1, 0.5), Eigen::MatrixXd::Constant(1, 1, 0.2), 1);
  const auto law = InitialLaw::gaussian(Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(1, 1, 0.1));
  const auto fm = free_moments(model, law, 2.0);
  CHECK(fm.mean(0) == doctest::Approx(2.0));
  CHECK(fm.cov(0, 0) == doctest::Approx(0.1 + 0.04 * 2.0));
  CHECK_THROWS_AS(free_moments(model, law, -1.0), ConfigError);
}
