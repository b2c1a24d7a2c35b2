#include <doctest.h>

#include <cmath>
#include <fstream>

#include "momfilter/simulate.hpp"

using namespace momfilter;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("momfilter_test_" + name);
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p) << s;
}

PerturbedModel brownian(double eps) {
  auto model = PerturbedModel::free(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 1.0), 1);
  model.eps = eps;
  return model;
}

}  // namespace

TEST_CASE("Philox known-answer vectors") {
  // Random123 reference values
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
        std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("normal streams are reproducible and standard") {
  NormalStream a(42, 1), b(42, 1), c(42, 2), d(43, 1);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.next();
    CHECK(x == b.next());
    differs_stream |= x != c.next();
    differs_seed |= x != d.next();
  }
  CHECK(differs_stream);
  CHECK(differs_seed);

  NormalStream s(7, 0);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0, below = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.next();
    m1 += x;
    m2 += x * x;
    m4 += x * x * x * x;
    below += x < 1.0;
  }
  m1 /= n, m2 /= n, m4 /= n, below /= n;
  // tolerances are about 4 standard errors
  CHECK(std::abs(m1) < 4.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
  CHECK(std::abs(below - 0.841344746) < 4.0 * std::sqrt(0.84 * 0.16 / n));
}

TEST_CASE("simulated paths depend only on the seed") {
  const auto model = brownian(1.0);
  const auto law = InitialLaw::gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, 0.3));
  const auto p = simulate_paths(model, law, 1.0, 50, 11);
  const auto q = simulate_paths(model, law, 1.0, 50, 11);
  const auto r = simulate_paths(model, law, 1.0, 50, 12);
  CHECK(p.dY == q.dY);
  CHECK(*p.X == *q.X);
  CHECK(p.dY != r.dY);
  CHECK(p.times.size() == 51);
  CHECK(p.times.back() == 1.0);
}

TEST_CASE("observation noise without signal is Brownian") {
  // eps = 0 leaves dY = dW
  const auto model = brownian(0.0);
  const auto law = InitialLaw::dirac(Eigen::VectorXd::Zero(1));
  const std::size_t steps = 100000;
  const double T = 10.0, dt = T / steps;
  const auto p = simulate_paths(model, law, T, steps, 5);
  double m1 = 0, m2 = 0, lag = 0;
  for (Eigen::Index i = 0; i < p.dY.rows(); ++i) {
    const double v = p.dY(i, 0) / std::sqrt(dt);
    m1 += v;
    m2 += v * v;
    if (i) lag += v * p.dY(i - 1, 0) / std::sqrt(dt);
  }
  const double n = static_cast<double>(steps);
  CHECK(std::abs(m1 / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(m2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(lag / n) < 4.0 / std::sqrt(n));
  // the signal is driven by its own noise
  double cross = 0;
  for (Eigen::Index i = 0; i < p.dY.rows(); ++i) cross += p.dY(i, 0) * ((*p.X)(i + 1, 0) - (*p.X)(i, 0));
  CHECK(std::abs(cross / T) < 4.0 / std::sqrt(n));
}

TEST_CASE("terminal law of a linear signal") {
  // dX = -X dt + 0.5 dV, X0 ~ N(1, 0.2): E X_T = e^{-T}, Var = 0.2 e^{-2T} + 0.125 (1 - e^{-2T})
  auto model = brownian(1.0);
  model.f = PiecewiseConstant<Eigen::VectorXd>(Eigen::VectorXd::Zero(1));
  model.nu = PiecewiseConstant<Eigen::MatrixXd>(Eigen::MatrixXd::Constant(1, 1, 0.5));
  model.F[0] = MultiPoly::univariate({0.0, -1.0});
  const auto law = InitialLaw::gaussian(Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(1, 1, 0.2));
  const double T = 1.0;
  const int runs = 4000;
  double s1 = 0, s2 = 0;
  for (int r = 0; r < runs; ++r) {
    const auto p = simulate_paths(model, law, T, 200, 1000 + static_cast<std::uint64_t>(r));
    const double x = p.X->bottomRows(1)(0, 0);
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / runs, var = s2 / runs - mean * mean;
  const double e = std::exp(-T), v = 0.2 * e * e + 0.125 * (1 - e * e);
  // Euler bias at dt = 5e-3 is well inside the sampling error
  CHECK(std::abs(mean - e) < 4.0 * std::sqrt(v / runs));
  CHECK(std::abs(var - v) < 4.0 * v * std::sqrt(2.0 / runs));
}

TEST_CASE("path files round trip") {
  const auto model = brownian(1.0);
  auto p = simulate_paths(model, InitialLaw::dirac(Eigen::VectorXd::Zero(1)), 2.0, 40, 3);
  for (bool cumulative : {false, true}) {
    const auto f = temp_file(cumulative ? "cum.csv" : "inc.csv");
    save_path(p, f, cumulative);
    const auto q = load_path(f);
    REQUIRE(q.times.size() == p.times.size());
    for (std::size_t i = 0; i < p.times.size(); ++i) CHECK(q.times[i] == p.times[i]);
    // increments survive exactly; differencing a cumulative column costs rounding
    CHECK((q.dY - p.dY).cwiseAbs().maxCoeff() <= (cumulative ? 1e-14 : 0.0));
    REQUIRE(q.X.has_value());
    CHECK(*q.X == *p.X);
    std::filesystem::remove(f);
  }
  const auto Y = p.cumulative();
  CHECK(Y(0, 0) == 0.0);
  CHECK(Y(40, 0) == doctest::Approx(p.dY.sum()).epsilon(1e-12));
}

TEST_CASE("malformed path files name the offending row") {
  const auto f = temp_file("bad.csv");
  auto message = [&](const std::string& text) {
    write_text(f, text);
    try {
      load_path(f);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("t,dY\n0,0\n0.1,abc\n").find("row 2") != std::string::npos);
  CHECK(message("t,dY\n0,0\n0.1,0.2,3\n").find("row 2") != std::string::npos);
  CHECK(message("t,dY\n0,0\n0.1,0.2\n0.1,0.3\n").find("row 3") != std::string::npos);
  CHECK(message("t,dY\n0,0.5\n0.1,0.2\n").find("first dY row must be 0") != std::string::npos);
  CHECK(message("t,Y\n0,1\n0.1,0.2\n").find("Y_0 = 0") != std::string::npos);
  CHECK(message("t,dY\n0.5,0\n1,0.2\n").find("t = 0") != std::string::npos);
  CHECK(message("t,Z\n0,0\n").find("unknown path column") != std::string::npos);
  CHECK(message("").find("empty") != std::string::npos);
  std::filesystem::remove(f);
  CHECK_THROWS_AS(load_path(temp_file("missing.csv")), Error);
}

TEST_CASE("simulation rejects bad arguments") {
  const auto model = brownian(1.0);
  const auto law = InitialLaw::dirac(Eigen::VectorXd::Zero(1));
  CHECK_THROWS_AS(simulate_paths(model, law, 1.0, 0, 1), ConfigError);
  CHECK_THROWS_AS(simulate_paths(model, law, -1.0, 10, 1), ConfigError);
}
