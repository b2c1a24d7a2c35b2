#include <doctest.h>

#include "momfilter/ks.hpp"

using namespace momfilter;

namespace {

PerturbedModel cubic_model() {
  auto model = PerturbedModel::free(Eigen::VectorXd::Constant(1, 0.1), Eigen::MatrixXd::Constant(1, 1, 0.5), 1);
  model.F[0] = MultiPoly::univariate({0.0, 0.5, 0.0, -0.1});
  model.sigma(0, 0) = MultiPoly::univariate({0.0, 0.05});
  model.H[0] = MultiPoly::univariate({0.5, 0.8});
  return model;
}

ObservationPath wiggly_path(std::size_t steps, double T) {
  ObservationPath p;
  for (std::size_t i = 0; i <= steps; ++i) p.times.push_back(T * static_cast<double>(i) / static_cast<double>(steps));
  p.dY.resize(static_cast<Eigen::Index>(steps), 1);
  for (Eigen::Index i = 0; i < p.dY.rows(); ++i) p.dY(i, 0) = 0.04 * std::sin(0.37 * static_cast<double>(i));
  return p;
}

}  // namespace

TEST_CASE("normalized expansion keeps unit mass at every order") {
  const auto model = cubic_model();
  const auto law = InitialLaw::dirac(Eigen::VectorXd::Zero(1));
  SolverConfig cfg;
  cfg.max_order = 2;
  cfg.dt = 1e-2;
  KsRun run(model, law, XiGrid::uniform(1, 97, 20.0), cfg);
  const auto path = wiggly_path(100, 1.0);
  const std::size_t c = run.state().grid.center();
  for (Eigen::Index i = 0; i < path.dY.rows(); ++i) {
    const double dY[] = {path.dY(i, 0)};
    ks_step(run, dY);
    const auto& o = run.state().orders;
    CHECK(std::abs(o[0][c] - 1.0) < 1e-13);
    CHECK(std::abs(o[1][c]) < 1e-13);
    CHECK(std::abs(o[2][c]) < 1e-13);
  }
}

TEST_CASE("one step of order 1 equals the normalized Zakai step") {
  const auto model = cubic_model();
  const auto law = InitialLaw::gaussian(Eigen::VectorXd::Constant(1, 0.2), Eigen::MatrixXd::Constant(1, 1, 0.1));
  const auto grid = XiGrid::uniform(1, 97, 15.0);
  SolverConfig cfg;
  cfg.dt = 1e-2;
  KsRun ks(model, law, grid, cfg);
  ZakaiRun zk(model, law, grid, cfg);
  const double dY[] = {0.07};
  ks.step(dY);
  zk.step(dY);
  // pi1 = rho1 - rho1(0) rho0 when rho0(0) = 1
  const auto& r = zk.state().orders;
  const Complex m1 = r[1][grid.center()];
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(ks.state().orders[0][k] - r[0][k]) < 1e-15);
    CHECK(std::abs(ks.state().orders[1][k] - (r[1][k] - m1 * r[0][k])) < 1e-14);
  }
}

TEST_CASE("one step of order 2 follows the Ito-reduced source") {
  const auto model = cubic_model();
  const auto law = InitialLaw::gaussian(Eigen::VectorXd::Constant(1, 0.2), Eigen::MatrixXd::Constant(1, 1, 0.1));
  const auto grid = XiGrid::uniform(1, 97, 15.0);
  SolverConfig cfg;
  cfg.max_order = 2;
  cfg.dt = 1e-2;
  KsRun ks(model, law, grid, cfg);
  const auto pi0 = ks.state().orders[0];
  const double dY[] = {0.07};
  ks.step(dY);

  // from a state with pi1 = 0: pi2 = E dt (A2 pi0 - h0 O pi0 + h0^2 pi0), h0 = H(D) pi0 at 0
  const OperatorSymbols sym(model);
  const auto a2 = apply_descriptor(pi0, sym.a2(0.0), grid);
  const auto opi0 = apply_descriptor(pi0, sym.obs(0.0)[0], grid);
  const OperatorDescriptor h_op{{MultiPoly::constant(1, 1.0), model.H[0]}};
  const Complex h0 = apply_descriptor(pi0, h_op, grid)[grid.center()];
  const auto inc = sym.a0_increment(0.0, cfg.dt);
  double err = 0.0, top = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Complex E = std::exp(inc.at(grid.point(k)));
    const Complex expect = E * cfg.dt * (a2[k] - h0 * opi0[k] + h0 * h0 * pi0[k]);
    err = std::max(err, std::abs(ks.state().orders[2][k] - expect));
    top = std::max(top, std::abs(expect));
  }
  CHECK(err <= 1e-13 * top);
}

TEST_CASE("normalized and unnormalized solutions agree to first order") {
  // the gap between the two densities is O(eps^2): halving eps quarters it
  auto model = cubic_model();
  const auto law = InitialLaw::dirac(Eigen::VectorXd::Zero(1));
  const auto path = wiggly_path(200, 1.0);
  const auto w = ZWindow::line(-2.0, 2.5, 181);
  std::vector<double> gaps;
  for (double eps : {0.2, 0.1}) {
    model.eps = eps;
    SolverConfig cfg;
    cfg.dt = 5e-3;
    cfg.grid = XiGrid::uniform(1, 129, 12.0);
    const auto ks = ks_solve(model, law, path, cfg);
    const auto zk = solve(model, law, path, cfg);
    const auto dk = invert_to_density(ks, eps, w), dz = invert_to_density(zk, eps, w);
    const auto nz = dz.normalized();
    double gap = 0.0;
    for (std::size_t i = 0; i < nz.size(); ++i) gap = std::max(gap, std::abs(dk.values[i] - nz[i]));
    gaps.push_back(gap);
  }
  CHECK(gaps[0] / gaps[1] == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("orders above 2 are rejected") {
  SolverConfig cfg;
  cfg.max_order = 3;
  CHECK_THROWS_AS(KsRun(cubic_model(), InitialLaw::dirac(Eigen::VectorXd::Zero(1)), XiGrid::uniform(1, 33, 5.0), cfg),
                  ConfigError);
}
