#include "momfilter/zakai.hpp"

#include <cmath>

namespace momfilter {

NumericalBlowUp::NumericalBlowUp(std::size_t step_, std::size_t mode_, std::size_t order_,
                                 double value_)
    : Error("numerical blow-up at step " + std::to_string(step_) + ", mode " +
            std::to_string(mode_) + ", order " + std::to_string(order_) +
            " (|value| = " + std::to_string(value_) + ")"),
      step(step_),
      mode(mode_),
      order(order_),
      value(value_) {}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  if (substeps > 1 && substep_order > max_order)
    throw ConfigError("substep_order must not exceed max_order");
  if (spectral.stencil_order != 2 && spectral.stencil_order != 4)
    throw ConfigError("stencil order must be 2 or 4");
  if (!(blowup_threshold > 0.0)) throw ConfigError("blow-up threshold must be positive");
}

ExpansionRun::ExpansionRun(const PerturbedModel& model, const InitialLaw& law, const XiGrid& grid,
                           SolverConfig config)
    : model_(model), symbols_(model), config_(std::move(config)), state_{grid, {}, 0.0} {
  config_.validate();
  law.validate();
  if (grid.dim() != model.n || law.dim() != model.n)
    throw DimensionError("grid, law and model dimensions disagree");
  if (!config_.spectral.carrier.empty() && config_.spectral.carrier.size() != model.n)
    throw DimensionError("carrier must have one entry per signal dimension");
  unsigned deg = std::max(descriptor_degree(symbols_.a1(0.0)), descriptor_degree(symbols_.a2(0.0)));
  for (const auto& op : symbols_.obs(0.0)) deg = std::max(deg, descriptor_degree(op));
  for (std::size_t a = 0; a < grid.dim(); ++a)
    if (deg + static_cast<unsigned>(config_.spectral.stencil_order) >= grid.modes(a))
      throw ConfigError("operator degree does not fit on the xi-grid");

  const std::size_t N = grid.size();
  xi_points_.reserve(N);
  for (std::size_t k = 0; k < N; ++k) xi_points_.push_back(grid.point(k));
  state_.orders.assign(config_.max_order + 1, ComplexArray(N, Complex{}));
  for (std::size_t k = 0; k < N; ++k) state_.orders[0][k] = initial_cf(law, xi_points_[k]);
}

DerivativeTable& ExpansionRun::table(unsigned order) {
  if (tables_.size() <= order) tables_.resize(order + 1);
  if (!tables_[order])
    tables_[order] =
        std::make_unique<DerivativeTable>(state_.grid, state_.orders[order], config_.spectral);
  return *tables_[order];
}

void ExpansionRun::step(std::span<const double> dY) {
  if (!dY.empty() && dY.size() != model_.m)
    throw DimensionError("observation increment has wrong dimension");
  const double dt = config_.dt;
  const double t = t_origin_ + static_cast<double>(steps_) * dt;
  const unsigned J = config_.active_orders();
  const std::size_t N = state_.grid.size();

  tables_.clear();
  std::vector<ComplexArray> src(J + 1);
  for (unsigned j = 1; j <= J; ++j) src[j].assign(N, Complex{});
  if (J > 0) sources(t, dY, src);
  tables_.clear();

  // the increment only changes at schedule breaks (up to rounding in t + dt)
  const A0Increment inc = symbols_.a0_increment(t, t + dt);
  auto close = [](const auto& a, const auto& b) {
    return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + b.cwiseAbs().maxCoeff());
  };
  if (factor_.size() != N || !close(inc.lin, factor_inc_.lin) || !close(inc.quad, factor_inc_.quad)) {
    factor_.resize(N);
    for (std::size_t k = 0; k < N; ++k) factor_[k] = std::exp(inc.at(xi_points_[k]));
    factor_inc_ = inc;
  }
  kernels::scale(config_.spectral.policy, factor_, state_.orders[0]);
  for (unsigned j = 1; j <= J; ++j)
    kernels::exp_update(config_.spectral.policy, factor_, src[j], state_.orders[j]);

  ++steps_;
  state_.t = t_origin_ + static_cast<double>(steps_) * dt;
  check(state_.t);
}

void ExpansionRun::check(double t) {
  const double limit = config_.blowup_threshold * mass_scale_;
  const auto policy = config_.spectral.policy;
  std::vector<kernels::Scan> scans;
  for (const auto& o : state_.orders) scans.push_back(kernels::scan(policy, o));
  // the order-0 scale floors the residual so an order that is zero up to
  // rounding does not read as asymmetric
  const double scale = std::sqrt(scans[0].max_norm2);
  double sym = 0.0;
  for (std::size_t j = 0; j < scans.size(); ++j) {
    // NaN fails the comparison, so it is caught too
    if (!(scans[j].max_norm2 <= limit * limit)) {
      const auto& o = state_.orders[j];
      std::size_t k = 0;
      while (k + 1 < o.size() && std::norm(o[k]) <= limit * limit) ++k;
      throw NumericalBlowUp(steps_, k, j, std::abs(o[k]));
    }
    const double top = std::max(std::sqrt(scans[j].max_norm2), scale);
    if (top > 0.0) sym = std::max(sym, std::sqrt(scans[j].max_mirror_gap2) / top);
  }
  max_symmetry_ = std::max(max_symmetry_, sym);
  if (config_.record_diagnostics) {
    const double mass = state_.combined(model_.eps)[state_.grid.center()].real();
    diagnostics_.push_back({t, mass, sym});
  }
}

void ExpansionRun::collapse(unsigned k) {
  const std::size_t N = state_.grid.size();
  double w = model_.eps;
  for (unsigned j = 1; j < state_.orders.size(); ++j, w *= model_.eps) {
    if (j <= k && w != 0.0)
      for (std::size_t i = 0; i < N; ++i) state_.orders[0][i] += w * state_.orders[j][i];
    std::fill(state_.orders[j].begin(), state_.orders[j].end(), Complex{});
  }
  mass_scale_ = std::max(1.0, std::abs(state_.orders[0][state_.grid.center()]));
}

void ZakaiRun::sources(double t, std::span<const double> dY, std::vector<ComplexArray>& src) {
  const OperatorDescriptor& a1 = symbols_.a1(t);
  const OperatorDescriptor& a2 = symbols_.a2(t);
  const auto& obs = symbols_.obs(t);
  const double dt = config_.dt;
  for (unsigned j = 1; j < src.size(); ++j) {
    if (!a1.empty()) table(j - 1).apply_into(a1, dt, src[j]);
    if (j >= 2 && !a2.empty()) table(j - 2).apply_into(a2, dt, src[j]);
    for (std::size_t k = 0; k < dY.size(); ++k)
      if (!obs[k].empty() && dY[k] != 0.0) table(j - 1).apply_into(obs[k], dY[k], src[j]);
  }
}

SolverConfig resolve_grid(const PerturbedModel& model, const InitialLaw& law, SolverConfig config,
                          double horizon) {
  if (!config.grid) {
    FreeMoments fm = free_moments(model, law, horizon);
    config.grid = XiGrid::from_covariance(fm.cov, 129);
  }
  return config;
}

void drive(ExpansionRun& run, const ObservationPath* path, double horizon) {
  const SolverConfig& cfg = run.config();
  const double dt = cfg.dt;
  const auto nsteps = static_cast<std::size_t>(std::llround(horizon / dt));
  if (nsteps == 0 || std::abs(static_cast<double>(nsteps) * dt - horizon) > 1e-9 * horizon)
    throw ConfigError("horizon must be a positive multiple of dt");
  if (nsteps % cfg.substeps != 0)
    throw ConfigError("sub-period boundaries must align with the dt grid (" +
                      std::to_string(nsteps) + " steps, " + std::to_string(cfg.substeps) +
                      " sub-periods)");

  std::size_t ratio = 0;
  if (path) {
    path->validate();
    if (path->obs_dim() != run.model().m)
      throw DimensionError("observation path dimension does not match the model");
    if (horizon > path->horizon() * (1.0 + 1e-12))
      throw ConfigError("solver horizon exceeds the observation path");
    const double h = path->times[1] - path->times[0];
    const double r = dt / h;
    ratio = static_cast<std::size_t>(std::llround(r));
    if (ratio == 0 || std::abs(r - static_cast<double>(ratio)) > 1e-6)
      throw ConfigError("observation path must be sampled at dt or an integer fraction of it");
    for (std::size_t i = 0; i < path->times.size(); ++i)
      if (std::abs(path->times[i] - static_cast<double>(i) * h) > 1e-9 * std::max(1.0, path->horizon()))
        throw ConfigError("observation path must be uniformly sampled");
  }

  const std::size_t per = nsteps / cfg.substeps;
  const std::size_t m = run.model().m;
  std::vector<double> dY(path ? m : 0);
  for (std::size_t s = 0; s < nsteps; ++s) {
    if (path) {
      std::fill(dY.begin(), dY.end(), 0.0);
      for (std::size_t i = s * ratio; i < (s + 1) * ratio; ++i)
        for (std::size_t k = 0; k < m; ++k) dY[k] += path->dY(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
    run.step(dY);
    if (cfg.substeps > 1 && (s + 1) % per == 0 && s + 1 < nsteps) run.collapse(cfg.substep_order);
  }
}

SpectralState solve(const PerturbedModel& model, const InitialLaw& law,
                    const ObservationPath& path, const SolverConfig& config,
                    std::vector<StepDiagnostics>* diagnostics) {
  const double T = config.horizon > 0.0 ? config.horizon : path.horizon();
  SolverConfig cfg = resolve_grid(model, law, config, T);
  ZakaiRun run(model, law, *cfg.grid, cfg);
  drive(run, &path, T);
  if (diagnostics) *diagnostics = run.diagnostics();
  return run.state();
}

SpectralState solve_unconditional(const PerturbedModel& model, const InitialLaw& law, double T,
                                  const SolverConfig& config) {
  SolverConfig cfg = resolve_grid(model, law, config, T);
  ZakaiRun run(model, law, *cfg.grid, cfg);
  drive(run, nullptr, T);
  return run.state();
}

}  // namespace momfilter
