#include "momfilter/ks.hpp"

namespace momfilter {

namespace {

SolverConfig checked(SolverConfig config) {
  if (config.max_order > 2) throw ConfigError("Kushner-Stratonovich expansion supports orders 0-2");
  return config;
}

}  // namespace

KsRun::KsRun(const PerturbedModel& model, const InitialLaw& law, const XiGrid& grid,
             SolverConfig config)
    : ExpansionRun(model, law, grid, checked(std::move(config))) {
  for (const auto& h : model.H)
    h_ops_.push_back({OperatorTerm{MultiPoly::constant(model.n, 1.0), h}});
}

void KsRun::sources(double t, std::span<const double> dY, std::vector<ComplexArray>& src) {
  const OperatorDescriptor& a1 = symbols_.a1(t);
  const OperatorDescriptor& a2 = symbols_.a2(t);
  const auto& obs = symbols_.obs(t);
  const double dt = config_.dt;
  const unsigned J = static_cast<unsigned>(src.size()) - 1;
  const std::size_t center = state_.grid.center();
  const auto& pi0 = state_.orders[0];
  const auto& pi1 = state_.orders[1];
  const kernels::Policy pol = config_.spectral.policy;

  // pi^[i](H_k) from the snapshot
  std::vector<Complex> h0(dY.size()), h1(dY.size());
  for (std::size_t k = 0; k < dY.size(); ++k) {
    h0[k] = table(0).apply_at(h_ops_[k], center);
    if (J >= 2) h1[k] = table(1).apply_at(h_ops_[k], center);
  }

  // d pi1 = A0 pi1 dt + A1 pi0 dt + (O pi0 - pi0(H) pi0) dY
  if (!a1.empty()) table(0).apply_into(a1, dt, src[1]);
  for (std::size_t k = 0; k < dY.size(); ++k) {
    if (!obs[k].empty()) table(0).apply_into(obs[k], dY[k], src[1]);
    kernels::axpy(pol, -h0[k] * dY[k], pi0, src[1]);
  }
  if (J < 2) return;

  // d pi2 = A0 pi2 dt + {A1 pi1 + A2 pi0 - (O - pi0(H)) pi0 pi0(H)} dt
  //       + {(O - pi0(H)) pi1 - pi1(H) pi0} dY
  if (!a1.empty()) table(1).apply_into(a1, dt, src[2]);
  if (!a2.empty()) table(0).apply_into(a2, dt, src[2]);
  for (std::size_t k = 0; k < dY.size(); ++k) {
    if (!obs[k].empty()) {
      table(0).apply_into(obs[k], -dt * h0[k], src[2]);
      table(1).apply_into(obs[k], dY[k], src[2]);
    }
    kernels::axpy(pol, dt * h0[k] * h0[k] - h1[k] * dY[k], pi0, src[2]);
    kernels::axpy(pol, -h0[k] * dY[k], pi1, src[2]);
  }
}

void ks_step(KsRun& run, std::span<const double> dY) { run.step(dY); }

SpectralState ks_solve(const PerturbedModel& model, const InitialLaw& law,
                       const ObservationPath& path, const SolverConfig& config,
                       std::vector<StepDiagnostics>* diagnostics) {
  const double T = config.horizon > 0.0 ? config.horizon : path.horizon();
  SolverConfig cfg = resolve_grid(model, law, config, T);
  KsRun run(model, law, *cfg.grid, cfg);
  drive(run, &path, T);
  if (diagnostics) *diagnostics = run.diagnostics();
  return run.state();
}

}  // namespace momfilter
