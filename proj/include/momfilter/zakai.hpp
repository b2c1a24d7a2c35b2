#pragma once

#include <memory>
#include <optional>

#include "momfilter/model.hpp"
#include "momfilter/simulate.hpp"
#include "momfilter/spectral.hpp"

namespace momfilter {

class NumericalBlowUp : public Error {
 public:
  NumericalBlowUp(std::size_t step, std::size_t mode, std::size_t order, double value);
  std::size_t step, mode, order;
  double value;
};

struct SolverConfig {
  unsigned max_order = 1;
  double dt = 1e-3;
  std::size_t substeps = 1;     // 1 = plain expansion
  unsigned substep_order = 1;   // orders kept inside each sub-period
  double horizon = 0.0;         // 0 = end of the observation path
  std::optional<XiGrid> grid;   // default: from the free covariance at the horizon
  SpectralOptions spectral;
  // |state| above threshold * max(1, |mass at last collapse|) aborts
  double blowup_threshold = 1e12;
  bool record_diagnostics = false;

  unsigned active_orders() const { return substeps > 1 ? substep_order : max_order; }
  void validate() const;
};

struct StepDiagnostics {
  double t, mass, symmetry_residual;
};

// Shared machinery of the Zakai and Kushner–Stratonovich recursions.
class ExpansionRun {
 public:
  ExpansionRun(const PerturbedModel& model, const InitialLaw& law, const XiGrid& grid,
               SolverConfig config);
  virtual ~ExpansionRun() = default;

  // Advances by config.dt; an empty dY drops the observation terms.
  void step(std::span<const double> dY);
  // orders[0] <- sum_{j<=k} eps^j orders[j], higher orders reset to zero
  void collapse(unsigned k);

  const SpectralState& state() const { return state_; }
  const PerturbedModel& model() const { return model_; }
  const OperatorSymbols& symbols() const { return symbols_; }
  const SolverConfig& config() const { return config_; }
  const std::vector<StepDiagnostics>& diagnostics() const { return diagnostics_; }
  double max_symmetry_residual() const { return max_symmetry_; }
  std::size_t steps_taken() const { return steps_; }

 protected:
  // fills src for orders 1..J from the pre-step snapshot
  virtual void sources(double t, std::span<const double> dY, std::vector<ComplexArray>& src) = 0;
  DerivativeTable& table(unsigned order);

  PerturbedModel model_;
  OperatorSymbols symbols_;
  SolverConfig config_;
  SpectralState state_;
  std::vector<std::vector<double>> xi_points_;

 private:
  void check(double t);
  std::vector<std::unique_ptr<DerivativeTable>> tables_;
  ComplexArray factor_;  // exp of the order-0 increment, reused while it is unchanged
  A0Increment factor_inc_;
  std::vector<StepDiagnostics> diagnostics_;
  std::size_t steps_ = 0;
  double mass_scale_ = 1.0;
  double max_symmetry_ = 0.0;
  double t_origin_ = 0.0;
};

class ZakaiRun : public ExpansionRun {
 public:
  using ExpansionRun::ExpansionRun;

 protected:
  void sources(double t, std::span<const double> dY, std::vector<ComplexArray>& src) override;
};

SolverConfig resolve_grid(const PerturbedModel& model, const InitialLaw& law, SolverConfig config,
                          double horizon);

// Drives any run over the path with the sub-period collapse schedule.
void drive(ExpansionRun& run, const ObservationPath* path, double horizon);

SpectralState solve(const PerturbedModel& model, const InitialLaw& law,
                    const ObservationPath& path, const SolverConfig& config,
                    std::vector<StepDiagnostics>* diagnostics = nullptr);
SpectralState solve_unconditional(const PerturbedModel& model, const InitialLaw& law, double T,
                                  const SolverConfig& config);

}  // namespace momfilter
