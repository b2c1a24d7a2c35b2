#pragma once

#include "momfilter/zakai.hpp"

namespace momfilter {

// Normalized recursion, orders 0..2. pi^[i](H) is read off the pre-step
// snapshot as H(D_xi) pi^[i] at xi = 0.
class KsRun : public ExpansionRun {
 public:
  KsRun(const PerturbedModel& model, const InitialLaw& law, const XiGrid& grid,
        SolverConfig config);

 protected:
  void sources(double t, std::span<const double> dY, std::vector<ComplexArray>& src) override;

 private:
  std::vector<OperatorDescriptor> h_ops_;
};

void ks_step(KsRun& run, std::span<const double> dY);
SpectralState ks_solve(const PerturbedModel& model, const InitialLaw& law,
                       const ObservationPath& path, const SolverConfig& config,
                       std::vector<StepDiagnostics>* diagnostics = nullptr);

}  // namespace momfilter
