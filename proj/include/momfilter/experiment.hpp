#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "momfilter/fit.hpp"
#include "momfilter/ks.hpp"
#include "momfilter/reference.hpp"
#include "momfilter/zakai.hpp"

namespace momfilter {

enum class SolverKind { Zakai, Ks, Unconditional };

struct VariantSpec {
  std::string name;
  SolverKind solver = SolverKind::Zakai;
  unsigned max_order = 1;
  std::size_t substeps = 1;
  unsigned substep_order = 1;
  std::optional<double> eps;       // overrides the model's eps
  std::optional<double> weight_w;  // overrides the fit weight
  std::optional<unsigned> degree;  // overrides the fit degree
  bool expect_failure = false;     // a blow-up here is the expected outcome
  std::optional<double> max_linf_rel;  // oracle tolerance relative to the exact peak
};

// Flat key-value view of one configuration file section.
using Section = std::map<std::string, std::string>;

struct ExperimentConfig {
  std::string name = "experiment";
  Section model;    // kind = cir | benes | linear | custom, plus constants
  Section fit;      // w, degree, range, step (Benes kinds)
  Section grid;     // modes, stencil, reach, reach_cap, xi_max, carrier
  Section path;     // seed, steps, file
  Section output;   // z_lo, z_hi, points, dir
  Section oracle;   // kind = auto | none
  double horizon = 1.0;
  double dt = 1e-3;
  std::vector<VariantSpec> variants;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& file);

// Model assembled from a config; the fit is redone per variant when a variant
// overrides w or the degree.
struct BuiltModel {
  PerturbedModel model;
  InitialLaw law;
  std::vector<double> carrier;
  ExactCoefficients exact;
  double fit_half_width = 0.0;  // 0 when no fitted drift
};
BuiltModel build_model(const ExperimentConfig& cfg, const VariantSpec* variant = nullptr);

struct VariantResult {
  std::string name;
  bool ok = false;
  bool blew_up = false;
  std::string message;
  std::optional<DensityGrid> density;  // normalized for filtered runs
  double linf = NAN, l1 = NAN, peak_gap = NAN;
  double mass = NAN;                // Re rho(xi = 0)
  double mean = NAN, variance = NAN;  // from moments_at_zero
  double max_symmetry = 0.0;
  double reach = NAN, xi_max = NAN;
  double runtime_ms = 0.0;
  std::vector<StepDiagnostics> diagnostics;
};

struct ExperimentReport {
  std::string name;
  ObservationPath path;
  std::optional<DensityGrid> exact;
  std::vector<VariantResult> variants;

  const VariantResult& variant(const std::string& name) const;
  bool any_unexpected_blowup(const ExperimentConfig& cfg) const;
  bool any_tolerance_violation(const ExperimentConfig& cfg) const;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg, bool verbose = false);
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

struct DensityDiff {
  double linf, l1, peak_gap;
};
DensityDiff diff_densities(const DensityGrid& a, const DensityGrid& b);
DensityDiff diff_densities(const std::filesystem::path& a, const std::filesystem::path& b);

void save_density(const DensityGrid& g, const std::filesystem::path& file);
DensityGrid load_density(const std::filesystem::path& file);
void save_state(const SpectralState& s, const std::filesystem::path& file);

// number of strict local maxima whose height exceeds rel_floor * peak
std::size_t count_local_maxima(const std::vector<double>& values, double rel_floor = 1e-3);

// Built-in scenario presets; names are fig1 .. fig6.
std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);
ExperimentConfig load_preset(const std::string& name);

}  // namespace momfilter
