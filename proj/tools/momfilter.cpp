// momfilter: command-line front end for the experiments.
#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "momfilter/experiment.hpp"

using namespace momfilter;

namespace {

enum Exit { kOk = 0, kError = 1, kConfig = 2, kBlowUp = 3, kMismatch = 4 };

std::filesystem::path output_root() {
  const char* env = std::getenv("MOMFILTER_OUT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("out");
}

void print_report(const ExperimentReport& rep, const ExperimentConfig& cfg) {
  const double peak = rep.exact ? rep.exact->peak() : NAN;
  std::printf("%-12s %-8s %12s %12s %12s %12s %10s\n", "variant", "status", "linf/peak", "mass",
              "mean", "variance", "ms");
  for (std::size_t i = 0; i < rep.variants.size(); ++i) {
    const auto& r = rep.variants[i];
    const char* status = r.ok ? "ok" : (r.blew_up ? "blowup" : "failed");
    std::printf("%-12s %-8s %12.4e %12.4e %12.5f %12.5e %10.1f\n", r.name.c_str(), status,
                r.linf / peak, r.mass, r.mean, r.variance, r.runtime_ms);
    if (!r.ok) std::printf("    %s%s\n", r.message.c_str(), cfg.variants[i].expect_failure ? " (expected)" : "");
  }
}

int run_config(ExperimentConfig cfg, std::optional<unsigned long> seed, const std::string& out,
               bool verbose) {
  if (seed) cfg.path["seed"] = std::to_string(*seed);
  const std::filesystem::path dir =
      out.empty() ? output_root() / (cfg.output.count("dir") ? cfg.output.at("dir") : cfg.name)
                  : std::filesystem::path(out);
  ExperimentReport rep = run_experiment(cfg, verbose);
  write_report(rep, dir);
  print_report(rep, cfg);
  std::printf("wrote %s\n", dir.string().c_str());
  if (rep.any_unexpected_blowup(cfg)) return kBlowUp;
  if (rep.any_tolerance_violation(cfg)) return kMismatch;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier-space expansion filter for small-noise diffusions"};
  app.require_subcommand(1);

  std::string config_file, out_dir;
  std::optional<unsigned long> seed;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_file, "experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "override the path seed");
  run->add_option("--out", out_dir, "output directory (default $MOMFILTER_OUT/<name>)");
  run->add_flag("--verbose", verbose, "write per-step diagnostics");

  std::string preset;
  bool dump = false;
  auto* pre = app.add_subcommand("preset", "run a built-in scenario preset");
  pre->add_option("name", preset, "fig1 .. fig6")->required()->check(CLI::IsMember(preset_names()));
  pre->add_option("--seed", seed, "override the path seed");
  pre->add_option("--out", out_dir, "output directory");
  pre->add_flag("--verbose", verbose, "write per-step diagnostics");
  pre->add_flag("--dump", dump, "print the preset config instead of running it");

  std::string target = "tanh-drift", table_file;
  double a = 0.8, sigma = 0.5, mu = 1.0, w = 2.0, range = 5.0, step = 0.2;
  unsigned degree = 11;
  auto* fitc = app.add_subcommand("fit", "fit a polynomial and print it");
  fitc->add_option("--target", target, "tanh-drift | sqrt-vol | table")
      ->check(CLI::IsMember({"tanh-drift", "sqrt-vol", "table"}));
  fitc->add_option("--a", a, "tanh-drift a");
  fitc->add_option("--sigma", sigma, "model sigma (weight and sample range unit)");
  fitc->add_option("--mu", mu, "sqrt-vol Taylor center");
  fitc->add_option("--w", w, "weight exponent");
  fitc->add_option("--degree", degree, "polynomial degree");
  fitc->add_option("--range", range, "half-width of the sample range in units of sigma");
  fitc->add_option("--step", step, "sample step in units of sigma");
  fitc->add_option("--file", table_file, "CSV of x,f(x) rows for --target table");

  std::string path_out;
  unsigned long steps = 1000;
  double horizon = 1.0;
  bool cumulative = false;
  auto* sim = app.add_subcommand("simulate", "simulate an observation path for a config's model");
  sim->add_option("config", config_file, "experiment config (model block)")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "generator seed");
  sim->add_option("--steps", steps, "number of steps");
  sim->add_option("--horizon", horizon, "final time");
  sim->add_option("--out", path_out, "path CSV")->required();
  sim->add_flag("--cumulative", cumulative, "write Y instead of dY");

  std::string file_a, file_b;
  auto* diff = app.add_subcommand("diff", "compare two density CSVs");
  diff->add_option("a", file_a)->required()->check(CLI::ExistingFile);
  diff->add_option("b", file_b)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_config(load_config(config_file), seed, out_dir, verbose);
    if (*pre) {
      if (dump) {
        std::cout << preset_text(preset);
        return kOk;
      }
      return run_config(load_preset(preset), seed, out_dir, verbose);
    }
    if (*fitc) {
      FitSpec spec;
      if (target == "sqrt-vol") {
        spec = {TaylorMethod{mu, degree, mu}, FitTarget::sqrt_vol(mu)};
      } else {
        WeightedLsmMethod m{-range * sigma, range * sigma, step * sigma, degree, w, sigma, Parity::Odd};
        if (target == "tanh-drift") {
          spec = {m, FitTarget::tanh_drift(a, sigma)};
        } else {
          std::ifstream in(table_file);
          if (!in) throw ConfigError("cannot read fit table '" + table_file + "'");
          std::vector<double> xs, ys;
          std::string line;
          while (std::getline(in, line)) {
            const auto c = line.find(',');
            if (c == std::string::npos) continue;
            try {
              xs.push_back(std::stod(line.substr(0, c)));
              ys.push_back(std::stod(line.substr(c + 1)));
            } catch (const std::exception&) {
              if (!xs.empty()) throw ParseError("fit table: malformed row '" + line + "'");
            }
          }
          m.parity = Parity::Any;
          spec = {m, FitTarget::table(xs, ys)};
        }
      }
      std::cout << to_text(fit(spec)) << '\n';
      return kOk;
    }
    if (*sim) {
      ExperimentConfig cfg = load_config(config_file);
      BuiltModel b = build_model(cfg);
      ObservationPath p = simulate_paths(b.model, b.law, horizon, steps, seed.value_or(1), b.exact);
      save_path(p, path_out, cumulative);
      return kOk;
    }
    if (*diff) {
      DensityDiff d = diff_densities(std::filesystem::path(file_a), std::filesystem::path(file_b));
      std::printf("linf,l1,peak_gap\n%.10g,%.10g,%.10g\n", d.linf, d.l1, d.peak_gap);
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kConfig;
  } catch (const FitError& e) {
    std::cerr << "fit error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalBlowUp& e) {
    std::cerr << "numerical blow-up: " << e.what() << '\n';
    return kBlowUp;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kOk;
}
