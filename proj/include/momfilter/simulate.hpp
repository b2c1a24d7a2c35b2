#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>

#include "momfilter/model.hpp"

namespace momfilter {

// Observation increments on a time grid starting at 0 (Y_0 = 0).
struct ObservationPath {
  std::vector<double> times;
  Eigen::MatrixXd dY;                // (times.size()-1) x m
  std::optional<Eigen::MatrixXd> X;  // times.size() x n, diagnostics only

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  std::size_t obs_dim() const { return static_cast<std::size_t>(dY.cols()); }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  // cumulative Y at every grid time
  Eigen::MatrixXd cumulative() const;
  void validate() const;
};

// Exact nonlinear coefficients used in place of the stored polynomials when
// simulating; any member left empty falls back to the polynomial.
struct ExactCoefficients {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> F;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> H;
};

ObservationPath simulate_paths(const PerturbedModel& model, const InitialLaw& law, double T,
                               std::size_t steps, std::uint64_t seed,
                               const ExactCoefficients& exact = {});

ObservationPath load_path(const std::filesystem::path& file);
// writes `t,dY...` (or `t,Y...` when cumulative is set) plus X columns if present
void save_path(const ObservationPath& path, const std::filesystem::path& file,
               bool cumulative = false);

// One Philox4x32-10 block.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

// Counter-based normal generator: Philox4x32-10 keyed by the seed, with the
// stream position as the counter, mapped through Box-Muller.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed, std::uint64_t stream = 0);
  double next();
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint32_t key_[2];
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  double buffer_[4];
  int available_ = 0;
};

}  // namespace momfilter
