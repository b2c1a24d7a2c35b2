#pragma once

#include <map>
#include <span>
#include <vector>

#include "momfilter/kernels.hpp"
#include "momfilter/model.hpp"

namespace momfilter {

class DensityError : public Error {
 public:
  using Error::Error;
};

// Uniform tensor grid in xi, symmetric about 0 with an odd mode count per axis
// so that xi = 0 is a grid point.
class XiGrid {
 public:
  // Even mode counts are promoted to the next odd count.
  XiGrid(std::vector<std::size_t> modes, std::vector<double> xi_max);
  static XiGrid uniform(std::size_t n, std::size_t modes, double xi_max);
  // xi_max from the free covariance: exp(-xi^2 lambda_min / 2) = 1e-12 at the edge
  static XiGrid from_covariance(const Eigen::MatrixXd& cov, std::size_t modes);
  // xi_max chosen so that the stencil resolves x up to |x - carrier| <= reach
  static XiGrid from_reach(std::size_t n, std::size_t modes, double reach, int stencil_order);

  std::size_t dim() const { return modes_.size(); }
  std::size_t size() const { return shape_.size(); }
  std::size_t modes(std::size_t axis) const { return modes_[axis]; }
  double xi_max(std::size_t axis) const { return xi_max_[axis]; }
  double delta(std::size_t axis) const { return delta_[axis]; }
  double axis_value(std::size_t axis, std::size_t k) const;
  std::vector<double> axis_values(std::size_t axis) const;
  std::vector<double> point(std::size_t flat) const;
  std::size_t center() const;  // flat index of xi = 0
  std::size_t mirror(std::size_t flat) const;  // flat index of -xi
  const kernels::Shape& shape() const { return shape_; }

 private:
  std::vector<std::size_t> modes_;
  std::vector<double> xi_max_, delta_;
  kernels::Shape shape_;
};

struct SpectralOptions {
  int stencil_order = 4;
  // D_xi acts on exp(-i xi.c) rho, with the carrier c restored exactly
  std::vector<double> carrier;
  kernels::Policy policy = kernels::Policy::Parallel;
};

using ComplexArray = std::vector<Complex>;

struct SpectralState {
  XiGrid grid;
  std::vector<ComplexArray> orders;
  double t = 0.0;

  ComplexArray combined(double eps) const;  // sum_j eps^j orders[j]
};

// Lazily built table of D^alpha applied to one array, shared by every
// descriptor that acts on that array within a step.
class DerivativeTable {
 public:
  DerivativeTable(const XiGrid& grid, std::span<const Complex> values, const SpectralOptions& opt);

  const ComplexArray& derivative(const Exponent& alpha);
  ComplexArray apply(const OperatorDescriptor& op);
  // adds scale * op(values) into out
  void apply_into(const OperatorDescriptor& op, Complex scale, std::span<Complex> out);
  Complex apply_at(const OperatorDescriptor& op, std::size_t flat);

 private:
  MultiPoly demodulated(const MultiPoly& p) const;
  const XiGrid& grid_;
  SpectralOptions opt_;
  bool has_carrier_ = false;
  ComplexArray carrier_phase_;  // exp(i xi.c)
  std::map<Exponent, ComplexArray> cache_;
};

ComplexArray apply_descriptor(std::span<const Complex> values, const OperatorDescriptor& op,
                              const XiGrid& grid, const SpectralOptions& opt = {});

struct ZWindow {
  std::vector<double> lo, hi;
  std::vector<std::size_t> points;
  static ZWindow line(double lo, double hi, std::size_t points);
};

struct DensityGrid {
  std::vector<std::vector<double>> axes;
  std::vector<double> values;  // unnormalized, row-major over axes
  double mass = 0.0;           // trapezoidal integral of values over the window

  std::size_t dim() const { return axes.size(); }
  const std::vector<double>& z() const { return axes.at(0); }
  std::vector<double> normalized() const;
  double peak() const;
};

double trapezoid(const std::vector<std::vector<double>>& axes, std::span<const double> values);

// Inverts sum_j eps^j orders[j] on the window. Throws DensityError when the
// imaginary residual exceeds 1e-6 of the peak or the mass is not positive.
DensityGrid invert_to_density(const SpectralState& state, double eps, const ZWindow& window,
                              kernels::Policy policy = kernels::Policy::Parallel);

Complex moments_at_zero(const SpectralState& state, double eps, const MultiPoly& poly,
                        const SpectralOptions& opt = {});

// max_k |rho(-xi_k) - conj rho(xi_k)| / max(max_k |rho(xi_k)|, scale); the scale
// floor keeps an order that is zero up to rounding from reading as asymmetric
double symmetry_residual(const XiGrid& grid, std::span<const Complex> values, double scale = 0.0);

}  // namespace momfilter
