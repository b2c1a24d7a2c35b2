#include "momfilter/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace momfilter {

namespace {

std::size_t odd(std::size_t m) { return m % 2 == 0 ? m + 1 : m; }

}  // namespace

XiGrid::XiGrid(std::vector<std::size_t> modes, std::vector<double> xi_max)
    : modes_(std::move(modes)), xi_max_(std::move(xi_max)) {
  if (modes_.empty() || modes_.size() != xi_max_.size())
    throw DimensionError("XiGrid: modes and xi_max must have one entry per dimension");
  for (std::size_t a = 0; a < modes_.size(); ++a) {
    modes_[a] = odd(modes_[a]);
    if (modes_[a] < 3 || !(xi_max_[a] > 0.0) || !std::isfinite(xi_max_[a]))
      throw ConfigError("XiGrid: degenerate grid (need >= 3 modes and xi_max > 0)");
    delta_.push_back(2.0 * xi_max_[a] / static_cast<double>(modes_[a] - 1));
  }
  shape_.extent = modes_;
}

XiGrid XiGrid::uniform(std::size_t n, std::size_t modes, double xi_max) {
  return XiGrid(std::vector<std::size_t>(n, modes), std::vector<double>(n, xi_max));
}

XiGrid XiGrid::from_covariance(const Eigen::MatrixXd& cov, std::size_t modes) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double lmin = es.eigenvalues().minCoeff();
  if (!(lmin > 0.0)) throw ConfigError("XiGrid: covariance must be positive definite");
  // exp(-27.6) ~ 1e-12
  const double xm = std::sqrt(2.0 * 27.6 / lmin);
  return uniform(static_cast<std::size_t>(cov.rows()), modes, xm);
}

XiGrid XiGrid::from_reach(std::size_t n, std::size_t modes, double reach, int stencil_order) {
  if (!(reach > 0.0)) throw ConfigError("XiGrid: reach must be positive");
  const std::size_t m = odd(modes);
  const double xm = 0.5 * static_cast<double>(m - 1) * kernels::stencil_kappa(stencil_order) / reach;
  return uniform(n, m, xm);
}

double XiGrid::axis_value(std::size_t axis, std::size_t k) const {
  const auto c = static_cast<std::ptrdiff_t>((modes_[axis] - 1) / 2);
  return static_cast<double>(static_cast<std::ptrdiff_t>(k) - c) * delta_[axis];
}

std::vector<double> XiGrid::axis_values(std::size_t axis) const {
  std::vector<double> v(modes_[axis]);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = axis_value(axis, k);
  return v;
}

std::vector<double> XiGrid::point(std::size_t flat) const {
  std::vector<double> p(dim());
  for (std::size_t a = dim(); a-- > 0;) {
    p[a] = axis_value(a, flat % modes_[a]);
    flat /= modes_[a];
  }
  return p;
}

std::size_t XiGrid::center() const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < dim(); ++a) flat = flat * modes_[a] + (modes_[a] - 1) / 2;
  return flat;
}

// reversing every axis index of a row-major layout reverses the flat index
std::size_t XiGrid::mirror(std::size_t flat) const { return size() - 1 - flat; }

ComplexArray SpectralState::combined(double eps) const {
  ComplexArray out(grid.size(), Complex{});
  double w = 1.0;
  for (const auto& o : orders) {
    if (w != 0.0)
      for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * o[k];
    w *= eps;
  }
  return out;
}

DerivativeTable::DerivativeTable(const XiGrid& grid, std::span<const Complex> values,
                                 const SpectralOptions& opt)
    : grid_(grid), opt_(opt) {
  if (values.size() != grid.size()) throw DimensionError("array does not match the grid");
  if (!opt_.carrier.empty() && opt_.carrier.size() != grid.dim())
    throw DimensionError("carrier must have one entry per dimension");
  has_carrier_ = std::any_of(opt_.carrier.begin(), opt_.carrier.end(),
                             [](double c) { return c != 0.0; });
  ComplexArray g(values.begin(), values.end());
  if (has_carrier_) {
    carrier_phase_.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      auto xi = grid.point(k);
      double ph = 0.0;
      for (std::size_t a = 0; a < xi.size(); ++a) ph += xi[a] * opt_.carrier[a];
      carrier_phase_[k] = std::polar(1.0, ph);
      g[k] *= std::conj(carrier_phase_[k]);
    }
  }
  cache_.emplace(Exponent(grid.dim(), 0), std::move(g));
}

const ComplexArray& DerivativeTable::derivative(const Exponent& alpha) {
  auto it = cache_.find(alpha);
  if (it != cache_.end()) return it->second;
  std::size_t axis = 0;
  while (alpha[axis] == 0) ++axis;
  Exponent prev = alpha;
  prev[axis] -= 1;
  const ComplexArray& src = derivative(prev);
  ComplexArray out(src.size());
  kernels::diff_axis(opt_.policy, src, out, grid_.shape(), axis, grid_.delta(axis),
                     opt_.stencil_order);
  return cache_.emplace(alpha, std::move(out)).first->second;
}

MultiPoly DerivativeTable::demodulated(const MultiPoly& p) const {
  if (!has_carrier_) return p;
  return poly_shift(p, opt_.carrier);
}

void DerivativeTable::apply_into(const OperatorDescriptor& op, Complex scale,
                                 std::span<Complex> out) {
  if (out.size() != grid_.size()) throw DimensionError("output does not match the grid");
  const std::size_t N = grid_.size();
  ComplexArray acc(N);
  for (const auto& term : op) {
    for (const auto& [alpha, c] : term.x_poly.terms())
      if (alpha.size() != grid_.dim()) throw DimensionError("descriptor dimension mismatch");
    std::fill(acc.begin(), acc.end(), Complex{});
    const MultiPoly shifted = demodulated(term.x_poly);
    for (const auto& [alpha, c] : shifted.terms())
      kernels::axpy(opt_.policy, c, derivative(alpha), acc);
    const bool trivial_xi = term.xi_factor.degree() == 0;
    const Complex xi_const = trivial_xi ? term.xi_factor.coeff(Exponent(grid_.dim(), 0)) : 0.0;
    std::vector<Complex> pt(grid_.dim());
    for (std::size_t k = 0; k < N; ++k) {
      Complex w = scale;
      if (trivial_xi) {
        w *= xi_const;
      } else {
        auto xi = grid_.point(k);
        for (std::size_t a = 0; a < pt.size(); ++a) pt[a] = xi[a];
        w *= poly_eval(term.xi_factor, pt);
      }
      if (has_carrier_) w *= carrier_phase_[k];
      out[k] += w * acc[k];
    }
  }
}

ComplexArray DerivativeTable::apply(const OperatorDescriptor& op) {
  ComplexArray out(grid_.size(), Complex{});
  apply_into(op, 1.0, out);
  return out;
}

Complex DerivativeTable::apply_at(const OperatorDescriptor& op, std::size_t flat) {
  auto xi = grid_.point(flat);
  std::vector<Complex> pt(xi.begin(), xi.end());
  Complex s = 0.0;
  for (const auto& term : op) {
    Complex inner = 0.0;
    const MultiPoly shifted = demodulated(term.x_poly);
    for (const auto& [alpha, c] : shifted.terms())
      inner += c * derivative(alpha)[flat];
    Complex w = poly_eval(term.xi_factor, pt);
    if (has_carrier_) w *= carrier_phase_[flat];
    s += w * inner;
  }
  return s;
}

ComplexArray apply_descriptor(std::span<const Complex> values, const OperatorDescriptor& op,
                              const XiGrid& grid, const SpectralOptions& opt) {
  const unsigned deg = descriptor_degree(op);
  for (std::size_t a = 0; a < grid.dim(); ++a)
    if (deg >= grid.modes(a))
      throw ConfigError("apply_descriptor: polynomial degree exceeds the grid's mode count");
  DerivativeTable table(grid, values, opt);
  return table.apply(op);
}

ZWindow ZWindow::line(double lo, double hi, std::size_t points) {
  return ZWindow{{lo}, {hi}, {points}};
}

std::vector<double> DensityGrid::normalized() const {
  if (!(mass > 0.0)) throw DensityError("cannot normalize a density with non-positive mass");
  std::vector<double> v(values.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = values[k] / mass;
  return v;
}

double DensityGrid::peak() const {
  double p = 0.0;
  for (double v : values) p = std::max(p, std::abs(v));
  return p;
}

double trapezoid(const std::vector<std::vector<double>>& axes, std::span<const double> values) {
  const std::size_t n = axes.size();
  std::vector<std::vector<double>> w(n);
  std::size_t total = 1;
  for (std::size_t a = 0; a < n; ++a) {
    const auto& z = axes[a];
    w[a].assign(z.size(), 0.0);
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
      const double h = 0.5 * (z[k + 1] - z[k]);
      w[a][k] += h;
      w[a][k + 1] += h;
    }
    total *= z.size();
  }
  if (values.size() != total) throw DimensionError("trapezoid: value count mismatch");
  double s = 0.0;
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double wk = values[flat];
    for (std::size_t a = 0; a < n; ++a) wk *= w[a][idx[a]];
    s += wk;
    for (std::size_t a = n; a-- > 0;) {
      if (++idx[a] < axes[a].size()) break;
      idx[a] = 0;
    }
  }
  return s;
}

DensityGrid invert_to_density(const SpectralState& state, double eps, const ZWindow& window,
                              kernels::Policy policy) {
  const XiGrid& grid = state.grid;
  const std::size_t n = grid.dim();
  if (window.lo.size() != n || window.hi.size() != n || window.points.size() != n)
    throw DimensionError("z-window must have one range per dimension");
  if (!(eps >= 0.0)) throw ConfigError("eps must be non-negative");

  kernels::InversionPlan plan;
  plan.xi_shape = grid.shape();
  DensityGrid out;
  for (std::size_t a = 0; a < n; ++a) {
    if (!(window.hi[a] > window.lo[a]) || window.points[a] < 2 || !std::isfinite(window.lo[a]) ||
        !std::isfinite(window.hi[a]))
      throw ConfigError("z-window must be finite with hi > lo and at least 2 points");
    plan.xi.push_back(grid.axis_values(a));
    std::vector<double> w(grid.modes(a), grid.delta(a) / (2.0 * std::numbers::pi));
    w.front() *= 0.5;
    w.back() *= 0.5;
    plan.weights.push_back(std::move(w));
    std::vector<double> z(window.points[a]);
    for (std::size_t p = 0; p < z.size(); ++p)
      z[p] = window.lo[a] + (window.hi[a] - window.lo[a]) * static_cast<double>(p) /
                                static_cast<double>(z.size() - 1);
    plan.z_shape.extent.push_back(z.size());
    plan.z.push_back(z);
    out.axes.push_back(std::move(z));
  }

  ComplexArray rho = state.combined(eps);
  ComplexArray phi(plan.z_shape.size());
  kernels::invert(policy, plan, rho, phi);

  double peak = 0.0, imag = 0.0;
  out.values.resize(phi.size());
  for (std::size_t p = 0; p < phi.size(); ++p) {
    out.values[p] = phi[p].real();
    peak = std::max(peak, std::abs(phi[p].real()));
    imag = std::max(imag, std::abs(phi[p].imag()));
    if (!std::isfinite(phi[p].real()) || !std::isfinite(phi[p].imag()))
      throw DensityError("density contains non-finite values");
  }
  if (imag > 1e-6 * peak)
    throw DensityError("imaginary residual " + std::to_string(imag) + " exceeds 1e-6 of peak " +
                       std::to_string(peak) + " (Hermitian symmetry broken)");
  out.mass = trapezoid(out.axes, out.values);
  if (!(out.mass > 0.0))
    throw DensityError("non-positive mass " + std::to_string(out.mass) +
                       " (expansion breakdown)");
  return out;
}

Complex moments_at_zero(const SpectralState& state, double eps, const MultiPoly& poly,
                        const SpectralOptions& opt) {
  if (poly.nvars() != state.grid.dim()) throw DimensionError("moment polynomial dimension");
  for (std::size_t a = 0; a < state.grid.dim(); ++a)
    if (poly.degree() >= state.grid.modes(a)) throw ConfigError("moment stencil does not fit");
  ComplexArray rho = state.combined(eps);
  DerivativeTable table(state.grid, rho, opt);
  OperatorDescriptor op{{MultiPoly::constant(state.grid.dim(), 1.0), poly}};
  return table.apply_at(op, state.grid.center());
}

double symmetry_residual(const XiGrid& grid, std::span<const Complex> values, double scale) {
  // squared norms avoid a hypot per mode
  double top = 0.0, res = 0.0;
  const std::size_t n = values.size();
  for (std::size_t k = 0; k < n; ++k) {
    top = std::max(top, std::norm(values[k]));
    res = std::max(res, std::norm(values[grid.mirror(k)] - std::conj(values[k])));
  }
  top = std::max(std::sqrt(top), scale);
  return top > 0.0 ? std::sqrt(res) / top : 0.0;
}

}  // namespace momfilter
