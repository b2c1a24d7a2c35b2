#pragma once

// Inner loops of the spectral layer. Each kernel has a serial reference
// version and an OpenMP version; tests require them to agree to rounding.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace momfilter::kernels {

using Complex = std::complex<double>;

enum class Policy { Serial, Parallel };

// Tensor grid shape, row-major with the last axis fastest.
struct Shape {
  std::vector<std::size_t> extent;
  std::size_t size() const;
  std::size_t stride(std::size_t axis) const;
};

// out = D_xi along `axis` applied to in, i.e. (1/i) d/dxi by finite differences
// of the given order (2 or 4), one-sided of the same order at the edges.
void diff_axis_serial(std::span<const Complex> in, std::span<Complex> out, const Shape& shape,
                      std::size_t axis, double delta, int order);
void diff_axis_parallel(std::span<const Complex> in, std::span<Complex> out, const Shape& shape,
                        std::size_t axis, double delta, int order);

// values[p] = sum_k weight[k] * exp(-i xi_k . z_p) * rho[k], complex result.
// xi and z are given per axis; the tensor structure is exploited by
// factorizing the phase per axis.
struct InversionPlan {
  Shape xi_shape;
  std::vector<std::vector<double>> xi;       // per axis
  std::vector<std::vector<double>> weights;  // per axis trapezoid weights
  Shape z_shape;
  std::vector<std::vector<double>> z;        // per axis
};
void invert_serial(const InversionPlan& plan, std::span<const Complex> rho, std::span<Complex> out);
void invert_parallel(const InversionPlan& plan, std::span<const Complex> rho,
                     std::span<Complex> out);

// y[k] = factor[k] * (y[k] + src[k]), the exponential-integrator update
void exp_update_serial(std::span<const Complex> factor, std::span<const Complex> src,
                       std::span<Complex> y);
void exp_update_parallel(std::span<const Complex> factor, std::span<const Complex> src,
                         std::span<Complex> y);

// y[k] *= factor[k]
void scale_serial(std::span<const Complex> factor, std::span<Complex> y);
void scale_parallel(std::span<const Complex> factor, std::span<Complex> y);

// max |v[k]|^2 and max |v[n-1-k] - conj v[k]|^2 in one pass; n-1-k is the
// mirror index on an odd row-major grid centred on 0
struct Scan {
  double max_norm2 = 0.0;
  double max_mirror_gap2 = 0.0;
};
Scan scan_serial(std::span<const Complex> v);
Scan scan_parallel(std::span<const Complex> v);

// y[k] += a * x[k]
void axpy_serial(Complex a, std::span<const Complex> x, std::span<Complex> y);
void axpy_parallel(Complex a, std::span<const Complex> x, std::span<Complex> y);

inline void diff_axis(Policy p, std::span<const Complex> in, std::span<Complex> out,
                      const Shape& shape, std::size_t axis, double delta, int order) {
  if (p == Policy::Parallel)
    diff_axis_parallel(in, out, shape, axis, delta, order);
  else
    diff_axis_serial(in, out, shape, axis, delta, order);
}

inline void invert(Policy p, const InversionPlan& plan, std::span<const Complex> rho,
                   std::span<Complex> out) {
  if (p == Policy::Parallel)
    invert_parallel(plan, rho, out);
  else
    invert_serial(plan, rho, out);
}

inline void exp_update(Policy p, std::span<const Complex> factor, std::span<const Complex> src,
                       std::span<Complex> y) {
  if (p == Policy::Parallel)
    exp_update_parallel(factor, src, y);
  else
    exp_update_serial(factor, src, y);
}

inline void scale(Policy p, std::span<const Complex> factor, std::span<Complex> y) {
  if (p == Policy::Parallel)
    scale_parallel(factor, y);
  else
    scale_serial(factor, y);
}

inline Scan scan(Policy p, std::span<const Complex> v) {
  return p == Policy::Parallel ? scan_parallel(v) : scan_serial(v);
}

inline void axpy(Policy p, Complex a, std::span<const Complex> x, std::span<Complex> y) {
  if (p == Policy::Parallel)
    axpy_parallel(a, x, y);
  else
    axpy_serial(a, x, y);
}

// maximum modified wavenumber kappa*delta of the first-derivative stencil;
// the stencil represents x only for |x| <= kappa / delta
double stencil_kappa(int order);

}  // namespace momfilter::kernels
