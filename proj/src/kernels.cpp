#include "momfilter/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace momfilter::kernels {

namespace {

// below this many points the OpenMP region costs more than it saves
constexpr std::ptrdiff_t kMinParallel = 4096;

constexpr Complex kMinusI{0.0, -1.0};

// d/dxi at position k of a line of length len with stride s, times 1/i
inline Complex stencil(const Complex* f, std::size_t k, std::size_t len, std::ptrdiff_t s,
                       double inv, int order) {
  auto at = [&](std::ptrdiff_t j) { return f[j * s]; };
  const auto kk = static_cast<std::ptrdiff_t>(k);
  const auto last = static_cast<std::ptrdiff_t>(len) - 1;
  Complex d;
  if (order == 2) {
    if (kk == 0)
      d = (-3.0 * at(0) + 4.0 * at(1) - at(2)) * (0.5 * inv);
    else if (kk == last)
      d = (3.0 * at(last) - 4.0 * at(last - 1) + at(last - 2)) * (0.5 * inv);
    else
      d = (at(kk + 1) - at(kk - 1)) * (0.5 * inv);
  } else {
    const double c = inv / 12.0;
    if (kk == 0)
      d = (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) * c;
    else if (kk == 1)
      d = (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) * c;
    else if (kk == last)
      d = (25.0 * at(last) - 48.0 * at(last - 1) + 36.0 * at(last - 2) - 16.0 * at(last - 3) +
           3.0 * at(last - 4)) * c;
    else if (kk == last - 1)
      d = (3.0 * at(last) + 10.0 * at(last - 1) - 18.0 * at(last - 2) + 6.0 * at(last - 3) -
           at(last - 4)) * c;
    else
      // paired differences keep the result at -xi the exact conjugate mirror
      d = (8.0 * (at(kk + 1) - at(kk - 1)) - (at(kk + 2) - at(kk - 2))) * c;
  }
  return kMinusI * d;
}

void check_diff(std::span<const Complex> in, std::span<Complex> out, const Shape& shape,
                std::size_t axis, int order) {
  if (order != 2 && order != 4) throw std::invalid_argument("stencil order must be 2 or 4");
  if (axis >= shape.extent.size()) throw std::invalid_argument("axis out of range");
  if (in.size() != shape.size() || out.size() != shape.size())
    throw std::invalid_argument("array size does not match grid shape");
  if (shape.extent[axis] < static_cast<std::size_t>(order + 1))
    throw std::invalid_argument("grid too small for the stencil");
}

inline void diff_point(const Complex* in, Complex* out, std::size_t p, std::size_t stride,
                       std::size_t len, double inv, int order) {
  const std::size_t k = (p / stride) % len;
  const Complex* line = in + (p - k * stride);
  out[p] = stencil(line, k, len, static_cast<std::ptrdiff_t>(stride), inv, order);
}

struct PhaseTables {
  // table[axis][p * K + k] = w_k exp(-i xi_k z_p)
  std::vector<std::vector<Complex>> table;
};

PhaseTables build_phases(const InversionPlan& plan) {
  const std::size_t n = plan.xi.size();
  if (plan.weights.size() != n || plan.z.size() != n || plan.xi_shape.extent.size() != n ||
      plan.z_shape.extent.size() != n)
    throw std::invalid_argument("inversion plan has inconsistent dimensions");
  PhaseTables t;
  t.table.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    const auto& xi = plan.xi[a];
    const auto& z = plan.z[a];
    t.table[a].resize(xi.size() * z.size());
    for (std::size_t p = 0; p < z.size(); ++p)
      for (std::size_t k = 0; k < xi.size(); ++k)
        t.table[a][p * xi.size() + k] = plan.weights[a][k] * std::polar(1.0, -xi[k] * z[p]);
  }
  return t;
}

inline Complex invert_point(const InversionPlan& plan, const PhaseTables& ph,
                            std::span<const Complex> rho, std::size_t p) {
  const std::size_t n = plan.xi.size();
  if (n == 1) {
    const std::size_t K = plan.xi[0].size();
    const Complex* row = ph.table[0].data() + p * K;
    Complex s = 0.0;
    for (std::size_t k = 0; k < K; ++k) s += row[k] * rho[k];
    return s;
  }
  // decompose the z index, then sum over the full xi tensor
  std::vector<std::size_t> pz(n);
  for (std::size_t a = n; a-- > 0;) {
    pz[a] = p % plan.z_shape.extent[a];
    p /= plan.z_shape.extent[a];
  }
  std::vector<std::size_t> k(n, 0);
  Complex s = 0.0;
  for (std::size_t flat = 0; flat < rho.size(); ++flat) {
    Complex w = rho[flat];
    for (std::size_t a = 0; a < n; ++a)
      w *= ph.table[a][pz[a] * plan.xi[a].size() + k[a]];
    s += w;
    for (std::size_t a = n; a-- > 0;) {
      if (++k[a] < plan.xi_shape.extent[a]) break;
      k[a] = 0;
    }
  }
  return s;
}

}  // namespace

std::size_t Shape::size() const {
  std::size_t s = 1;
  for (auto e : extent) s *= e;
  return s;
}

std::size_t Shape::stride(std::size_t axis) const {
  std::size_t s = 1;
  for (std::size_t a = extent.size(); a-- > axis + 1;) s *= extent[a];
  return s;
}

void diff_axis_serial(std::span<const Complex> in, std::span<Complex> out, const Shape& shape,
                      std::size_t axis, double delta, int order) {
  check_diff(in, out, shape, axis, order);
  const std::size_t stride = shape.stride(axis), len = shape.extent[axis];
  const double inv = 1.0 / delta;
  for (std::size_t p = 0; p < in.size(); ++p)
    diff_point(in.data(), out.data(), p, stride, len, inv, order);
}

void diff_axis_parallel(std::span<const Complex> in, std::span<Complex> out, const Shape& shape,
                        std::size_t axis, double delta, int order) {
  check_diff(in, out, shape, axis, order);
  const std::size_t stride = shape.stride(axis), len = shape.extent[axis];
  const double inv = 1.0 / delta;
  const auto total = static_cast<std::ptrdiff_t>(in.size());
  const Complex* src = in.data();
  Complex* dst = out.data();
#pragma omp parallel for schedule(static) if (total >= kMinParallel)
  for (std::ptrdiff_t p = 0; p < total; ++p)
    diff_point(src, dst, static_cast<std::size_t>(p), stride, len, inv, order);
}

void invert_serial(const InversionPlan& plan, std::span<const Complex> rho,
                   std::span<Complex> out) {
  if (rho.size() != plan.xi_shape.size() || out.size() != plan.z_shape.size())
    throw std::invalid_argument("inversion buffers do not match the plan");
  PhaseTables ph = build_phases(plan);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = invert_point(plan, ph, rho, p);
}

void invert_parallel(const InversionPlan& plan, std::span<const Complex> rho,
                     std::span<Complex> out) {
  if (rho.size() != plan.xi_shape.size() || out.size() != plan.z_shape.size())
    throw std::invalid_argument("inversion buffers do not match the plan");
  PhaseTables ph = build_phases(plan);
  const auto total = static_cast<std::ptrdiff_t>(out.size());
  const auto work = total * static_cast<std::ptrdiff_t>(rho.size());
#pragma omp parallel for schedule(static) if (work >= 64 * kMinParallel)
  for (std::ptrdiff_t p = 0; p < total; ++p)
    out[static_cast<std::size_t>(p)] = invert_point(plan, ph, rho, static_cast<std::size_t>(p));
}

void exp_update_serial(std::span<const Complex> factor, std::span<const Complex> src,
                       std::span<Complex> y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = factor[k] * (y[k] + src[k]);
}

void exp_update_parallel(std::span<const Complex> factor, std::span<const Complex> src,
                         std::span<Complex> y) {
  const auto total = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static) if (total >= kMinParallel)
  for (std::ptrdiff_t k = 0; k < total; ++k) y[k] = factor[k] * (y[k] + src[k]);
}

void scale_serial(std::span<const Complex> factor, std::span<Complex> y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] *= factor[k];
}

void scale_parallel(std::span<const Complex> factor, std::span<Complex> y) {
  const auto total = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static) if (total >= kMinParallel)
  for (std::ptrdiff_t k = 0; k < total; ++k) y[k] *= factor[k];
}

Scan scan_serial(std::span<const Complex> v) {
  Scan s;
  const std::size_t n = v.size();
  for (std::size_t k = 0; k < n; ++k) {
    s.max_norm2 = std::max(s.max_norm2, std::norm(v[k]));
    s.max_mirror_gap2 = std::max(s.max_mirror_gap2, std::norm(v[n - 1 - k] - std::conj(v[k])));
  }
  return s;
}

Scan scan_parallel(std::span<const Complex> v) {
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  double top = 0.0, gap = 0.0;
#pragma omp parallel for schedule(static) reduction(max : top, gap) if (n >= kMinParallel)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    top = std::max(top, std::norm(v[k]));
    gap = std::max(gap, std::norm(v[n - 1 - k] - std::conj(v[k])));
  }
  return {top, gap};
}

void axpy_serial(Complex a, std::span<const Complex> x, std::span<Complex> y) {
  for (std::size_t k = 0; k < y.size(); ++k) y[k] += a * x[k];
}

void axpy_parallel(Complex a, std::span<const Complex> x, std::span<Complex> y) {
  const auto total = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static) if (total >= kMinParallel)
  for (std::ptrdiff_t k = 0; k < total; ++k) y[k] += a * x[k];
}

double stencil_kappa(int order) {
  if (order == 2) return 1.0;
  if (order == 4) {
    // max over theta of (8 sin t - sin 2t)/6, attained at cos t = 1 - sqrt(6)/2
    const double c = 1.0 - std::sqrt(6.0) / 2.0;
    const double s = std::sqrt(1.0 - c * c);
    return (8.0 * s - 2.0 * s * c) / 6.0;
  }
  throw std::invalid_argument("stencil order must be 2 or 4");
}

}  // namespace momfilter::kernels
