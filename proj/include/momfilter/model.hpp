#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <optional>
#include <vector>

#include "momfilter/polyops.hpp"

namespace momfilter {

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Piecewise-constant function of time: value[i] holds on [breaks[i], breaks[i+1]),
// the last value extends to +inf. breaks[0] is always 0.
template <class T>
class PiecewiseConstant {
 public:
  PiecewiseConstant() = default;
  explicit PiecewiseConstant(T value) : breaks_{0.0}, values_{std::move(value)} {}
  PiecewiseConstant(std::vector<double> breaks, std::vector<T> values)
      : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (breaks_.empty() || breaks_.size() != values_.size() || breaks_.front() != 0.0)
      throw ConfigError("piecewise schedule needs matching breaks/values starting at t=0");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
      if (!(breaks_[i] > breaks_[i - 1]))
        throw ConfigError("piecewise schedule breaks must increase");
  }

  const T& at(double t) const {
    std::size_t i = 0;
    while (i + 1 < breaks_.size() && t >= breaks_[i + 1]) ++i;
    return values_[i];
  }

  // exact integral of g(value) over [a, b] for a <= b; zero fixes the result type
  template <class R, class G>
  R integrate(double a, double b, G g, R zero) const {
    R acc = zero;
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
      double lo = std::max(a, breaks_[i]);
      double hi = i + 1 < breaks_.size() ? std::min(b, breaks_[i + 1]) : b;
      if (hi > lo) acc += R(g(values_[i]) * (hi - lo));
    }
    return acc;
  }

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<T>& values() const { return values_; }

 private:
  std::vector<double> breaks_;
  std::vector<T> values_;
};

struct PolyMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<MultiPoly> entries;  // row-major

  PolyMatrix() = default;
  PolyMatrix(std::size_t r, std::size_t c, std::size_t nvars)
      : rows(r), cols(c), entries(r * c, MultiPoly(nvars)) {}
  MultiPoly& operator()(std::size_t i, std::size_t j) { return entries[i * cols + j]; }
  const MultiPoly& operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
};

// dX = (f_t + eps F(X)) dt + (nu_t + eps sigma(X)) dV + eps gamma(X) dW
// dY = eps H(X) dt + dW
struct PerturbedModel {
  std::size_t n = 1, m = 1, d = 1;
  double eps = 1.0;
  PiecewiseConstant<Eigen::VectorXd> f;
  PiecewiseConstant<Eigen::MatrixXd> nu;
  std::vector<MultiPoly> F;
  PolyMatrix sigma;
  PolyMatrix gamma;
  std::vector<MultiPoly> H;

  // Zero perturbations with constant free coefficients.
  static PerturbedModel free(const Eigen::VectorXd& f, const Eigen::MatrixXd& nu, std::size_t m);

  // Throws ConfigError/DimensionError on any violated invariant.
  void validate() const;
};

struct InitialLaw {
  enum class Kind { Dirac, Gaussian, GramCharlier };
  Kind kind = Kind::Dirac;
  Eigen::VectorXd x0;
  Eigen::MatrixXd Sigma0;
  std::optional<MultiPoly> prefactor;  // GramCharlier only, polynomial in z

  static InitialLaw dirac(const Eigen::VectorXd& x0);
  static InitialLaw gaussian(const Eigen::VectorXd& x0, const Eigen::MatrixXd& Sigma0);
  static InitialLaw gram_charlier(const Eigen::VectorXd& x0, const Eigen::MatrixXd& Sigma0,
                                  MultiPoly prefactor);

  std::size_t dim() const { return static_cast<std::size_t>(x0.size()); }
  void validate() const;
};

// One term of an operator acting in xi-space: xi_factor(xi) * x_poly(D_xi).
struct OperatorTerm {
  MultiPoly xi_factor;
  MultiPoly x_poly;
};
using OperatorDescriptor = std::vector<OperatorTerm>;

unsigned descriptor_degree(const OperatorDescriptor& op);

// Integrated free symbol over one step: i xi.lin - 1/2 xi.quad.xi
struct A0Increment {
  Eigen::VectorXd lin;
  Eigen::MatrixXd quad;
  Complex at(std::span<const double> xi) const;
};

class OperatorSymbols {
 public:
  explicit OperatorSymbols(const PerturbedModel& model);

  Complex a0(double t, std::span<const double> xi) const;
  // integral of a0 over [t0, t1], exact for the piecewise-constant schedule
  Complex a0_integral(double t0, double t1, std::span<const double> xi) const;
  A0Increment a0_increment(double t0, double t1) const;
  const OperatorDescriptor& a1(double t) const;
  const OperatorDescriptor& a2(double t) const;
  const std::vector<OperatorDescriptor>& obs(double t) const;

  std::size_t n() const { return n_; }
  std::size_t m() const { return obs_.size(); }

 private:
  std::size_t n_;
  PiecewiseConstant<Eigen::VectorXd> f_;
  PiecewiseConstant<Eigen::MatrixXd> nnt_;  // nu nu^T
  PiecewiseConstant<OperatorDescriptor> a1_;
  OperatorDescriptor a2_;
  std::vector<OperatorDescriptor> obs_;
};

OperatorSymbols build_symbols(const PerturbedModel& model);

// Polynomial Q in xi such that the characteristic function of a Gram–Charlier
// law is Q(xi)·exp(i xi·x0 − ½ xi·Sigma0 xi). Q ≡ 1 for Dirac/Gaussian.
MultiPoly initial_cf_polynomial(const InitialLaw& law);
Complex initial_cf(const InitialLaw& law, std::span<const double> xi);

struct FreeMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};
FreeMoments free_moments(const PerturbedModel& model, const InitialLaw& law, double t);

}  // namespace momfilter
