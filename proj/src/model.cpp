#include "momfilter/model.hpp"

#include <map>

namespace momfilter {

namespace {

using XiMap = std::map<Exponent, MultiPoly>;

void accumulate(XiMap& acc, const Exponent& xi, const MultiPoly& x_poly) {
  if (x_poly.is_zero()) return;
  auto it = acc.find(xi);
  if (it == acc.end())
    acc.emplace(xi, x_poly);
  else
    it->second = it->second + x_poly;
}

OperatorDescriptor to_descriptor(const XiMap& acc) {
  OperatorDescriptor op;
  for (const auto& [xi, poly] : acc)
    if (!poly.is_zero()) op.push_back({MultiPoly::monomial(xi, 1.0), poly});
  return op;
}

Exponent unit(std::size_t n, std::size_t i) {
  Exponent e(n, 0);
  e[i] = 1;
  return e;
}

Exponent pair(std::size_t n, std::size_t i, std::size_t j) {
  Exponent e(n, 0);
  e[i] += 1;
  e[j] += 1;
  return e;
}

void check_nvars(const MultiPoly& p, std::size_t n, const char* what) {
  if (p.nvars() != n)
    throw DimensionError(std::string(what) + " has " + std::to_string(p.nvars()) +
                         " variables, model dimension is " + std::to_string(n));
}

bool positive_definite(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) return false;
  if (!M.isApprox(M.transpose(), 1e-12)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  return llt.info() == Eigen::Success;
}

}  // namespace

PerturbedModel PerturbedModel::free(const Eigen::VectorXd& f, const Eigen::MatrixXd& nu,
                                    std::size_t m) {
  PerturbedModel model;
  model.n = static_cast<std::size_t>(f.size());
  model.d = static_cast<std::size_t>(nu.cols());
  model.m = m;
  model.f = PiecewiseConstant<Eigen::VectorXd>(f);
  model.nu = PiecewiseConstant<Eigen::MatrixXd>(nu);
  model.F.assign(model.n, MultiPoly(model.n));
  model.sigma = PolyMatrix(model.n, model.d, model.n);
  model.gamma = PolyMatrix(model.n, m, model.n);
  model.H.assign(m, MultiPoly(model.n));
  return model;
}

void PerturbedModel::validate() const {
  if (n == 0 || m == 0 || d == 0) throw ConfigError("model dimensions must be positive");
  if (!(eps >= 0.0)) throw ConfigError("eps must be non-negative");
  if (f.values().empty() || nu.values().empty()) throw ConfigError("f and nu must be set");
  for (const auto& v : f.values())
    if (static_cast<std::size_t>(v.size()) != n) throw DimensionError("f_t must have length n");
  for (const auto& v : nu.values()) {
    if (static_cast<std::size_t>(v.rows()) != n || static_cast<std::size_t>(v.cols()) != d)
      throw DimensionError("nu_t must be n x d");
    if (!positive_definite(v * v.transpose()))
      throw ConfigError("nu_t nu_t^T is not positive definite");
  }
  if (F.size() != n) throw DimensionError("F must have n entries");
  if (H.size() != m) throw DimensionError("H must have m entries");
  if (sigma.rows != n || sigma.cols != d) throw DimensionError("sigma must be n x d");
  if (gamma.rows != n || gamma.cols != m) throw DimensionError("gamma must be n x m");
  for (const auto& p : F) check_nvars(p, n, "F");
  for (const auto& p : H) check_nvars(p, n, "H");
  for (const auto& p : sigma.entries) check_nvars(p, n, "sigma");
  for (const auto& p : gamma.entries) check_nvars(p, n, "gamma");
}

InitialLaw InitialLaw::dirac(const Eigen::VectorXd& x0) {
  InitialLaw law;
  law.kind = Kind::Dirac;
  law.x0 = x0;
  law.Sigma0 = Eigen::MatrixXd::Zero(x0.size(), x0.size());
  return law;
}

InitialLaw InitialLaw::gaussian(const Eigen::VectorXd& x0, const Eigen::MatrixXd& Sigma0) {
  InitialLaw law;
  law.kind = Kind::Gaussian;
  law.x0 = x0;
  law.Sigma0 = Sigma0;
  law.validate();
  return law;
}

InitialLaw InitialLaw::gram_charlier(const Eigen::VectorXd& x0, const Eigen::MatrixXd& Sigma0,
                                     MultiPoly prefactor) {
  InitialLaw law;
  law.kind = Kind::GramCharlier;
  law.x0 = x0;
  law.Sigma0 = Sigma0;
  law.prefactor = std::move(prefactor);
  law.validate();
  return law;
}

void InitialLaw::validate() const {
  const auto n = x0.size();
  if (n == 0) throw ConfigError("initial law needs a mean vector");
  if (Sigma0.rows() != n || Sigma0.cols() != n) throw DimensionError("Sigma0 must be n x n");
  switch (kind) {
    case Kind::Dirac:
      if (!Sigma0.isZero(0.0)) throw ConfigError("Dirac law is encoded with Sigma0 = 0");
      break;
    case Kind::Gaussian:
      if (!positive_definite(Sigma0)) throw ConfigError("Gaussian law needs Sigma0 > 0");
      break;
    case Kind::GramCharlier:
      if (!positive_definite(Sigma0)) throw ConfigError("Gram-Charlier law needs Sigma0 > 0");
      if (!prefactor || prefactor->nvars() != static_cast<std::size_t>(n))
        throw DimensionError("Gram-Charlier prefactor must be a polynomial in n variables");
      break;
  }
}

unsigned descriptor_degree(const OperatorDescriptor& op) {
  unsigned d = 0;
  for (const auto& t : op) d = std::max(d, t.x_poly.degree());
  return d;
}

OperatorSymbols::OperatorSymbols(const PerturbedModel& model) : n_(model.n) {
  model.validate();
  const std::size_t n = model.n;
  f_ = model.f;

  std::vector<Eigen::MatrixXd> nnt;
  for (const auto& v : model.nu.values()) nnt.push_back(v * v.transpose());
  nnt_ = PiecewiseConstant<Eigen::MatrixXd>(model.nu.breaks(), nnt);

  // A1 = i xi^T F(D) - 1/2 tr[xi xi^T (nu sigma^T(D) + sigma(D) nu^T)]
  std::vector<OperatorDescriptor> a1_values;
  for (const auto& nu : model.nu.values()) {
    XiMap acc;
    for (std::size_t i = 0; i < n; ++i)
      accumulate(acc, unit(n, i), Complex(0.0, 1.0) * model.F[i]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        MultiPoly s(n);
        for (std::size_t k = 0; k < model.d; ++k)
          s = s + Complex(nu(j, k)) * model.sigma(i, k) + Complex(nu(i, k)) * model.sigma(j, k);
        accumulate(acc, pair(n, i, j), Complex(-0.5) * s);
      }
    a1_values.push_back(to_descriptor(acc));
  }
  a1_ = PiecewiseConstant<OperatorDescriptor>(model.nu.breaks(), a1_values);

  // A2 = -1/2 tr[xi xi^T (sigma sigma^T(D) + gamma gamma^T(D))]
  {
    XiMap acc;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        MultiPoly s(n);
        for (std::size_t k = 0; k < model.d; ++k) s = s + model.sigma(j, k) * model.sigma(i, k);
        for (std::size_t k = 0; k < model.m; ++k) s = s + model.gamma(j, k) * model.gamma(i, k);
        accumulate(acc, pair(n, i, j), Complex(-0.5) * s);
      }
    a2_ = to_descriptor(acc);
  }

  // obs_k = H_k(D) + i xi^T gamma_{.k}(D)
  for (std::size_t k = 0; k < model.m; ++k) {
    XiMap acc;
    accumulate(acc, Exponent(n, 0), model.H[k]);
    for (std::size_t i = 0; i < n; ++i)
      accumulate(acc, unit(n, i), Complex(0.0, 1.0) * model.gamma(i, k));
    obs_.push_back(to_descriptor(acc));
  }
}

Complex OperatorSymbols::a0(double t, std::span<const double> xi) const {
  const Eigen::VectorXd& f = f_.at(t);
  const Eigen::MatrixXd& S = nnt_.at(t);
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    lin += xi[i] * f(i);
    for (std::size_t j = 0; j < n_; ++j) quad += xi[i] * S(i, j) * xi[j];
  }
  return {-0.5 * quad, lin};
}

Complex A0Increment::at(std::span<const double> xi) const {
  const auto n = static_cast<std::size_t>(lin.size());
  double l = 0.0, q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    l += xi[i] * lin(i);
    for (std::size_t j = 0; j < n; ++j) q += xi[i] * quad(i, j) * xi[j];
  }
  return {-0.5 * q, l};
}

A0Increment OperatorSymbols::a0_increment(double t0, double t1) const {
  const auto nn = static_cast<Eigen::Index>(n_);
  A0Increment inc;
  inc.lin = f_.integrate(t0, t1, [](const Eigen::VectorXd& v) { return v; },
                         Eigen::VectorXd(Eigen::VectorXd::Zero(nn)));
  inc.quad = nnt_.integrate(t0, t1, [](const Eigen::MatrixXd& v) { return v; },
                            Eigen::MatrixXd(Eigen::MatrixXd::Zero(nn, nn)));
  return inc;
}

Complex OperatorSymbols::a0_integral(double t0, double t1, std::span<const double> xi) const {
  return a0_increment(t0, t1).at(xi);
}

const OperatorDescriptor& OperatorSymbols::a1(double t) const { return a1_.at(t); }
const OperatorDescriptor& OperatorSymbols::a2(double) const { return a2_; }
const std::vector<OperatorDescriptor>& OperatorSymbols::obs(double) const { return obs_; }

OperatorSymbols build_symbols(const PerturbedModel& model) { return OperatorSymbols(model); }

MultiPoly initial_cf_polynomial(const InitialLaw& law) {
  const std::size_t n = law.dim();
  MultiPoly one = MultiPoly::constant(n, 1.0);
  if (law.kind != InitialLaw::Kind::GramCharlier) return one;
  // D_k (G Q) = G [ (x0_k + i (Sigma0 xi)_k) Q - i dQ/dxi_k ]
  auto apply_d = [&](const MultiPoly& Q, std::size_t k) {
    MultiPoly mult = MultiPoly::constant(n, law.x0(k));
    for (std::size_t j = 0; j < n; ++j)
      mult = mult + MultiPoly::variable(n, j, Complex(0.0, law.Sigma0(k, j)));
    return mult * Q - Complex(0.0, 1.0) * poly_partial(Q, k);
  };
  MultiPoly result(n);
  for (const auto& [alpha, c] : law.prefactor->terms()) {
    MultiPoly Q = one;
    for (std::size_t k = 0; k < n; ++k)
      for (unsigned r = 0; r < alpha[k]; ++r) Q = apply_d(Q, k);
    result = result + c * Q;
  }
  return result;
}

Complex initial_cf(const InitialLaw& law, std::span<const double> xi) {
  const std::size_t n = law.dim();
  if (xi.size() != n) throw DimensionError("initial_cf: xi has wrong length");
  double lin = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lin += xi[i] * law.x0(i);
    for (std::size_t j = 0; j < n; ++j) quad += xi[i] * law.Sigma0(i, j) * xi[j];
  }
  Complex g = std::exp(Complex(-0.5 * quad, lin));
  if (law.kind != InitialLaw::Kind::GramCharlier) return g;
  std::vector<Complex> pt(xi.begin(), xi.end());
  return g * poly_eval(initial_cf_polynomial(law), pt);
}

FreeMoments free_moments(const PerturbedModel& model, const InitialLaw& law, double t) {
  if (t < 0.0) throw ConfigError("free_moments: t must be non-negative");
  const auto n = static_cast<Eigen::Index>(model.n);
  FreeMoments fm;
  fm.mean = law.x0 + model.f.integrate(0.0, t, [](const Eigen::VectorXd& v) { return v; },
                                       Eigen::VectorXd(Eigen::VectorXd::Zero(n)));
  fm.cov = law.Sigma0 + model.nu.integrate(
                            0.0, t, [](const Eigen::MatrixXd& v) { return Eigen::MatrixXd(v * v.transpose()); },
                            Eigen::MatrixXd(Eigen::MatrixXd::Zero(n, n)));
  return fm;
}

}  // namespace momfilter
