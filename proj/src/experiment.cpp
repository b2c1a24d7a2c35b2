#include "momfilter/experiment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>

namespace momfilter {

namespace {

namespace pt = boost::property_tree;

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

const std::string* find(const Section& s, const std::string& key) {
  auto it = s.find(key);
  return it == s.end() || it->second.empty() ? nullptr : &it->second;
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + v + "' is not a number");
  }
}

double get_double(const Section& s, const std::string& key, std::optional<double> fallback = {}) {
  if (const auto* v = find(s, key)) return to_double(*v, key);
  if (fallback) return *fallback;
  throw ConfigError("missing required key '" + key + "'");
}

unsigned long get_uint(const Section& s, const std::string& key, unsigned long fallback) {
  if (const auto* v = find(s, key)) {
    double d = to_double(*v, key);
    if (d < 0 || d != std::floor(d)) throw ConfigError("key '" + key + "' must be a non-negative integer");
    return static_cast<unsigned long>(d);
  }
  return fallback;
}

std::string get_string(const Section& s, const std::string& key, const std::string& fallback) {
  if (const auto* v = find(s, key)) return *v;
  return fallback;
}

std::vector<double> get_list(const Section& s, const std::string& key) {
  std::vector<double> out;
  if (const auto* v = find(s, key)) {
    std::stringstream ss(*v);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.erase(cell.begin());
      while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.pop_back();
      if (!cell.empty()) out.push_back(to_double(cell, key));
    }
  }
  return out;
}

Section to_section(const pt::ptree& node) {
  Section s;
  for (const auto& [k, v] : node) s[k] = v.get_value<std::string>();
  return s;
}

SolverKind parse_solver(const std::string& v) {
  const std::string s = lower(v);
  if (s == "zakai") return SolverKind::Zakai;
  if (s == "ks") return SolverKind::Ks;
  if (s == "unconditional") return SolverKind::Unconditional;
  throw ConfigError("unknown solver '" + v + "' (zakai | ks | unconditional)");
}

bool parse_bool(const std::string& v) {
  const std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("'" + v + "' is not a boolean");
}

std::string g10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MultiPoly fitted_drift(const ExperimentConfig& cfg, const VariantSpec* variant, double a,
                       double sigma, double& half_width) {
  WeightedLsmMethod m;
  const double range = get_double(cfg.fit, "range", 5.0);
  m.x_lo = -range * sigma;
  m.x_hi = range * sigma;
  m.step = get_double(cfg.fit, "step", 0.2) * sigma;
  m.degree = static_cast<unsigned>(get_uint(cfg.fit, "degree", 11));
  m.weight_w = get_double(cfg.fit, "w", 2.0);
  m.sigma = sigma;
  m.parity = Parity::Odd;
  if (variant && variant->weight_w) m.weight_w = *variant->weight_w;
  if (variant && variant->degree) m.degree = *variant->degree;
  half_width = range * sigma;
  if (a == 0.0) return MultiPoly(1);
  return lsm_fit({m, FitTarget::tanh_drift(a, sigma)});
}

BuiltModel build_benes_like(const ExperimentConfig& cfg, const VariantSpec* variant, bool linear) {
  const Section& s = cfg.model;
  const double sigma = get_double(s, "sigma");
  const double h1 = get_double(s, "h1"), h2 = get_double(s, "h2", 0.0);
  BuiltModel b;
  b.model = PerturbedModel::free(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, sigma), 1);
  b.model.eps = get_double(s, "eps", 1.0);
  if (linear) {
    const double A = get_double(s, "A", 0.0), drift = get_double(s, "b", 0.0);
    b.model.F[0] = MultiPoly::univariate({drift, A});
  } else {
    const double a = get_double(s, "a");
    b.model.F[0] = fitted_drift(cfg, variant, a, sigma, b.fit_half_width);
    b.exact.F = [a, sigma](const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Constant(1, a * sigma * std::tanh(a * x(0) / sigma));
    };
  }
  b.model.H[0] = MultiPoly::univariate({h2, h1});
  const double x0 = get_double(s, "x0", 0.0), var0 = get_double(s, "var0", 0.0);
  b.law = var0 > 0.0 ? InitialLaw::gaussian(Eigen::VectorXd::Constant(1, x0), Eigen::MatrixXd::Constant(1, 1, var0))
                     : InitialLaw::dirac(Eigen::VectorXd::Constant(1, x0));
  return b;
}

BuiltModel build_cir(const ExperimentConfig& cfg) {
  const Section& s = cfg.model;
  const double theta = get_double(s, "theta"), mu = get_double(s, "mu"), sigma = get_double(s, "sigma");
  BuiltModel b;
  b.model = PerturbedModel::free(Eigen::VectorXd::Zero(1),
                                 Eigen::MatrixXd::Constant(1, 1, sigma * std::sqrt(mu)), 1);
  b.model.eps = get_double(s, "eps", 1.0);
  b.model.F[0] = MultiPoly::univariate({theta * mu, -theta});
  FitSpec spec{TaylorMethod{mu, static_cast<unsigned>(get_uint(s, "taylor_degree", 3)), mu},
               FitTarget::sqrt_vol(mu)};
  b.model.sigma(0, 0) = Complex(sigma) * taylor_fit(spec);
  b.law = InitialLaw::dirac(Eigen::VectorXd::Constant(1, get_double(s, "x0", mu)));
  return b;
}

BuiltModel build_custom(const ExperimentConfig& cfg) {
  const Section& s = cfg.model;
  const auto n = get_uint(s, "n", 1), m = get_uint(s, "m", 1), d = get_uint(s, "d", n);
  BuiltModel b;
  std::vector<double> f = get_list(s, "f"), nu = get_list(s, "nu");
  if (f.empty()) f.assign(n, 0.0);
  if (f.size() != n || nu.size() != n * d)
    throw ConfigError("custom model: f needs n entries and nu needs n*d entries (row-major)");
  Eigen::MatrixXd N(n, d);
  for (unsigned long i = 0; i < n; ++i)
    for (unsigned long j = 0; j < d; ++j) N(i, j) = nu[i * d + j];
  b.model = PerturbedModel::free(Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(n)), N, m);
  b.model.eps = get_double(s, "eps", 1.0);
  auto poly = [&](const std::string& key) {
    const auto* v = find(s, key);
    return v ? parse_poly(*v, n) : MultiPoly(n);
  };
  for (unsigned long i = 0; i < n; ++i) {
    b.model.F[i] = poly("F" + std::to_string(i + 1));
    for (unsigned long j = 0; j < d; ++j)
      b.model.sigma(i, j) = poly("sigma" + std::to_string(i + 1) + std::to_string(j + 1));
    for (unsigned long j = 0; j < m; ++j)
      b.model.gamma(i, j) = poly("gamma" + std::to_string(i + 1) + std::to_string(j + 1));
  }
  for (unsigned long k = 0; k < m; ++k) b.model.H[k] = poly("H" + std::to_string(k + 1));
  std::vector<double> x0 = get_list(s, "x0"), S0 = get_list(s, "Sigma0");
  if (x0.empty()) x0.assign(n, 0.0);
  if (x0.size() != n) throw ConfigError("custom model: x0 needs n entries");
  Eigen::VectorXd X0 = Eigen::Map<Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(n));
  const std::string law = lower(get_string(s, "law", "dirac"));
  if (law == "dirac") {
    b.law = InitialLaw::dirac(X0);
  } else {
    if (S0.size() != n * n) throw ConfigError("custom model: Sigma0 needs n*n entries");
    Eigen::MatrixXd Sig = Eigen::Map<Eigen::MatrixXd>(S0.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (law == "gaussian")
      b.law = InitialLaw::gaussian(X0, Sig);
    else if (law == "gram_charlier")
      b.law = InitialLaw::gram_charlier(X0, Sig, poly("prefactor"));
    else
      throw ConfigError("unknown law '" + law + "'");
  }
  b.model.validate();
  return b;
}

std::string oracle_kind(const ExperimentConfig& cfg) {
  std::string k = lower(get_string(cfg.oracle, "kind", "auto"));
  if (k != "auto") return k;
  const std::string model = lower(get_string(cfg.model, "kind", ""));
  if (model == "cir") return "cir";
  if (model == "benes") return "benes";
  if (model == "linear") return "kalman";
  return "none";
}

bool oracle_is_filtered(const std::string& kind) { return kind == "benes" || kind == "kalman"; }

ZWindow window_of(const ExperimentConfig& cfg) {
  return ZWindow::line(get_double(cfg.output, "z_lo"), get_double(cfg.output, "z_hi"),
                       get_uint(cfg.output, "points", 401));
}

XiGrid grid_for(const ExperimentConfig& cfg, const BuiltModel& b, int stencil, double& reach) {
  const auto modes = get_uint(cfg.grid, "modes", 129);
  reach = NAN;
  if (const auto* xm = find(cfg.grid, "xi_max"))
    return XiGrid::uniform(b.model.n, modes, to_double(*xm, "xi_max"));
  const std::string r = lower(get_string(cfg.grid, "reach", "auto"));
  if (r == "covariance" || (r == "auto" && b.fit_half_width == 0.0)) {
    FreeMoments fm = free_moments(b.model, b.law, cfg.horizon);
    return XiGrid::from_covariance(fm.cov, modes);
  }
  if (r == "auto") {
    const double cap = get_double(cfg.grid, "reach_cap", 8.0);
    reach = stable_reach(b.model.F[0], b.fit_half_width, cap);
    if (!(reach > 0.0)) throw ConfigError("fitted drift exceeds reach_cap at the origin");
  } else {
    reach = to_double(r, "reach");
  }
  return XiGrid::from_reach(b.model.n, modes, reach, stencil);
}

std::vector<double> carrier_for(const ExperimentConfig& cfg, const BuiltModel& b) {
  const std::string c = lower(get_string(cfg.grid, "carrier", "auto"));
  if (c == "none") return {};
  if (c == "auto") {
    FreeMoments fm = free_moments(b.model, b.law, cfg.horizon);
    return std::vector<double>(fm.mean.data(), fm.mean.data() + fm.mean.size());
  }
  std::vector<double> v = get_list(cfg.grid, "carrier");
  if (v.size() != b.model.n) throw ConfigError("carrier needs one entry per dimension");
  return v;
}

ObservationPath make_path(const ExperimentConfig& cfg, const BuiltModel& b) {
  if (const auto* file = find(cfg.path, "file")) return load_path(*file);
  const auto seed = get_uint(cfg.path, "seed", 1);
  const auto steps = get_uint(cfg.path, "steps", static_cast<unsigned long>(std::llround(cfg.horizon / cfg.dt)));
  return simulate_paths(b.model, b.law, cfg.horizon, steps, seed, b.exact);
}

std::optional<DensityGrid> exact_density(const ExperimentConfig& cfg, const BuiltModel& b,
                                         const ObservationPath& path, const std::string& kind) {
  const ZWindow w = window_of(cfg);
  if (kind == "none") return std::nullopt;
  if (kind == "cir") {
    CirParams p{get_double(cfg.model, "theta"), get_double(cfg.model, "mu"),
                get_double(cfg.model, "sigma"), b.law.x0(0)};
    return cir_exact_density(p, cfg.horizon).sample(w.lo[0], w.hi[0], w.points[0]);
  }
  if (kind == "benes") {
    BenesParams p{get_double(cfg.model, "a"), get_double(cfg.model, "sigma"),
                  get_double(cfg.model, "h1"), get_double(cfg.model, "h2", 0.0)};
    if (b.law.x0(0) != 0.0 || b.law.kind != InitialLaw::Kind::Dirac)
      throw ConfigError("Benes oracle assumes X_0 = 0");
    return benes_exact_density(p, path, cfg.horizon, w.lo[0], w.hi[0]).sample(w.lo[0], w.hi[0], w.points[0]);
  }
  if (kind == "kalman") {
    auto kb = kalman_bucy(get_double(cfg.model, "A", 0.0), get_double(cfg.model, "b", 0.0),
                          get_double(cfg.model, "h1"), get_double(cfg.model, "h2", 0.0),
                          get_double(cfg.model, "sigma"), b.law.x0(0), b.law.Sigma0(0, 0), path);
    const auto it = std::find_if(kb.begin(), kb.end(), [&](const KalmanBucyPoint& p) {
      return std::abs(p.t - cfg.horizon) <= 1e-9 * std::max(1.0, cfg.horizon);
    });
    if (it == kb.end()) throw ConfigError("horizon is not on the path grid");
    OracleDensity o;
    const double m = it->mean, v = it->var;
    o.pdf = [m, v](double z) { return std::exp(-0.5 * (z - m) * (z - m) / v) / std::sqrt(2.0 * std::numbers::pi * v); };
    return o.sample(w.lo[0], w.hi[0], w.points[0]);
  }
  throw ConfigError("unknown oracle kind '" + kind + "'");
}

VariantResult run_variant(const ExperimentConfig& cfg, const VariantSpec& v,
                          const ObservationPath& path, const std::optional<DensityGrid>& exact,
                          bool filtered_oracle, bool verbose) {
  VariantResult r;
  r.name = v.name;
  const auto start = std::chrono::steady_clock::now();
  try {
    BuiltModel b = build_model(cfg, &v);
    if (v.eps) b.model.eps = *v.eps;
    SolverConfig sc;
    sc.max_order = v.max_order;
    sc.dt = cfg.dt;
    sc.substeps = v.substeps;
    sc.substep_order = v.substep_order;
    sc.horizon = cfg.horizon;
    sc.spectral.stencil_order = static_cast<int>(get_uint(cfg.grid, "stencil", 4));
    sc.spectral.carrier = carrier_for(cfg, b);
    sc.grid = grid_for(cfg, b, sc.spectral.stencil_order, r.reach);
    sc.record_diagnostics = verbose;
    r.xi_max = sc.grid->xi_max(0);

    std::unique_ptr<ExpansionRun> run;
    if (v.solver == SolverKind::Ks)
      run = std::make_unique<KsRun>(b.model, b.law, *sc.grid, sc);
    else
      run = std::make_unique<ZakaiRun>(b.model, b.law, *sc.grid, sc);
    try {
      drive(*run, v.solver == SolverKind::Unconditional ? nullptr : &path, cfg.horizon);
    } catch (const NumericalBlowUp& e) {
      r.blew_up = true;
      r.message = e.what();
      r.max_symmetry = run->max_symmetry_residual();
      r.diagnostics = run->diagnostics();
      r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      return r;
    }
    const SpectralState& st = run->state();
    const double eps = b.model.eps;
    r.max_symmetry = run->max_symmetry_residual();
    r.diagnostics = run->diagnostics();
    const Complex m0 = moments_at_zero(st, eps, MultiPoly::constant(1, 1.0), sc.spectral);
    const Complex m1 = moments_at_zero(st, eps, MultiPoly::univariate({0.0, 1.0}), sc.spectral);
    const Complex m2 = moments_at_zero(st, eps, MultiPoly::univariate({0.0, 0.0, 1.0}), sc.spectral);
    r.mass = m0.real();
    r.mean = (m1 / m0).real();
    r.variance = (m2 / m0).real() - r.mean * r.mean;

    DensityGrid g = invert_to_density(st, eps, window_of(cfg), sc.spectral.policy);
    if (v.solver != SolverKind::Unconditional) g.values = g.normalized();
    r.density = std::move(g);
    const bool comparable = exact && (filtered_oracle == (v.solver != SolverKind::Unconditional));
    if (comparable) {
      DensityDiff d = diff_densities(*r.density, *exact);
      r.linf = d.linf;
      r.l1 = d.l1;
      r.peak_gap = d.peak_gap;
    }
    r.ok = true;
  } catch (const DensityError& e) {
    r.message = e.what();
  }
  r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  // the INI reader drops sections without keys, so walk the headers in file
  // order; an empty [variant.x] is a variant with every default
  std::vector<std::string> headers;
  {
    std::istringstream scan(text);
    for (std::string line; std::getline(scan, line);) {
      const auto a = line.find_first_not_of(" \t");
      if (a == std::string::npos || line[a] != '[') continue;
      const auto b = line.find(']', a);
      std::string key = line.substr(a + 1, b - a - 1);
      while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
      while (!key.empty() && std::isspace(static_cast<unsigned char>(key.front()))) key.erase(key.begin());
      headers.push_back(key);
    }
  }
  for (const auto& [key, node] : tree)
    if (node.empty()) throw ConfigError("key '" + key + "' must sit inside a section");
  ExperimentConfig cfg;
  for (const auto& key : headers) {
    const auto child = tree.get_child_optional(pt::ptree::path_type(key, '\0'));
    const Section s = child ? to_section(*child) : Section{};
    if (key == "experiment") {
      cfg.name = get_string(s, "name", cfg.name);
      cfg.horizon = get_double(s, "horizon", cfg.horizon);
      cfg.dt = get_double(s, "dt", cfg.dt);
    } else if (key == "model") {
      cfg.model = s;
    } else if (key == "fit") {
      cfg.fit = s;
    } else if (key == "grid") {
      cfg.grid = s;
    } else if (key == "path") {
      cfg.path = s;
    } else if (key == "output") {
      cfg.output = s;
    } else if (key == "oracle") {
      cfg.oracle = s;
    } else if (key.rfind("variant.", 0) == 0) {
      VariantSpec v;
      v.name = key.substr(8);
      if (v.name.empty()) throw ConfigError("variant section needs a name");
      v.solver = parse_solver(get_string(s, "solver", "zakai"));
      v.max_order = static_cast<unsigned>(get_uint(s, "order", 1));
      v.substeps = get_uint(s, "substeps", 1);
      v.substep_order = static_cast<unsigned>(get_uint(s, "substep_order", std::min(v.max_order, 1u)));
      if (find(s, "eps")) v.eps = get_double(s, "eps");
      if (find(s, "w")) v.weight_w = get_double(s, "w");
      if (find(s, "degree")) v.degree = static_cast<unsigned>(get_uint(s, "degree", 11));
      if (const auto* e = find(s, "expect_failure")) v.expect_failure = parse_bool(*e);
      if (find(s, "max_linf_rel")) v.max_linf_rel = get_double(s, "max_linf_rel");
      cfg.variants.push_back(std::move(v));
    } else {
      throw ConfigError("unknown config section [" + key + "]");
    }
  }
  if (cfg.model.empty()) throw ConfigError("config needs a [model] section");
  if (cfg.variants.empty()) throw ConfigError("config needs at least one [variant.<name>] section");
  if (!(cfg.horizon > 0.0) || !(cfg.dt > 0.0)) throw ConfigError("horizon and dt must be positive");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

BuiltModel build_model(const ExperimentConfig& cfg, const VariantSpec* variant) {
  const std::string kind = lower(get_string(cfg.model, "kind", ""));
  BuiltModel b;
  if (kind == "cir")
    b = build_cir(cfg);
  else if (kind == "benes")
    b = build_benes_like(cfg, variant, false);
  else if (kind == "linear")
    b = build_benes_like(cfg, variant, true);
  else if (kind == "custom")
    b = build_custom(cfg);
  else
    throw ConfigError("unknown model kind '" + kind + "' (cir | benes | linear | custom)");
  b.carrier = carrier_for(cfg, b);
  return b;
}

const VariantResult& ExperimentReport::variant(const std::string& n) const {
  for (const auto& v : variants)
    if (v.name == n) return v;
  throw ConfigError("no variant named '" + n + "'");
}

bool ExperimentReport::any_unexpected_blowup(const ExperimentConfig& cfg) const {
  for (std::size_t i = 0; i < variants.size(); ++i)
    if (variants[i].blew_up && !cfg.variants[i].expect_failure) return true;
  return false;
}

bool ExperimentReport::any_tolerance_violation(const ExperimentConfig& cfg) const {
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto& spec = cfg.variants[i];
    if (!spec.max_linf_rel || !exact) continue;
    const auto& r = variants[i];
    if (!r.ok || !(r.linf <= *spec.max_linf_rel * exact->peak())) return true;
  }
  return false;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, bool verbose) {
  ExperimentReport rep;
  rep.name = cfg.name;
  const BuiltModel base = build_model(cfg);
  rep.path = make_path(cfg, base);
  const std::string kind = oracle_kind(cfg);
  rep.exact = exact_density(cfg, base, rep.path, kind);
  rep.variants.resize(cfg.variants.size());
  // variants are independent; each owns its solver state
  std::vector<std::exception_ptr> errors(cfg.variants.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < cfg.variants.size(); ++i) {
    try {
      rep.variants[i] =
          run_variant(cfg, cfg.variants[i], rep.path, rep.exact, oracle_is_filtered(kind), verbose);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rep;
}

void save_density(const DensityGrid& g, const std::filesystem::path& file) {
  if (g.dim() != 1) {
    // n-D: z1,..,zn,value in row-major order
    std::ofstream out(file);
    for (std::size_t a = 0; a < g.dim(); ++a) out << 'z' << (a + 1) << ',';
    out << "value\n";
    std::vector<std::size_t> idx(g.dim(), 0);
    for (double v : g.values) {
      for (std::size_t a = 0; a < g.dim(); ++a) out << g17(g.axes[a][idx[a]]) << ',';
      out << g17(v) << '\n';
      for (std::size_t a = g.dim(); a-- > 0;) {
        if (++idx[a] < g.axes[a].size()) break;
        idx[a] = 0;
      }
    }
    return;
  }
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << "z,value\n";
  for (std::size_t i = 0; i < g.values.size(); ++i) out << g17(g.z()[i]) << ',' << g17(g.values[i]) << '\n';
}

DensityGrid load_density(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read " + file.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("z,value", 0) != 0) throw ParseError(file.string() + ": expected header 'z,value'");
  DensityGrid g;
  g.axes.emplace_back();
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(file.string() + ": malformed row " + std::to_string(row));
    g.axes[0].push_back(to_double(line.substr(0, comma), "z"));
    g.values.push_back(to_double(line.substr(comma + 1), "value"));
  }
  if (g.values.size() < 2) throw ParseError(file.string() + ": needs at least two rows");
  g.mass = trapezoid(g.axes, g.values);
  return g;
}

void save_state(const SpectralState& s, const std::filesystem::path& file) {
  if (s.grid.dim() != 1) throw DimensionError("state snapshots are written for 1-D grids");
  std::ofstream out(file);
  out << "xi";
  for (std::size_t j = 0; j < s.orders.size(); ++j) out << ",re_order" << j << ",im_order" << j;
  out << '\n';
  for (std::size_t k = 0; k < s.grid.size(); ++k) {
    out << g17(s.grid.axis_value(0, k));
    for (const auto& o : s.orders) out << ',' << g17(o[k].real()) << ',' << g17(o[k].imag());
    out << '\n';
  }
}

DensityDiff diff_densities(const DensityGrid& a, const DensityGrid& b) {
  if (a.dim() != 1 || b.dim() != 1 || a.values.size() != b.values.size())
    throw ConfigError("density grids do not match");
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (std::abs(a.z()[i] - b.z()[i]) > 1e-9 * std::max(1.0, std::abs(a.z()[i])))
      throw ConfigError("density grids do not match at row " + std::to_string(i + 1));
  std::vector<double> d(a.values.size());
  double linf = 0.0, pa = -INFINITY, pb = -INFINITY;
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = std::abs(a.values[i] - b.values[i]);
    linf = std::max(linf, d[i]);
    pa = std::max(pa, a.values[i]);
    pb = std::max(pb, b.values[i]);
  }
  return {linf, trapezoid(a.axes, d), pa - pb};
}

DensityDiff diff_densities(const std::filesystem::path& a, const std::filesystem::path& b) {
  return diff_densities(load_density(a), load_density(b));
}

std::size_t count_local_maxima(const std::vector<double>& v, double rel_floor) {
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, x);
  std::size_t count = 0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (!(v[i] > v[i - 1]) || v[i] <= rel_floor * peak) continue;
    // walk across a plateau
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    if (j + 1 < v.size() && v[j + 1] < v[i]) ++count;
    i = j;
  }
  return count;
}

void write_report(const ExperimentReport& rep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_path(rep.path, dir / "path.csv");
  if (rep.exact) save_density(*rep.exact, dir / "density_exact.csv");
  std::ofstream sum(dir / "summary.csv"), timing(dir / "timing.csv");
  if (!sum || !timing) throw Error("cannot write report files in " + dir.string());
  sum << "variant,status,linf,linf_rel,l1,peak_gap,mass,mean,variance,max_symmetry,reach,xi_max,message\n";
  timing << "variant,runtime_ms\n";
  const double peak = rep.exact ? rep.exact->peak() : NAN;
  for (const auto& r : rep.variants) {
    const std::string status = r.ok ? "ok" : (r.blew_up ? "blowup" : "failed");
    std::string msg = r.message;
    for (char& c : msg)
      if (c == ',' || c == '\n') c = ';';
    sum << r.name << ',' << status << ',' << g10(r.linf) << ',' << g10(r.linf / peak) << ','
        << g10(r.l1) << ',' << g10(r.peak_gap) << ',' << g10(r.mass) << ',' << g10(r.mean) << ','
        << g10(r.variance) << ',' << g10(r.max_symmetry) << ',' << g10(r.reach) << ','
        << g10(r.xi_max) << ',' << msg << '\n';
    timing << r.name << ',' << g10(r.runtime_ms) << '\n';
    if (r.density) {
      save_density(*r.density, dir / ("density_" + r.name + ".csv"));
      if (rep.exact && !std::isnan(r.linf)) {
        std::ofstream err(dir / ("error_" + r.name + ".csv"));
        err << "z,value\n";
        for (std::size_t i = 0; i < r.density->values.size(); ++i)
          err << g17(r.density->z()[i]) << ',' << g17(r.density->values[i] - rep.exact->values[i]) << '\n';
      }
    }
    if (!r.diagnostics.empty()) {
      std::ofstream dg(dir / ("diagnostics_" + r.name + ".csv"));
      dg << "t,mass,symmetry_residual\n";
      for (const auto& d : r.diagnostics)
        dg << g17(d.t) << ',' << g17(d.mass) << ',' << g17(d.symmetry_residual) << '\n';
    }
  }
}

}  // namespace momfilter
