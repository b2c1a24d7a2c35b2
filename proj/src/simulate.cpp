#include "momfilter/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace momfilter {

namespace {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

Eigen::VectorXd eval_vec(const std::vector<MultiPoly>& p, const Eigen::VectorXd& x) {
  std::vector<Complex> pt(x.data(), x.data() + x.size());
  Eigen::VectorXd out(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) out(static_cast<Eigen::Index>(i)) = poly_eval(p[i], pt).real();
  return out;
}

Eigen::MatrixXd eval_mat(const PolyMatrix& p, const Eigen::VectorXd& x) {
  std::vector<Complex> pt(x.data(), x.data() + x.size());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(p.rows), static_cast<Eigen::Index>(p.cols));
  for (std::size_t i = 0; i < p.rows; ++i)
    for (std::size_t j = 0; j < p.cols; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = poly_eval(p(i, j), pt).real();
  return out;
}

Eigen::VectorXd normals(NormalStream& s, std::size_t n) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = s.next();
  return v;
}

Eigen::VectorXd draw_initial(const InitialLaw& law, std::uint64_t seed) {
  const std::size_t n = law.dim();
  if (law.kind == InitialLaw::Kind::Dirac) return law.x0;
  NormalStream s(seed, 0);
  Eigen::MatrixXd L = law.Sigma0.llt().matrixL();
  if (law.kind == InitialLaw::Kind::Gaussian) return law.x0 + L * normals(s, n);
  // Gram–Charlier: rejection against the Gaussian factor
  NormalStream probe(seed, 3);
  auto weight = [&](const Eigen::VectorXd& y) {
    std::vector<Complex> pt(y.data(), y.data() + y.size());
    return std::max(0.0, poly_eval(*law.prefactor, pt).real());
  };
  double bound = 0.0;
  for (int i = 0; i < 4096; ++i) bound = std::max(bound, weight(law.x0 + L * normals(probe, n)));
  if (!(bound > 0.0)) throw ConfigError("Gram-Charlier prefactor is not positive anywhere");
  bound *= 1.2;
  for (int tries = 0; tries < 1000000; ++tries) {
    Eigen::VectorXd y = law.x0 + L * normals(s, n);
    const double u = 0.5 * (1.0 + std::erf(s.next() / std::numbers::sqrt2));
    if (u * bound <= weight(y)) return y;
  }
  throw ConfigError("Gram-Charlier rejection sampling did not accept a draw");
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

double parse_double(const std::string& s, std::size_t row) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("path file row " + std::to_string(row) + ": '" + s + "' is not a number");
  }
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(0xD2511F53u, ctr[0], hi0, lo0);
    mulhilo(0xCD9E8D57u, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
  }
  return ctr;
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream) {}

double NormalStream::next() {
  if (available_ == 0) {
    const auto ctr = philox4x32_10({static_cast<std::uint32_t>(counter_),
                                    static_cast<std::uint32_t>(counter_ >> 32),
                                    static_cast<std::uint32_t>(stream_),
                                    static_cast<std::uint32_t>(stream_ >> 32)},
                                   {key_[0], key_[1]});
    ++counter_;
    constexpr double kScale = 1.0 / 4294967296.0;
    for (int p = 0; p < 2; ++p) {
      const double u1 = (ctr[2 * p] + 0.5) * kScale;
      const double u2 = (ctr[2 * p + 1] + 0.5) * kScale;
      const double r = std::sqrt(-2.0 * std::log(u1));
      buffer_[2 * p] = r * std::cos(2.0 * std::numbers::pi * u2);
      buffer_[2 * p + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
    }
    available_ = 4;
  }
  return buffer_[4 - available_--];
}

Eigen::MatrixXd ObservationPath::cumulative() const {
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(times.size()), dY.cols());
  for (Eigen::Index i = 0; i < dY.rows(); ++i) Y.row(i + 1) = Y.row(i) + dY.row(i);
  return Y;
}

void ObservationPath::validate() const {
  if (times.size() < 2) throw ConfigError("observation path needs at least one step");
  if (times.front() != 0.0) throw ConfigError("observation path must start at t = 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw ConfigError("observation times must increase strictly (row " + std::to_string(i) + ")");
  if (static_cast<std::size_t>(dY.rows()) != steps() || dY.cols() < 1)
    throw DimensionError("increment count must equal len(times) - 1");
  if (!dY.allFinite()) throw ConfigError("observation increments must be finite");
  if (X && static_cast<std::size_t>(X->rows()) != times.size())
    throw DimensionError("signal samples must cover every path time");
}

ObservationPath simulate_paths(const PerturbedModel& model, const InitialLaw& law, double T,
                               std::size_t steps, std::uint64_t seed,
                               const ExactCoefficients& exact) {
  model.validate();
  if (steps < 1) throw ConfigError("simulate_paths needs at least one step");
  if (!(T > 0.0)) throw ConfigError("simulation horizon must be positive");
  const auto n = static_cast<Eigen::Index>(model.n);
  const auto m = static_cast<Eigen::Index>(model.m);
  const double dt = T / static_cast<double>(steps);
  const double sq = std::sqrt(dt);

  ObservationPath path;
  path.times.resize(steps + 1);
  path.dY.resize(static_cast<Eigen::Index>(steps), m);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(steps + 1), n);
  NormalStream noiseV(seed, 1), noiseW(seed, 2);

  Eigen::VectorXd x = draw_initial(law, seed);
  X.row(0) = x.transpose();
  const double eps = model.eps;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    path.times[s] = t;
    const Eigen::VectorXd dV = normals(noiseV, model.d) * sq;
    const Eigen::VectorXd dW = normals(noiseW, model.m) * sq;
    const Eigen::VectorXd Fx = exact.F ? exact.F(x) : eval_vec(model.F, x);
    const Eigen::VectorXd Hx = exact.H ? exact.H(x) : eval_vec(model.H, x);
    Eigen::VectorXd dx = (model.f.at(t) + eps * Fx) * dt +
                         (model.nu.at(t) + eps * eval_mat(model.sigma, x)) * dV +
                         eps * eval_mat(model.gamma, x) * dW;
    path.dY.row(static_cast<Eigen::Index>(s)) = (eps * Hx * dt + dW).transpose();
    x += dx;
    if (!x.allFinite()) throw Error("signal simulation produced non-finite values at step " +
                                    std::to_string(s));
    X.row(static_cast<Eigen::Index>(s + 1)) = x.transpose();
  }
  path.times[steps] = T;
  path.X = std::move(X);
  return path;
}

void save_path(const ObservationPath& path, const std::filesystem::path& file, bool cumulative) {
  path.validate();
  std::ofstream out(file);
  if (!out) throw Error("cannot write path file " + file.string());
  const auto m = path.dY.cols();
  const std::string base = cumulative ? "Y" : "dY";
  out << 't';
  for (Eigen::Index k = 0; k < m; ++k) out << ',' << base << (m > 1 ? std::to_string(k + 1) : "");
  if (path.X)
    for (Eigen::Index k = 0; k < path.X->cols(); ++k)
      out << ",X" << (path.X->cols() > 1 ? std::to_string(k + 1) : "");
  out << '\n';
  Eigen::MatrixXd Y = path.cumulative();
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << g17(path.times[i]);
    for (Eigen::Index k = 0; k < m; ++k)
      out << ',' << g17(cumulative ? Y(r, k) : (i == 0 ? 0.0 : path.dY(r - 1, k)));
    if (path.X)
      for (Eigen::Index k = 0; k < path.X->cols(); ++k) out << ',' << g17((*path.X)(r, k));
    out << '\n';
  }
}

ObservationPath load_path(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read path file " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("path file is empty");
  const auto header = split(line);
  if (header.empty() || header[0] != "t") throw ParseError("path file header must start with 't'");
  bool cumulative = false;
  std::size_t m = 0, nx = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h.rfind("dY", 0) == 0) {
      if (nx) throw ParseError("observation columns must precede X columns");
      ++m;
    } else if (h.rfind("Y", 0) == 0) {
      if (nx) throw ParseError("observation columns must precede X columns");
      cumulative = true;
      ++m;
    } else if (h.rfind("X", 0) == 0) {
      ++nx;
    } else {
      throw ParseError("unknown path column '" + h + "'");
    }
  }
  if (m == 0) throw ParseError("path file needs a dY or Y column");

  std::vector<double> times;
  std::vector<std::vector<double>> obs, xs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (cells.size() != 1 + m + nx)
      throw ParseError("path file row " + std::to_string(row) + ": expected " +
                       std::to_string(1 + m + nx) + " columns, found " + std::to_string(cells.size()));
    const double t = parse_double(cells[0], row);
    if (!times.empty() && !(t > times.back()))
      throw ParseError("path file row " + std::to_string(row) + ": time does not increase");
    times.push_back(t);
    std::vector<double> o, x;
    for (std::size_t k = 0; k < m; ++k) o.push_back(parse_double(cells[1 + k], row));
    for (std::size_t k = 0; k < nx; ++k) x.push_back(parse_double(cells[1 + m + k], row));
    obs.push_back(std::move(o));
    xs.push_back(std::move(x));
  }
  if (times.size() < 2) throw ParseError("path file needs at least two rows");
  if (times.front() != 0.0) throw ParseError("path file must start at t = 0");
  for (double v : obs.front())
    if (v != 0.0)
      throw ParseError(cumulative ? "Y must start at 0 (Y_0 = 0)"
                                  : "first dY row must be 0 (no increment before t = 0)");

  ObservationPath path;
  path.times = times;
  path.dY.resize(static_cast<Eigen::Index>(times.size() - 1), static_cast<Eigen::Index>(m));
  for (std::size_t i = 1; i < times.size(); ++i)
    for (std::size_t k = 0; k < m; ++k)
      path.dY(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(k)) =
          cumulative ? obs[i][k] - obs[i - 1][k] : obs[i][k];
  if (nx) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(nx));
    for (std::size_t i = 0; i < times.size(); ++i)
      for (std::size_t k = 0; k < nx; ++k)
        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = xs[i][k];
    path.X = std::move(X);
  }
  path.validate();
  return path;
}

}  // namespace momfilter
