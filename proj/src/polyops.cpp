#include "momfilter/polyops.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace momfilter {

namespace {

void require_same(const MultiPoly& p, const MultiPoly& q, const char* op) {
  if (p.nvars() != q.nvars())
    throw DimensionError(std::string(op) + ": nvars mismatch (" + std::to_string(p.nvars()) +
                         " vs " + std::to_string(q.nvars()) + ")");
}

Complex ipow(Complex x, unsigned k) {
  Complex r = 1.0;
  while (k) {
    if (k & 1u) r *= x;
    x *= x;
    k >>= 1u;
  }
  return r;
}

double binomial(unsigned n, unsigned k) {
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MultiPoly::MultiPoly(std::size_t nvars) : nvars_(nvars) {
  if (nvars == 0) throw DimensionError("MultiPoly needs at least one variable");
}

MultiPoly MultiPoly::constant(std::size_t nvars, Complex c) {
  MultiPoly p(nvars);
  p.add_term(Exponent(nvars, 0), c);
  return p;
}

MultiPoly MultiPoly::variable(std::size_t nvars, std::size_t var, Complex c) {
  if (var >= nvars) throw DimensionError("variable index out of range");
  Exponent e(nvars, 0);
  e[var] = 1;
  MultiPoly p(nvars);
  p.add_term(e, c);
  return p;
}

MultiPoly MultiPoly::monomial(const Exponent& e, Complex c) {
  MultiPoly p(e.size());
  p.add_term(e, c);
  return p;
}

MultiPoly MultiPoly::univariate(const std::vector<Complex>& coeffs) {
  MultiPoly p(1);
  for (unsigned k = 0; k < coeffs.size(); ++k) p.add_term(Exponent{k}, coeffs[k]);
  return p;
}

unsigned MultiPoly::degree() const {
  unsigned d = 0;
  for (const auto& [e, c] : terms_) {
    unsigned s = 0;
    for (unsigned a : e) s += a;
    d = std::max(d, s);
  }
  return d;
}

unsigned MultiPoly::degree_in(std::size_t var) const {
  unsigned d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e.at(var));
  return d;
}

Complex MultiPoly::coeff(const Exponent& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? Complex{} : it->second;
}

MultiPoly& MultiPoly::add_term(const Exponent& e, Complex c) {
  if (e.size() != nvars_)
    throw DimensionError("exponent length " + std::to_string(e.size()) + " != nvars " +
                         std::to_string(nvars_));
  auto [it, inserted] = terms_.try_emplace(e, Complex{});
  it->second += c;
  if (std::abs(it->second) < kDropTolerance) terms_.erase(it);
  return *this;
}

MultiPoly poly_add(const MultiPoly& p, const MultiPoly& q) {
  require_same(p, q, "poly_add");
  MultiPoly r = p;
  for (const auto& [e, c] : q.terms()) r.add_term(e, c);
  return r;
}

MultiPoly poly_sub(const MultiPoly& p, const MultiPoly& q) {
  require_same(p, q, "poly_sub");
  MultiPoly r = p;
  for (const auto& [e, c] : q.terms()) r.add_term(e, -c);
  return r;
}

MultiPoly poly_mul(const MultiPoly& p, const MultiPoly& q) {
  require_same(p, q, "poly_mul");
  // accumulate raw sums first so that cancellation is judged on the final value
  std::map<Exponent, Complex> acc;
  Exponent e(p.nvars());
  for (const auto& [ep, cp] : p.terms())
    for (const auto& [eq, cq] : q.terms()) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ep[i] + eq[i];
      acc[e] += cp * cq;
    }
  MultiPoly r(p.nvars());
  for (const auto& [ex, c] : acc) r.add_term(ex, c);
  return r;
}

MultiPoly poly_scale(const MultiPoly& p, Complex c) {
  MultiPoly r(p.nvars());
  for (const auto& [e, v] : p.terms()) r.add_term(e, v * c);
  return r;
}

MultiPoly poly_pow(const MultiPoly& p, unsigned k) {
  MultiPoly r = MultiPoly::constant(p.nvars(), 1.0);
  for (unsigned i = 0; i < k; ++i) r = poly_mul(r, p);
  return r;
}

Complex poly_eval(const MultiPoly& p, std::span<const Complex> point) {
  if (point.size() != p.nvars())
    throw DimensionError("poly_eval: point has " + std::to_string(point.size()) +
                         " coordinates, polynomial has " + std::to_string(p.nvars()));
  Complex s = 0.0;
  for (const auto& [e, c] : p.terms()) {
    Complex t = c;
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i]) t *= ipow(point[i], e[i]);
    s += t;
  }
  return s;
}

Complex poly_eval(const MultiPoly& p, Complex x) {
  return poly_eval(p, std::span<const Complex>(&x, 1));
}

MultiPoly poly_partial(const MultiPoly& p, std::size_t var) {
  if (var >= p.nvars()) throw DimensionError("poly_partial: variable index out of range");
  MultiPoly r(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    if (e[var] == 0) continue;
    Exponent d = e;
    d[var] -= 1;
    r.add_term(d, c * static_cast<double>(e[var]));
  }
  return r;
}

MultiPoly poly_shift(const MultiPoly& p, std::span<const double> shift) {
  if (shift.size() != p.nvars()) throw DimensionError("poly_shift: shift length mismatch");
  std::map<Exponent, Complex> acc;
  const std::size_t n = p.nvars();
  for (const auto& [e, c] : p.terms()) {
    // expand prod_i (x_i + s_i)^{e_i} by iterating over all sub-exponents
    Exponent k(n, 0);
    while (true) {
      Complex w = c;
      for (std::size_t i = 0; i < n; ++i)
        w *= binomial(e[i], k[i]) * std::pow(shift[i], static_cast<int>(e[i] - k[i]));
      acc[k] += w;
      std::size_t i = 0;
      while (i < n && k[i] == e[i]) k[i++] = 0;
      if (i == n) break;
      ++k[i];
    }
  }
  MultiPoly r(n);
  for (const auto& [ex, c] : acc) r.add_term(ex, c);
  return r;
}

std::string to_text(const MultiPoly& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    if (!first) os << '\n';
    first = false;
    if (c.imag() == 0.0)
      os << fmt_double(c.real());
    else
      os << '(' << fmt_double(c.real()) << ',' << fmt_double(c.imag()) << ')';
    bool any = false;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!e[i]) continue;
      os << (any ? " " : " * ") << 'x' << (i + 1);
      if (e[i] > 1) os << '^' << e[i];
      any = true;
    }
  }
  return os.str();
}

namespace {

struct Cursor {
  std::string_view s;
  std::size_t i = 0;
  void skip() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool done() {
    skip();
    return i >= s.size();
  }
  char peek() {
    skip();
    return i < s.size() ? s[i] : '\0';
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("polynomial term '" + std::string(s) + "': " + what);
  }
  double number() {
    skip();
    double v = 0.0;
    auto res = std::from_chars(s.data() + i, s.data() + s.size(), v);
    if (res.ec != std::errc()) fail("expected a number at offset " + std::to_string(i));
    i = static_cast<std::size_t>(res.ptr - s.data());
    return v;
  }
  unsigned integer() {
    skip();
    unsigned v = 0;
    auto res = std::from_chars(s.data() + i, s.data() + s.size(), v);
    if (res.ec != std::errc()) fail("expected an exponent at offset " + std::to_string(i));
    i = static_cast<std::size_t>(res.ptr - s.data());
    return v;
  }
};

void parse_term(std::string_view text, std::size_t nvars, MultiPoly& out) {
  Cursor c{text};
  Complex coef = 1.0;
  double sign = 1.0;
  if (c.peek() == '+' || c.peek() == '-') {
    // a sign directly in front of a monomial, e.g. "-x1"
    std::size_t save = c.i;
    sign = c.s[c.i] == '-' ? -1.0 : 1.0;
    ++c.i;
    if (c.peek() != 'x' && sign < 0) {
      c.i = save;
      sign = 1.0;
    }
  }
  bool have_coef = false;
  if (c.peek() == '(') {
    ++c.i;
    double re = c.number();
    if (c.peek() != ',') c.fail("expected ',' in complex coefficient");
    ++c.i;
    double im = c.number();
    if (c.peek() != ')') c.fail("expected ')'");
    ++c.i;
    coef = {re, im};
    have_coef = true;
  } else if (c.peek() != 'x') {
    coef = c.number();
    have_coef = true;
  }
  coef *= sign;
  if (have_coef && !c.done()) {
    if (c.peek() != '*') c.fail("expected '*' between coefficient and monomial");
    ++c.i;
  }
  Exponent e(nvars, 0);
  while (!c.done()) {
    if (c.peek() != 'x') c.fail("expected a variable x<k>");
    ++c.i;
    std::size_t var = 0;
    if (c.i < c.s.size() && std::isdigit(static_cast<unsigned char>(c.s[c.i]))) {
      var = c.integer();
      if (var == 0) c.fail("variables are numbered from 1");
      --var;
    } else if (nvars != 1) {
      c.fail("bare 'x' is only allowed for univariate polynomials");
    }
    if (var >= nvars) c.fail("variable index exceeds nvars");
    unsigned pw = 1;
    if (c.peek() == '^') {
      ++c.i;
      pw = c.integer();
    }
    e[var] += pw;
  }
  out.add_term(e, coef);
}

}  // namespace

MultiPoly parse_poly(std::string_view text, std::size_t nvars) {
  MultiPoly p(nvars);
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of(";\n", start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view term = text.substr(start, end - start);
    bool blank = std::all_of(term.begin(), term.end(),
                             [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
    if (!blank) {
      std::string_view trimmed = term;
      while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front())))
        trimmed.remove_prefix(1);
      if (trimmed != "0") parse_term(term, nvars, p);
    }
    start = end + 1;
  }
  return p;
}

}  // namespace momfilter
