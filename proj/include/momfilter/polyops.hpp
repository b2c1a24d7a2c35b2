#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace momfilter {

using Complex = std::complex<double>;
using Exponent = std::vector<unsigned>;

// Base for everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Multivariate polynomial with complex coefficients, kept in canonical form:
// no stored coefficient has magnitude below kDropTolerance.
class MultiPoly {
 public:
  static constexpr double kDropTolerance = 1e-15;

  explicit MultiPoly(std::size_t nvars = 1);

  static MultiPoly constant(std::size_t nvars, Complex c);
  static MultiPoly variable(std::size_t nvars, std::size_t var, Complex c = 1.0);
  static MultiPoly monomial(const Exponent& e, Complex c = 1.0);
  // Univariate from ascending coefficients c0 + c1 x + ...
  static MultiPoly univariate(const std::vector<Complex>& coeffs);

  std::size_t nvars() const { return nvars_; }
  const std::map<Exponent, Complex>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  unsigned degree() const;
  unsigned degree_in(std::size_t var) const;
  Complex coeff(const Exponent& e) const;

  // Adds c·x^e in place and re-canonicalizes that entry.
  MultiPoly& add_term(const Exponent& e, Complex c);

  bool operator==(const MultiPoly& other) const = default;

 private:
  std::size_t nvars_;
  std::map<Exponent, Complex> terms_;
};

MultiPoly poly_add(const MultiPoly& p, const MultiPoly& q);
MultiPoly poly_sub(const MultiPoly& p, const MultiPoly& q);
MultiPoly poly_mul(const MultiPoly& p, const MultiPoly& q);
MultiPoly poly_scale(const MultiPoly& p, Complex c);
MultiPoly poly_pow(const MultiPoly& p, unsigned k);
Complex poly_eval(const MultiPoly& p, std::span<const Complex> point);
Complex poly_eval(const MultiPoly& p, Complex x);  // univariate shortcut
MultiPoly poly_partial(const MultiPoly& p, std::size_t var);
// q(x) = p(x + shift)
MultiPoly poly_shift(const MultiPoly& p, std::span<const double> shift);

inline MultiPoly operator+(const MultiPoly& p, const MultiPoly& q) { return poly_add(p, q); }
inline MultiPoly operator-(const MultiPoly& p, const MultiPoly& q) { return poly_sub(p, q); }
inline MultiPoly operator*(const MultiPoly& p, const MultiPoly& q) { return poly_mul(p, q); }
inline MultiPoly operator*(Complex c, const MultiPoly& p) { return poly_scale(p, c); }
inline MultiPoly operator-(const MultiPoly& p) { return poly_scale(p, -1.0); }

// One term per line: "c * x1^a1 x2^a2". Complex coefficients print as (re,im).
std::string to_text(const MultiPoly& p);
// Accepts newline- or ';'-separated terms in the to_text format; a bare
// coefficient is a constant term and a bare monomial has coefficient 1.
MultiPoly parse_poly(std::string_view text, std::size_t nvars);

}  // namespace momfilter
