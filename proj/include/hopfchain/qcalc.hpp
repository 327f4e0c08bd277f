#pragma once

/**
 * @file qcalc.hpp
 * @brief Exact arithmetic over Q[q, q^-1].
 *
 * Rationals are GMP rationals kept in lowest terms. A LaurentPoly is a sparse
 * map from integer exponent to nonzero rational coefficient; the zero
 * polynomial is the empty map. q-numbers, q-factorials and q-binomials use the
 * symmetric convention [n] = q^{n-1} + q^{n-3} + ... + q^{1-n}.
 */

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace hopfchain::qcalc {

using BigInt = mpz_class;
using Rational = mpq_class;
using Exponent = std::int64_t;

/// Parses "p/r" or "p" into a canonical rational. Throws ParseError.
Rational parse_rational(std::string_view text);

/// "p/r", or "p" when the denominator is 1.
std::string to_string(const Rational& r);

/// r^e for any integer e (r must be nonzero when e < 0).
Rational pow(const Rational& r, Exponent e);

class LaurentPoly {
 public:
  using Terms = std::map<Exponent, Rational>;

  LaurentPoly() = default;
  LaurentPoly(const Rational& constant);  // NOLINT: implicit scalar embedding
  LaurentPoly(int constant) : LaurentPoly(Rational(constant)) {}  // NOLINT

  /// c * q^e
  static LaurentPoly monomial(Exponent e, const Rational& c = 1);
  static LaurentPoly q() { return monomial(1); }

  bool is_zero() const noexcept { return terms_.empty(); }
  const Terms& terms() const noexcept { return terms_; }
  Rational coefficient(Exponent e) const;
  Exponent min_exponent() const;  // requires !is_zero()
  Exponent max_exponent() const;  // requires !is_zero()

  /// Adds c * q^e in place, dropping the term when it cancels.
  void add_term(Exponent e, const Rational& c);

  LaurentPoly& operator+=(const LaurentPoly& other);
  LaurentPoly& operator-=(const LaurentPoly& other);
  LaurentPoly& operator*=(const LaurentPoly& other);
  LaurentPoly operator-() const;

  /// Multiplies by q^e.
  LaurentPoly shifted(Exponent e) const;

  /// Substitutes q := 1/q.
  LaurentPoly bar() const;

  friend LaurentPoly operator+(LaurentPoly a, const LaurentPoly& b) { return a += b; }
  friend LaurentPoly operator-(LaurentPoly a, const LaurentPoly& b) { return a -= b; }
  friend LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b);
  friend bool operator==(const LaurentPoly& a, const LaurentPoly& b) { return a.terms_ == b.terms_; }

 private:
  Terms terms_;
};

/// Human readable form, e.g. "q^2 + 1 + 2*q^-1".
std::string to_string(const LaurentPoly& p);

LaurentPoly lp_mul(const LaurentPoly& a, const LaurentPoly& b);

/// Exact quotient in the Laurent ring. Throws NonExactDivision, or
/// std::invalid_argument when b is zero.
LaurentPoly lp_exact_div(const LaurentPoly& a, const LaurentPoly& b);

/// Exact substitution q := q0. Throws ZeroEvaluationPoint when q0 = 0 and a
/// has a negative exponent.
Rational lp_eval(const LaurentPoly& a, const Rational& q0);

/// True when every coefficient is a nonnegative integer.
bool has_nonnegative_integer_coefficients(const LaurentPoly& p);

LaurentPoly q_number(std::int64_t n);
LaurentPoly q_factorial(std::int64_t n);

/// [n choose k] = [n]! / ([k]! [n-k]!). Throws OutOfRange when k > n or either
/// argument is negative.
LaurentPoly q_binomial(std::int64_t n, std::int64_t k);

/// (-1; q0)_k = (1 + 1)(1 + q0)...(1 + q0^{k-1}).
Rational q_pochhammer_minus1(std::int64_t k, const Rational& q0);

}  // namespace hopfchain::qcalc
