#include "hopfchain/qcalc.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

#include "hopfchain/error.hpp"

namespace hopfchain::qcalc {

namespace {

bool is_integer_literal(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  const std::string_view num = text.substr(0, slash);
  const std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
  if (!is_integer_literal(num)) throw ParseError("expected an integer numerator in '" + std::string(text) + "'", 0);
  if (!is_integer_literal(den) || den.front() == '-' || den.front() == '+') {
    throw ParseError("expected a positive integer denominator in '" + std::string(text) + "'", slash + 1);
  }
  const std::string num_s(num.front() == '+' ? num.substr(1) : num);
  BigInt n(num_s, 10), d{std::string(den), 10};
  if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'", slash + 1);
  Rational r(n, d);
  r.canonicalize();
  return r;
}

std::string to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Rational pow(const Rational& r, Exponent e) {
  if (e < 0) {
    if (r == 0) throw std::domain_error("negative power of zero");
    return pow(Rational(1) / r, -e);
  }
  BigInt num, den;
  mpz_pow_ui(num.get_mpz_t(), r.get_num_mpz_t(), static_cast<unsigned long>(e));
  mpz_pow_ui(den.get_mpz_t(), r.get_den_mpz_t(), static_cast<unsigned long>(e));
  // Powers of coprime integers stay coprime.
  Rational out;
  mpq_set_num(out.get_mpq_t(), num.get_mpz_t());
  mpq_set_den(out.get_mpq_t(), den.get_mpz_t());
  return out;
}

LaurentPoly::LaurentPoly(const Rational& constant) {
  if (constant != 0) terms_.emplace(0, constant);
}

LaurentPoly LaurentPoly::monomial(Exponent e, const Rational& c) {
  LaurentPoly p;
  if (c != 0) p.terms_.emplace(e, c);
  return p;
}

Rational LaurentPoly::coefficient(Exponent e) const {
  const auto it = terms_.find(e);
  return it == terms_.end() ? Rational(0) : it->second;
}

Exponent LaurentPoly::min_exponent() const {
  if (terms_.empty()) throw std::logic_error("min_exponent of the zero polynomial");
  return terms_.begin()->first;
}

Exponent LaurentPoly::max_exponent() const {
  if (terms_.empty()) throw std::logic_error("max_exponent of the zero polynomial");
  return terms_.rbegin()->first;
}

void LaurentPoly::add_term(Exponent e, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (inserted) return;
  it->second += c;
  if (it->second == 0) terms_.erase(it);
}

LaurentPoly& LaurentPoly::operator+=(const LaurentPoly& other) {
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

LaurentPoly& LaurentPoly::operator-=(const LaurentPoly& other) {
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

LaurentPoly& LaurentPoly::operator*=(const LaurentPoly& other) {
  *this = *this * other;
  return *this;
}

LaurentPoly LaurentPoly::operator-() const {
  LaurentPoly out;
  for (const auto& [e, c] : terms_) out.terms_.emplace_hint(out.terms_.end(), e, -c);
  return out;
}

LaurentPoly LaurentPoly::shifted(Exponent shift) const {
  LaurentPoly out;
  for (const auto& [e, c] : terms_) out.terms_.emplace_hint(out.terms_.end(), e + shift, c);
  return out;
}

LaurentPoly LaurentPoly::bar() const {
  LaurentPoly out;
  for (const auto& [e, c] : terms_) out.terms_.emplace(-e, c);
  return out;
}

LaurentPoly operator*(const LaurentPoly& a, const LaurentPoly& b) {
  LaurentPoly out;
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) out.add_term(ea + eb, ca * cb);
  }
  return out;
}

std::string to_string(const LaurentPoly& p) {
  if (p.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [e, c] = *it;
    Rational mag = abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    const bool unit = mag == 1;
    if (e == 0) {
      os << to_string(mag);
      continue;
    }
    if (!unit) os << to_string(mag) << "*";
    os << "q";
    if (e != 1) os << "^" << e;
  }
  return os.str();
}

LaurentPoly lp_mul(const LaurentPoly& a, const LaurentPoly& b) { return a * b; }

LaurentPoly lp_exact_div(const LaurentPoly& a, const LaurentPoly& b) {
  if (b.is_zero()) throw std::invalid_argument("division by the zero polynomial");
  if (a.is_zero()) return {};
  // Long division from the top degree; b's lowest term bounds where an exact
  // quotient can stop.
  const Exponent b_top = b.max_exponent();
  const Exponent b_low = b.min_exponent();
  const Rational lead = b.coefficient(b_top);
  const Exponent stop = a.min_exponent() - b_low;
  LaurentPoly rem = a;
  LaurentPoly quotient;
  while (!rem.is_zero()) {
    const Exponent shift = rem.max_exponent() - b_top;
    if (shift < stop) throw NonExactDivision();
    const Rational factor = rem.coefficient(rem.max_exponent()) / lead;
    quotient.add_term(shift, factor);
    rem -= LaurentPoly::monomial(shift, factor) * b;
  }
  return quotient;
}

Rational lp_eval(const LaurentPoly& a, const Rational& q0) {
  if (a.is_zero()) return 0;
  if (q0 == 0) {
    if (a.min_exponent() < 0) throw ZeroEvaluationPoint();
    return a.coefficient(0);
  }
  Rational sum = 0;
  for (const auto& [e, c] : a.terms()) sum += c * pow(q0, e);
  return sum;
}

bool has_nonnegative_integer_coefficients(const LaurentPoly& p) {
  for (const auto& [e, c] : p.terms()) {
    if (c < 0 || c.get_den() != 1) return false;
  }
  return true;
}

LaurentPoly q_number(std::int64_t n) {
  if (n < 0) throw OutOfRange("q_number requires n >= 0");
  LaurentPoly out;
  for (std::int64_t j = 0; j < n; ++j) out.add_term(n - 1 - 2 * j, 1);
  return out;
}

LaurentPoly q_factorial(std::int64_t n) {
  if (n < 0) throw OutOfRange("q_factorial requires n >= 0");
  LaurentPoly out(1);
  for (std::int64_t j = 2; j <= n; ++j) out *= q_number(j);
  return out;
}

LaurentPoly q_binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) {
    throw OutOfRange("q_binomial requires 0 <= k <= n, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
  // Exactness is guaranteed; a NonExactDivision here is a bug and propagates.
  return lp_exact_div(q_factorial(n), q_factorial(k) * q_factorial(n - k));
}

Rational q_pochhammer_minus1(std::int64_t k, const Rational& q0) {
  if (k < 0) throw OutOfRange("q_pochhammer_minus1 requires k >= 0");
  Rational out = 1;
  Rational power = 1;
  for (std::int64_t i = 0; i < k; ++i) {
    out *= 1 + power;
    power *= q0;
  }
  return out;
}

}  // namespace hopfchain::qcalc
