#pragma once

/**
 * @file hopf.hpp
 * @brief The Hopf algebra generated by E, K and K^-1 with KE = q^2 EK.
 *
 * Elements are sparse combinations of normal-ordered monomials E^i K^l with
 * Laurent-polynomial coefficients. Tensor legs are normal-ordered
 * independently and never commute across the tensor sign.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "hopfchain/qcalc.hpp"

namespace hopfchain::hopf {

using qcalc::LaurentPoly;

struct Monomial {
  std::int64_t e_pow = 0;  // power of E, the grading; never negative
  std::int64_t k_pow = 0;  // power of K; negative means K^-1

  friend auto operator<=>(const Monomial&, const Monomial&) = default;
};

/// "E^i K^l"
std::string to_string(const Monomial& m);

/// Accepts "E^i K^l" and the shorthands "E", "K", "E^2", "E K^-1", "1".
/// Throws ParseError with the offending position.
Monomial parse_monomial(std::string_view text);

class AlgebraElement {
 public:
  using Terms = std::map<Monomial, LaurentPoly>;

  AlgebraElement() = default;
  explicit AlgebraElement(const Monomial& m, const LaurentPoly& c = 1) { add(m, c); }

  static AlgebraElement one() { return AlgebraElement(Monomial{}); }

  void add(const Monomial& m, const LaurentPoly& c);
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  LaurentPoly coefficient(const Monomial& m) const;

  /// Grading i when every monomial has e_pow = i.
  std::optional<std::int64_t> homogeneous_grading() const;

  AlgebraElement& operator+=(const AlgebraElement& other);
  AlgebraElement& operator-=(const AlgebraElement& other);
  AlgebraElement scaled(const LaurentPoly& c) const;

  friend bool operator==(const AlgebraElement&, const AlgebraElement&) = default;

 private:
  Terms terms_;
};

std::string to_string(const AlgebraElement& x);

class TensorElement {
 public:
  using Key = std::pair<Monomial, Monomial>;
  using Terms = std::map<Key, LaurentPoly>;

  void add(const Monomial& left, const Monomial& right, const LaurentPoly& c);
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }

  TensorElement& operator+=(const TensorElement& other);

  friend bool operator==(const TensorElement&, const TensorElement&) = default;

 private:
  Terms terms_;
};

std::string to_string(const TensorElement& t);

/// Three-fold tensors, used by the coassociativity check.
class Tensor3Element {
 public:
  using Key = std::tuple<Monomial, Monomial, Monomial>;
  using Terms = std::map<Key, LaurentPoly>;

  void add(const Key& key, const LaurentPoly& c);
  const Terms& terms() const noexcept { return terms_; }

  friend bool operator==(const Tensor3Element&, const Tensor3Element&) = default;

 private:
  Terms terms_;
};

enum class Generator { E, K, KInv };

/// Rewrites scalar * w_1 w_2 ... w_n into the form c * E^i K^l using
/// KE = q^2 EK and K K^-1 = K^-1 K = 1.
AlgebraElement normal_order(const std::vector<Generator>& word, const LaurentPoly& scalar = 1);

/// The word E^i K^l (K^-1 repeated when l < 0).
std::vector<Generator> to_word(const Monomial& m);

AlgebraElement multiply(const AlgebraElement& x, const AlgebraElement& y);
AlgebraElement multiply(const Monomial& x, const Monomial& y);

/// Legwise product (a (x) b)(c (x) d) = ac (x) bd.
TensorElement multiply(const TensorElement& x, const TensorElement& y);

/// Delta(E^i K^l) = sum_r q^{r(i-r)} [i choose r] E^{i-r} K^l (x) E^r K^{l+i-r}.
TensorElement coproduct(const Monomial& m);
TensorElement coproduct(const AlgebraElement& x);

LaurentPoly counit(const Monomial& m);
LaurentPoly counit(const AlgebraElement& x);

/// S(E^i K^l) = S(K)^l S(E)^i with S(E) = -E K^-1 and S(K) = K^-1.
AlgebraElement antipode(const Monomial& m);
AlgebraElement antipode(const AlgebraElement& x);

/// mu(x_(1) (x) x_(2)), contracting the Sweedler sum.
AlgebraElement contract(const TensorElement& t);

/// Psi^2 = mu o Delta, evaluated by contracting the coproduct.
AlgebraElement hopf_square(const Monomial& m);

/// Transcription of the closed formula
/// sum_r q^{r(i-r+2l)} [i choose r] E^i K^{2l+i-r}; used as a cross-check only.
AlgebraElement hopf_square_closed_form(const Monomial& m);

struct AxiomResult {
  std::string axiom;
  bool passed = true;
  std::size_t cases_checked = 0;
  std::string counterexample;  // empty when passed
};

struct AxiomReport {
  std::int64_t max_i = 0;
  std::int64_t max_abs_l = 0;
  std::vector<AxiomResult> results;

  bool all_passed() const;
};

/// Symbolic check of coassociativity, the counit laws, multiplicativity of
/// Delta and of the counit, and both antipode laws over every monomial with
/// e_pow <= max_i and |k_pow| <= max_abs_l. Products are checked on all pairs
/// from that box.
AxiomReport verify_axioms(std::int64_t max_i, std::int64_t max_abs_l);

}  // namespace hopfchain::hopf
