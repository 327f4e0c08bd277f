#pragma once

/**
 * @file martingale.hpp
 * @brief The martingale Y_n = X_n - n + h(X_n), where the compensator
 * h(x) = sum_{i<x} alpha(i) / (1 - alpha(i)). For the geometric law
 * h(x) = (1 - q^x)/(1 - q), and h(x) = x at q = 1.
 */

#include <cstdint>
#include <functional>
#include <vector>

#include "hopfchain/markov.hpp"

namespace hopfchain::martingale {

using markov::AlphaLaw;
using markov::State;
using qcalc::Rational;

class Compensator {
 public:
  explicit Compensator(AlphaLaw alpha) : alpha_(std::move(alpha)) {}

  const AlphaLaw& alpha() const noexcept { return alpha_; }

  /// h(x); closed forms for the geometric and constant laws, a direct sum
  /// for tables.
  Rational htilde(State x) const;

 private:
  AlphaLaw alpha_;
};

/// X - n + (1 - q^x)/(1 - q), with the summation form at q0 = 1.
Rational y_value(const Rational& q0, State x, State n);

Rational y_alpha_value(const AlphaLaw& alpha, State x, State n);

struct StepResidual {
  State state = 0;
  Rational residual;

  friend bool operator==(const StepResidual&, const StepResidual&) = default;
};

struct MartingaleReport {
  std::string alpha;  // AlphaLaw descriptor
  State time = 0;
  State max_state = 0;
  Rational max_residual;            // largest |residual|; zero for a martingale
  std::vector<StepResidual> steps;  // one per state 0..max_state

  bool verified() const { return max_residual == 0; }
  /// First state with a nonzero residual, or -1.
  State first_failure() const;

  friend bool operator==(const MartingaleReport&, const MartingaleReport&) = default;
};

/// Residuals alpha(x) Y(x, n) + (1 - alpha(x)) Y(x+1, n) - Y(x, n-1) for every
/// x <= max_state, with Y built from `compensator`. Requires n >= 1.
MartingaleReport verify_one_step(const AlphaLaw& alpha, State max_state, State n,
                                 const std::function<Rational(State)>& compensator);

/// Same, with the true compensator h.
MartingaleReport verify_one_step(const AlphaLaw& alpha, State max_state, State n);

/// Largest x with h(x) <= v. Searches by doubling then bisection. Throws
/// NotInvertible when some alpha(i) = 0 on the searched range.
State htilde_inverse(const Compensator& c, const Rational& v);

/// E[q^{X_{i-1}}] for i = 1..n; the partial sums are Var(Y_n).
std::vector<Rational> variance_ledger(const Rational& q0, State n);

/// E[Y_n^2] computed directly from the law of X_n.
Rational second_moment(const Rational& q0, State n);

struct IncrementBound {
  Rational max_abs_increment;
  State argmax_state = 0;
  bool argmax_is_success = false;
  bool within_bound = false;  // max <= 2
};

/// max over x <= max_state of |Y_n - Y_{n-1}| on both branches (failure gives
/// exactly -1, success gives q^x). Requires 0 < q0 < 1.
IncrementBound increment_bound_check(const Rational& q0, State max_state);

/**
 * Exact certificate that E[Y_n] = 0 for every n <= max_n under the geometric
 * law. The forward recursion is run modulo many 62-bit primes; the numerator
 * of E[Y_n] over the denominator b^n prod_{i<n} (a^i + b^i)^{n-i} (q = a/b) is
 * bounded by height_bits, and a nonzero numerator cannot vanish modulo primes
 * whose product exceeds that bound.
 */
struct MeanZeroCertificate {
  Rational q;
  State max_n = 0;
  std::size_t height_bits = 0;
  std::size_t primes_used = 0;
  std::size_t prime_bits = 0;          // sum of floor(log2 p) over primes used
  std::vector<bool> zero;              // zero[n]: E[Y_n] vanished modulo every prime
  std::vector<bool> certified;         // certified[n]: zero[n] and prime_bits > height_bits

  bool all_certified() const;
};

MeanZeroCertificate certify_mean_zero(const Rational& q0, State max_n, std::size_t workers = 1);

/// Same modular machinery for an arbitrary compensator, used to show a wrong
/// compensator is caught: reports whether E[Y_n] vanished mod every prime.
std::vector<bool> mean_zero_modular(const Rational& q0, State max_n,
                                    const std::function<Rational(State)>& compensator, std::size_t prime_count);

}  // namespace hopfchain::martingale
