#pragma once

/**
 * @file markov.hpp
 * @brief Exact analysis of growth chains that stay with probability alpha(x)
 * and step up by one otherwise, started from X_0 = 0.
 *
 * The grading-1 chain of the Hopf square is the geometric law
 * alpha(x) = q^x / (1 + q^x). Everything here is exact rational arithmetic;
 * where exact rationals become too large (long horizons with q != 1) the
 * DistributionEnclosure gives rigorous lower/upper bounds as dyadic rationals.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "hopfchain/qcalc.hpp"

namespace hopfchain::markov {

using qcalc::BigInt;
using qcalc::Rational;
using State = std::int64_t;

class AlphaLaw {
 public:
  enum class Kind { Geometric, Constant, Table };

  /// alpha(x) = q0^x / (1 + q0^x); requires q0 > 0.
  static AlphaLaw geometric(const Rational& q0);
  /// alpha(x) = c for every x; requires 0 <= c < 1.
  static AlphaLaw constant(const Rational& c);
  /// alpha(x) = values[x]; querying past the end throws OutOfRange.
  static AlphaLaw table(std::vector<Rational> values);

  /// Failure (stay) probability at x. Throws std::domain_error when the value
  /// is not in [0, 1).
  Rational alpha(State x) const;
  Rational success(State x) const { return 1 - alpha(x); }

  Kind kind() const noexcept { return kind_; }
  /// q0 for Geometric, c for Constant, unused for Table.
  const Rational& parameter() const noexcept { return parameter_; }
  const std::vector<Rational>& values() const noexcept { return values_; }

  /// Largest state that can be queried, or -1 when unbounded.
  State domain_limit() const noexcept;

  /// "geometric(2)", "constant(1/2)", "table[1/3,1/2]".
  std::string descriptor() const;

 private:
  AlphaLaw(Kind kind, Rational parameter, std::vector<Rational> values)
      : kind_(kind), parameter_(std::move(parameter)), values_(std::move(values)) {}

  Kind kind_;
  Rational parameter_;
  std::vector<Rational> values_;
};

AlphaLaw alpha_geometric(const Rational& q0);

/// Exact law of X_n: mass[k] = P(X_n = k) for k = 0..n.
struct Distribution {
  State time = 0;
  std::vector<Rational> mass;

  Rational at(State k) const;
  Rational total() const;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

/// Forward recursion P_t(k) = alpha(k) P_{t-1}(k) + (1 - alpha(k-1)) P_{t-1}(k-1).
/// Uses integer arithmetic over a common denominator when the alphas share a
/// small one (e.g. q = 1), rationals otherwise.
Distribution distribution_dp(const AlphaLaw& alpha, State n);

/// Laws of X_0, ..., X_n from a single forward pass.
std::vector<Distribution> distribution_dp_history(const AlphaLaw& alpha, State n);

/// (1 / (-1;q)_k) * sum over compositions y_0 + ... + y_k = n - k of
/// prod_i (q^i / (q^i + 1))^{y_i}. Throws OutOfSupport when k > n.
Rational distribution_formula(const Rational& q0, State n, State k);

/// prod_{i<k} (1 - alpha(i)) * sum over compositions of prod_i alpha(i)^{y_i}.
/// Throws OutOfSupport when k > n.
Rational distribution_formula_general(const AlphaLaw& alpha, State n, State k);

Rational expected_value(const Distribution& d);

/// E[f(X_n)] for the given law. f should return Rational, not a gmpxx
/// expression that refers to its own locals.
template <typename F>
Rational expectation(const Distribution& d, F&& f) {
  Rational sum = 0;
  for (std::size_t k = 0; k < d.mass.size(); ++k) {
    if (d.mass[k] == 0) continue;
    const Rational value = f(static_cast<State>(k));
    sum += d.mass[k] * value;
  }
  return sum;
}

/// N + (q^N - 1)/(q - 1), via the sum of (1 + q^i) when q0 = 1.
Rational hitting_time_closed(const Rational& q0, State target);

/// sum_{i<N} 1 / (1 - alpha(i)).
Rational hitting_time_general(const AlphaLaw& alpha, State target);

using RationalMatrix = std::vector<std::vector<Rational>>;

/// Transition matrix on {0, ..., N} with N made absorbing.
RationalMatrix absorbing_transition_matrix(const AlphaLaw& alpha, State target);

/// W = (I - Q)^{-1} for the transient block Q, by back-substitution.
RationalMatrix fundamental_matrix(const AlphaLaw& alpha, State target);

/// t_0 where (I - Q) t = 1, solved by back-substitution on the absorbing chain.
Rational hitting_time_matrix(const AlphaLaw& alpha, State target);

/**
 * Rigorous bounds on the law of X_n in fixed point with 63 fractional bits.
 * Every product is rounded down for the lower bound and up for the upper
 * bound, so lower[k] <= P(X_n = k) <= upper[k] holds exactly.
 */
struct DistributionEnclosure {
  static constexpr int kFractionBits = 63;

  State time = 0;
  std::vector<std::uint64_t> lower;
  std::vector<std::uint64_t> upper;

  Rational mass_lower(State k) const;
  Rational mass_upper(State k) const;
  Rational expected_lower() const;
  Rational expected_upper() const;
  /// Bounds on P(X_n <= k).
  Rational cdf_lower(State k) const;
  Rational cdf_upper(State k) const;
};

DistributionEnclosure distribution_enclosure(const AlphaLaw& alpha, State n);

/// E[X_n] / n, exact when cheap and enclosed otherwise.
struct RatioBounds {
  Rational lower;
  Rational upper;
  bool exact = false;
};

/// Exact when alpha has a small common denominator or n <= exact_cutoff.
RatioBounds expected_ratio(const AlphaLaw& alpha, State n, State exact_cutoff = 64);

struct PhaseCell {
  Rational q;
  State n = 0;
  RatioBounds ratio;
};

/// E[X_n]/n for the geometric chain over the grid, ordered by (q, n).
std::vector<PhaseCell> phase_scan(const std::vector<Rational>& q_list, const std::vector<State>& n_list,
                                  std::size_t workers = 1);

}  // namespace hopfchain::markov
