#pragma once

/**
 * @file chain_extract.hpp
 * @brief Markov chains read off the Hopf square, one per grading.
 *
 * Psi^2 on grading i factors as a deterministic doubling E^i K^l -> E^i K^{2l}
 * followed by Phi_i, whose coefficients are
 *   jump s = i - r :  q^{r(i-r+m)} [i choose r]   (from state m).
 * Normalising a row by its coefficient sum gives transition probabilities.
 */

#include <cstdint>
#include <vector>

#include "hopfchain/hopf.hpp"
#include "hopfchain/qcalc.hpp"

namespace hopfchain::chain {

using qcalc::LaurentPoly;
using qcalc::Rational;

struct JumpEntry {
  std::int64_t jump = 0;  // 0..grading
  LaurentPoly coefficient;
};

struct JumpLaw {
  std::int64_t grading = 0;
  std::int64_t state = 0;
  std::vector<JumpEntry> entries;  // ordered by increasing jump
};

struct Move {
  std::int64_t target = 0;
  Rational probability;

  friend bool operator==(const Move&, const Move&) = default;
};

struct ChainRow {
  std::int64_t state = 0;
  std::vector<Move> moves;  // ordered by increasing target

  friend bool operator==(const ChainRow&, const ChainRow&) = default;
};

struct ChainSpec {
  std::int64_t grading = 0;
  Rational q;
  std::vector<ChainRow> rows;  // rows[m].state == m

  friend bool operator==(const ChainSpec&, const ChainSpec&) = default;
};

/// Phi_i applied to E^i K^m, as coefficients per jump size.
JumpLaw phi_coefficients(std::int64_t grading, std::int64_t state);

/// The deterministic part l -> 2l.
std::int64_t doubling_map(std::int64_t state);

/// One normalised row of the grading-i chain at q = q0. Throws
/// NonPositiveCoefficient when an evaluated coefficient is <= 0.
ChainRow chain_row(std::int64_t grading, const Rational& q0, std::int64_t state);

/// Rows 0..max_state. Requires grading >= 1 and q0 > 0.
ChainSpec build_chain_spec(std::int64_t grading, const Rational& q0, std::int64_t max_state);

/// The un-split Psi^2 step from l: doubling followed by the Phi_i row at 2l.
std::vector<Move> full_step_row(std::int64_t grading, const Rational& q0, std::int64_t state);

/// Rebuilds Psi^2(E^i K^l) from Phi_i at state 2l; must equal hopf::hopf_square.
hopf::AlgebraElement recombine_with_doubling(std::int64_t grading, std::int64_t state);

}  // namespace hopfchain::chain
