#include "hopfchain/chain_extract.hpp"

#include <stdexcept>
#include <string>

#include "hopfchain/error.hpp"

namespace hopfchain::chain {

JumpLaw phi_coefficients(std::int64_t grading, std::int64_t state) {
  if (grading < 0 || state < 0) throw std::invalid_argument("phi_coefficients requires grading >= 0 and state >= 0");
  JumpLaw law{grading, state, {}};
  for (std::int64_t jump = 0; jump <= grading; ++jump) {
    const std::int64_t r = grading - jump;
    law.entries.push_back({jump, qcalc::q_binomial(grading, r).shifted(r * (grading - r + state))});
  }
  return law;
}

std::int64_t doubling_map(std::int64_t state) {
  if (state < 0) throw std::invalid_argument("doubling_map requires state >= 0");
  return 2 * state;
}

ChainRow chain_row(std::int64_t grading, const Rational& q0, std::int64_t state) {
  if (q0 <= 0) throw std::invalid_argument("q must be a positive rational, got " + qcalc::to_string(q0));
  const JumpLaw law = phi_coefficients(grading, state);
  std::vector<Rational> weights;
  Rational total = 0;
  for (const JumpEntry& entry : law.entries) {
    Rational w = qcalc::lp_eval(entry.coefficient, q0);
    if (w <= 0) {
      throw NonPositiveCoefficient("coefficient of jump " + std::to_string(entry.jump) + " from state " +
                                   std::to_string(state) + " evaluates to " + qcalc::to_string(w));
    }
    total += w;
    weights.push_back(std::move(w));
  }
  ChainRow row{state, {}};
  for (std::size_t j = 0; j < weights.size(); ++j) {
    row.moves.push_back({state + law.entries[j].jump, weights[j] / total});
  }
  return row;
}

ChainSpec build_chain_spec(std::int64_t grading, const Rational& q0, std::int64_t max_state) {
  if (grading < 1) throw std::invalid_argument("build_chain_spec requires grading >= 1");
  if (max_state < 0) throw std::invalid_argument("build_chain_spec requires max_state >= 0");
  ChainSpec spec{grading, q0, {}};
  spec.rows.reserve(static_cast<std::size_t>(max_state) + 1);
  for (std::int64_t m = 0; m <= max_state; ++m) spec.rows.push_back(chain_row(grading, q0, m));
  return spec;
}

std::vector<Move> full_step_row(std::int64_t grading, const Rational& q0, std::int64_t state) {
  const std::int64_t doubled = doubling_map(state);
  if (grading == 0) return {Move{doubled, 1}};
  return chain_row(grading, q0, doubled).moves;
}

hopf::AlgebraElement recombine_with_doubling(std::int64_t grading, std::int64_t state) {
  const JumpLaw law = phi_coefficients(grading, doubling_map(state));
  hopf::AlgebraElement out;
  for (const JumpEntry& entry : law.entries) {
    out.add(hopf::Monomial{grading, law.state + entry.jump}, entry.coefficient);
  }
  return out;
}

}  // namespace hopfchain::chain
