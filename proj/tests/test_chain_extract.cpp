#include <doctest.h>

#include "hopfchain/chain_extract.hpp"
#include "hopfchain/error.hpp"
#include "oracles.hpp"

using namespace hopfchain;
using namespace hopfchain::chain;
using qcalc::LaurentPoly;
using qcalc::Rational;

namespace {

const std::vector<Rational> kGrid{Rational(1, 3), Rational(1, 2), Rational(1), Rational(2), Rational(3)};

LaurentPoly qp(std::int64_t e) { return LaurentPoly::monomial(e); }

Rational prob(const ChainRow& row, std::int64_t target) {
  for (const auto& mv : row.moves)
    if (mv.target == target) return mv.probability;
  return 0;
}

}  // namespace

TEST_CASE("phi coefficients") {
  for (std::int64_t l = 0; l <= 6; ++l) {
    const JumpLaw one = phi_coefficients(1, l);
    REQUIRE(one.entries.size() == 2);
    CHECK(one.entries[0].jump == 0);
    CHECK(one.entries[0].coefficient == qp(l));
    CHECK(one.entries[1].jump == 1);
    CHECK(one.entries[1].coefficient == 1);

    const JumpLaw two = phi_coefficients(2, l);
    REQUIRE(two.entries.size() == 3);
    CHECK(two.entries[2].coefficient == 1);
    CHECK(two.entries[1].coefficient == qp(1 + l) * (qp(1) + qp(-1)));
    CHECK(two.entries[0].coefficient == qp(2 * l));
  }
  const JumpLaw zero = phi_coefficients(0, 9);
  REQUIRE(zero.entries.size() == 1);
  CHECK(zero.entries[0].jump == 0);
  CHECK(zero.entries[0].coefficient == 1);
}

TEST_CASE("doubling map") {
  CHECK(doubling_map(0) == 0);
  CHECK(doubling_map(3) == 6);
  CHECK(doubling_map(10) == 20);
}

TEST_CASE("chain rows for small q") {
  const ChainRow r0 = chain_row(1, 2, 0);
  CHECK(prob(r0, 1) == Rational(1, 2));
  CHECK(prob(r0, 0) == Rational(1, 2));
  const ChainRow r2 = chain_row(1, 2, 2);
  CHECK(prob(r2, 3) == Rational(1, 5));
  CHECK(prob(r2, 2) == Rational(4, 5));
  const ChainRow two = chain_row(2, 1, 0);
  CHECK(prob(two, 2) == Rational(1, 4));
  CHECK(prob(two, 1) == Rational(1, 2));
  CHECK(prob(two, 0) == Rational(1, 4));

  const ChainSpec spec = build_chain_spec(1, 2, 3);
  REQUIRE(spec.rows.size() == 4);
  const Rational expected_step[] = {Rational(1, 2), Rational(1, 3), Rational(1, 5), Rational(1, 9)};
  for (int m = 0; m < 4; ++m) {
    CHECK(spec.rows[m].state == m);
    CHECK(prob(spec.rows[m], m + 1) == expected_step[m]);
  }
}

TEST_CASE("chain existence gate on the q grid") {
  for (std::int64_t i = 1; i <= 5; ++i) {
    for (const Rational& q0 : kGrid) {
      const ChainSpec spec = build_chain_spec(i, q0, 20);
      for (const ChainRow& row : spec.rows) {
        REQUIRE(row.moves.size() == static_cast<std::size_t>(i + 1));
        Rational sum = 0;
        for (std::size_t j = 0; j < row.moves.size(); ++j) {
          CHECK(row.moves[j].target == row.state + static_cast<std::int64_t>(j));
          CHECK(row.moves[j].probability > 0);
          CHECK(row.moves[j].probability <= 1);
          sum += row.moves[j].probability;
        }
        CHECK(sum == 1);
      }
    }
  }
}

TEST_CASE("grading one matches the closed forms") {
  for (const Rational& q0 : kGrid) {
    for (std::int64_t m = 0; m <= 20; ++m) {
      const ChainRow row = chain_row(1, q0, m);
      const Rational qm = oracle::rpow(q0, m);
      CHECK(prob(row, m + 1) == 1 / (qm + 1));
      CHECK(prob(row, m) == qm / (qm + 1));
    }
  }
}

TEST_CASE("rows are the normalised evaluated coefficients") {
  for (std::int64_t i = 1; i <= 4; ++i) {
    for (std::int64_t m = 0; m <= 5; ++m) {
      const Rational q0(3, 2);
      // coefficient for jump i - r is q^{r(i-r+m)} [i r], evaluated directly
      std::vector<Rational> w(i + 1);
      Rational total = 0;
      for (std::int64_t r = 0; r <= i; ++r) {
        w[i - r] = oracle::rpow(q0, r * (i - r + m)) * oracle::poly_eval(oracle::q_binomial_pascal(i, r), q0);
        total += w[i - r];
      }
      const ChainRow row = chain_row(i, q0, m);
      for (std::int64_t s = 0; s <= i; ++s) CHECK(prob(row, m + s) == w[s] / total);
    }
  }
}

TEST_CASE("full step rows compose doubling and Phi") {
  const auto a = full_step_row(1, 2, 1);
  REQUIRE(a.size() == 2);
  CHECK(a[0].target == 2);
  CHECK(a[0].probability == Rational(4, 5));
  CHECK(a[1].target == 3);
  CHECK(a[1].probability == Rational(1, 5));
  const auto b = full_step_row(1, 1, 0);
  REQUIRE(b.size() == 2);
  CHECK(b[0].probability == Rational(1, 2));
  CHECK(b[1].probability == Rational(1, 2));
  const auto c = full_step_row(0, Rational(7, 3), 4);
  REQUIRE(c.size() == 1);
  CHECK(c[0].target == 8);
  CHECK(c[0].probability == 1);
  for (std::int64_t l = 0; l <= 4; ++l) {
    const auto row = full_step_row(3, Rational(1, 3), l);
    const ChainRow base = chain_row(3, Rational(1, 3), 2 * l);
    REQUIRE(row.size() == base.moves.size());
    for (std::size_t j = 0; j < row.size(); ++j) CHECK(row[j] == base.moves[j]);
  }
}

TEST_CASE("Phi recombined with doubling reproduces the Hopf square") {
  for (std::int64_t i = 0; i <= 5; ++i)
    for (std::int64_t l = 0; l <= 6; ++l) CHECK(recombine_with_doubling(i, l) == hopf::hopf_square({i, l}));
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(build_chain_spec(0, 2, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_chain_spec(1, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_chain_spec(1, -2, 3), std::invalid_argument);
  CHECK_THROWS_AS(chain_row(2, Rational(-1, 2), 0), std::invalid_argument);
}
