#include <doctest.h>

#include <random>

#include "hopfchain/error.hpp"
#include "hopfchain/hopf.hpp"

using namespace hopfchain;
using namespace hopfchain::hopf;
using qcalc::LaurentPoly;
using qcalc::q_binomial;

namespace {

LaurentPoly qp(std::int64_t e) { return LaurentPoly::monomial(e); }

AlgebraElement el(std::int64_t i, std::int64_t l, const LaurentPoly& c = 1) { return AlgebraElement({i, l}, c); }

// Delta(E)^i Delta(K)^l as a product in the tensor algebra; independent of
// the closed coproduct formula.
TensorElement coproduct_by_generators(const Monomial& m) {
  TensorElement out;
  out.add({0, 0}, {0, 0}, 1);
  TensorElement de;
  de.add({0, 0}, {1, 0}, 1);
  de.add({1, 0}, {0, 1}, 1);
  TensorElement dk, dki;
  dk.add({0, 1}, {0, 1}, 1);
  dki.add({0, -1}, {0, -1}, 1);
  for (std::int64_t a = 0; a < m.e_pow; ++a) out = multiply(out, de);
  for (std::int64_t b = 0; b < (m.k_pow < 0 ? -m.k_pow : m.k_pow); ++b) out = multiply(out, m.k_pow < 0 ? dki : dk);
  return out;
}

}  // namespace

TEST_CASE("monomial strings") {
  CHECK(parse_monomial("E^2 K^-1") == Monomial{2, -1});
  CHECK(parse_monomial("E") == Monomial{1, 0});
  CHECK(parse_monomial("K^-1") == Monomial{0, -1});
  CHECK(parse_monomial("1") == Monomial{0, 0});
  CHECK(parse_monomial("  E^3K^4 ") == Monomial{3, 4});
  CHECK(to_string(Monomial{2, -3}) == "E^2 K^-3");
  for (std::int64_t i = 0; i <= 4; ++i)
    for (std::int64_t l = -4; l <= 4; ++l) CHECK(parse_monomial(to_string(Monomial{i, l})) == Monomial{i, l});
  CHECK_THROWS_AS(parse_monomial("E^-1"), ParseError);
  CHECK_THROWS_AS(parse_monomial("F"), ParseError);
  CHECK_THROWS_AS(parse_monomial("K E"), ParseError);
  CHECK_THROWS_AS(parse_monomial(""), ParseError);
  try {
    parse_monomial("E^2 X");
    FAIL("no throw");
  } catch (const ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("normal ordering") {
  using G = Generator;
  CHECK(normal_order({G::K, G::E}) == el(1, 1, qp(2)));
  CHECK(normal_order({G::K, G::KInv}) == AlgebraElement::one());
  CHECK(normal_order({G::KInv, G::K}) == AlgebraElement::one());
  CHECK(normal_order({G::K, G::K, G::E, G::E}) == el(2, 2, qp(8)));
  CHECK(normal_order({G::KInv, G::E}) == el(1, -1, qp(-2)));
  CHECK(normal_order({}, 3) == el(0, 0, 3));
  CHECK(normal_order(to_word({3, -2})) == el(3, -2));
}

TEST_CASE("multiplication") {
  for (std::int64_t l = -3; l <= 3; ++l)
    for (std::int64_t m = -3; m <= 3; ++m) CHECK(multiply(Monomial{1, l}, Monomial{1, m}) == el(2, l + m, qp(2 * l)));
  const AlgebraElement x = el(2, 1, qp(3) + 1) += el(0, -2, 5);
  CHECK(multiply(AlgebraElement::one(), x) == x);
  CHECK(multiply(x, AlgebraElement::one()) == x);
  CHECK(multiply(Monomial{1, 0}, Monomial{0, 1}) == el(1, 1));
}

TEST_CASE("coproduct examples") {
  TensorElement de;
  de.add({0, 0}, {1, 0}, 1);
  de.add({1, 0}, {0, 1}, 1);
  CHECK(coproduct(Monomial{1, 0}) == de);
  for (std::int64_t l = -3; l <= 3; ++l) {
    TensorElement kk;
    kk.add({0, l}, {0, l}, 1);
    CHECK(coproduct(Monomial{0, l}) == kk);
  }
  TensorElement dek;
  dek.add({1, 1}, {0, 2}, 1);
  dek.add({0, 1}, {1, 1}, 1);
  CHECK(coproduct(Monomial{1, 1}) == dek);
}

TEST_CASE("coproduct formula agrees with products of generator coproducts") {
  for (std::int64_t i = 0; i <= 5; ++i) {
    for (std::int64_t l = -3; l <= 3; ++l) {
      const Monomial m{i, l};
      const TensorElement d = coproduct(m);
      CHECK(d.terms().size() == static_cast<std::size_t>(i + 1));
      CHECK(d == coproduct_by_generators(m));
      for (const auto& [key, c] : d.terms()) CHECK(qcalc::has_nonnegative_integer_coefficients(c));
    }
  }
}

TEST_CASE("counit") {
  CHECK(counit(Monomial{0, 5}) == 1);
  CHECK(counit(Monomial{0, -2}) == 1);
  CHECK(counit(Monomial{1, 0}).is_zero());
  CHECK(counit(Monomial{2, 3}).is_zero());
  CHECK(counit(el(0, 1, qp(2)) += el(3, 0, 7)) == qp(2));
}

TEST_CASE("antipode examples") {
  CHECK(antipode(Monomial{1, 0}) == el(1, -1, -1));
  for (std::int64_t l = -3; l <= 3; ++l) CHECK(antipode(Monomial{0, l}) == el(0, -l));
  CHECK(antipode(Monomial{2, 0}) == el(2, -2, qp(-2)));
  for (std::int64_t i = 0; i <= 4; ++i) {
    for (std::int64_t l = -2; l <= 2; ++l) {
      const AlgebraElement s = antipode(Monomial{i, l});
      REQUIRE(s.terms().size() == 1);
      const auto& [m, c] = *s.terms().begin();
      CHECK(m == Monomial{i, -l - i});
      REQUIRE(c.terms().size() == 1);
      CHECK(c.terms().begin()->second == (i % 2 == 0 ? 1 : -1));
    }
  }
}

TEST_CASE("antipode is an anti-homomorphism") {
  for (std::int64_t i = 0; i <= 2; ++i)
    for (std::int64_t l = -2; l <= 2; ++l)
      for (std::int64_t j = 0; j <= 2; ++j)
        for (std::int64_t m = -2; m <= 2; ++m) {
          const Monomial x{i, l}, y{j, m};
          CHECK(antipode(multiply(x, y)) == multiply(antipode(y), antipode(x)));
        }
}

TEST_CASE("Hopf square examples") {
  for (std::int64_t l = -4; l <= 4; ++l) CHECK(hopf_square(Monomial{0, l}) == el(0, 2 * l));
  AlgebraElement e_sq = el(1, 1);
  e_sq += el(1, 0);
  CHECK(hopf_square(Monomial{1, 0}) == e_sq);
  AlgebraElement e2 = el(2, 2);
  e2 += el(2, 1, qp(2) + 1);
  e2 += el(2, 0);
  CHECK(hopf_square(Monomial{2, 0}) == e2);
  CHECK(to_string(hopf_square(Monomial{1, 0})) == "EK + E");
}

TEST_CASE("Hopf square equals the closed form and keeps the grading") {
  for (std::int64_t i = 0; i <= 5; ++i) {
    for (std::int64_t l = -4; l <= 4; ++l) {
      const Monomial m{i, l};
      const AlgebraElement sq = hopf_square(m);
      CHECK(sq == hopf_square_closed_form(m));
      CHECK(sq.homogeneous_grading() == i);
      CHECK(sq.terms().size() == static_cast<std::size_t>(i + 1));
      for (std::int64_t r = 0; r <= i; ++r) {
        // coefficient of E^i K^{2l+i-r} is q^{r(i-r+2l)} [i r]
        CHECK(sq.coefficient({i, 2 * l + i - r}) == q_binomial(i, r) * qp(r * (i - r + 2 * l)));
      }
      for (const auto& [mono, c] : sq.terms()) CHECK(qcalc::has_nonnegative_integer_coefficients(c));
    }
  }
}

TEST_CASE("axiom verification") {
  CHECK(verify_axioms(0, 3).all_passed());
  CHECK(verify_axioms(1, 2).all_passed());
  const AxiomReport r = verify_axioms(2, 1);
  CHECK(r.all_passed());
  bool saw_coassoc = false, saw_antipode = false;
  for (const auto& a : r.results) {
    CHECK(a.cases_checked > 0);
    CHECK(a.counterexample.empty());
    saw_coassoc |= a.axiom.find("coassociativity") != std::string::npos;
    saw_antipode |= a.axiom.find("antipode") != std::string::npos;
  }
  CHECK(saw_coassoc);
  CHECK(saw_antipode);
}

TEST_CASE("property: random products respect Delta, eps and associativity") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::int64_t> is(0, 3), ls(-3, 3), cs(-3, 3);
  const auto random_element = [&] {
    AlgebraElement x;
    for (int t = 0; t < 3; ++t) {
      const Monomial m{is(rng), ls(rng)};
      x.add(m, qp(cs(rng)) * static_cast<int>(cs(rng) + 4));
    }
    return x;
  };
  for (int trial = 0; trial < 40; ++trial) {
    const AlgebraElement x = random_element(), y = random_element(), z = random_element();
    CHECK(coproduct(multiply(x, y)) == multiply(coproduct(x), coproduct(y)));
    CHECK(counit(multiply(x, y)) == counit(x) * counit(y));
    CHECK(multiply(multiply(x, y), z) == multiply(x, multiply(y, z)));
    CHECK(antipode(multiply(x, y)) == multiply(antipode(y), antipode(x)));
  }
}
