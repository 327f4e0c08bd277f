#include <doctest.h>

#include "hopfchain/error.hpp"
#include "hopfchain/martingale.hpp"
#include "oracles.hpp"

using namespace hopfchain;
using namespace hopfchain::martingale;
using markov::alpha_geometric;

namespace {

const std::vector<Rational> kGrid{Rational(1, 3), Rational(1, 2), Rational(1), Rational(2), Rational(3)};

// h(x) as the literal sum of alpha/(1-alpha).
Rational htilde_sum(const AlphaLaw& a, State x) {
  Rational s = 0;
  for (State i = 0; i < x; ++i) s += a.alpha(i) / (1 - a.alpha(i));
  return s;
}

std::vector<AlphaLaw> hand_tables() {
  std::vector<Rational> a, b, c;
  for (int i = 0; i <= 101; ++i) {
    a.push_back(oracle::frac(i % 7, 8));             // periodic, with zeros
    b.push_back(oracle::frac(1, i + 2));             // decreasing
    c.push_back(oracle::frac(i % 2 == 0 ? 9 : 1, 10));  // alternating
  }
  return {AlphaLaw::table(a), AlphaLaw::table(b), AlphaLaw::table(c)};
}

}  // namespace

TEST_CASE("Y values") {
  for (const Rational& q : kGrid) CHECK(y_value(q, 0, 0) == 0);
  CHECK(y_value(2, 3, 5) == 5);
  CHECK(y_value(1, 4, 6) == 2);
  const AlphaLaw t = AlphaLaw::table({Rational(1, 3), Rational(1, 2)});
  CHECK(y_alpha_value(t, 0, 0) == 0);
  CHECK(y_alpha_value(t, 2, 3) == Rational(1, 2));
  for (const Rational& q : kGrid)
    for (State x = 0; x <= 10; ++x) CHECK(y_alpha_value(alpha_geometric(q), x, 7) == y_value(q, x, 7));
}

TEST_CASE("compensator closed form") {
  for (const Rational& q : kGrid) {
    const Compensator c(alpha_geometric(q));
    for (State x = 0; x <= 30; ++x) {
      const Rational expected = q == 1 ? Rational(x) : (1 - oracle::rpow(q, x)) / (1 - q);
      CHECK(c.htilde(x) == expected);
      CHECK(c.htilde(x) == htilde_sum(c.alpha(), x));
    }
  }
  const Compensator k(AlphaLaw::constant(Rational(1, 3)));
  CHECK(k.htilde(4) == 2);
}

TEST_CASE("one-step identity holds exactly") {
  for (const Rational& q : kGrid) {
    for (State n : {1, 2, 50}) {
      const MartingaleReport r = verify_one_step(alpha_geometric(q), 100, n);
      CHECK(r.verified());
      CHECK(r.first_failure() == -1);
      CHECK(r.steps.size() == 101);
    }
  }
  for (const AlphaLaw& t : hand_tables()) CHECK(verify_one_step(t, 100, 3).verified());
}

TEST_CASE("a perturbed compensator is caught") {
  const AlphaLaw a = alpha_geometric(2);
  const Compensator c(a);
  const auto bad = [&](State x) -> Rational { return c.htilde(x) + (x == 3 ? 1 : 0); };
  const MartingaleReport r = verify_one_step(a, 10, 4, bad);
  CHECK_FALSE(r.verified());
  CHECK(r.steps[3].residual != 0);
  for (const auto& s : r.steps) {
    if (s.state != 2 && s.state != 3) CHECK(s.residual == 0);
  }
  CHECK(r.first_failure() == 2);
}

TEST_CASE("htilde inverse") {
  const Compensator two(alpha_geometric(2));
  CHECK(htilde_inverse(two, 0) == 0);
  CHECK(htilde_inverse(two, 10) == 3);
  CHECK(htilde_inverse(Compensator(alpha_geometric(1)), Rational(7, 2)) == 3);
  for (const Rational& q : kGrid) {
    const Compensator c(alpha_geometric(q));
    for (State x = 0; x <= 60; ++x) {
      CHECK(htilde_inverse(c, c.htilde(x)) == x);
      if (x > 0) {
        const Rational midpoint = (c.htilde(x) + c.htilde(x - 1)) / 2;
        CHECK(htilde_inverse(c, midpoint) == x - 1);
      }
    }
  }
  CHECK_THROWS_AS(htilde_inverse(Compensator(AlphaLaw::constant(0)), 5), NotInvertible);
  CHECK_THROWS_AS(htilde_inverse(two, -1), std::invalid_argument);
}

TEST_CASE("variance ledger") {
  for (const Rational& q : kGrid) CHECK(variance_ledger(q, 1).front() == 1);
  for (const Rational& v : variance_ledger(1, 20)) CHECK(v == 1);
  const auto half = variance_ledger(Rational(1, 2), 60);
  Rational partial = 0;
  for (const Rational& v : half) {
    CHECK(v > 0);
    partial += v;
  }
  // E[q^X] <= (1+q)/2 ... so the sum stays small; the bound 4 is loose.
  CHECK(partial < 4);
  for (const Rational& q : {Rational(1, 3), Rational(1, 2), Rational(2), Rational(3)}) {
    const auto ledger = variance_ledger(q, 15);
    Rational sum = 0;
    for (State n = 1; n <= 15; ++n) {
      sum += ledger[n - 1];
      CHECK(second_moment(q, n) == sum);
      if (n <= 10) {
        // brute-force E[Y_n^2]
        const auto law = oracle::brute_force_law([&](std::int64_t x) { return oracle::geometric_alpha(q, x); }, n);
        Rational m2 = 0;
        for (State k = 0; k <= n; ++k) m2 += law[k] * y_value(q, k, n) * y_value(q, k, n);
        CHECK(m2 == sum);
      }
    }
  }
}

TEST_CASE("increment bound") {
  const IncrementBound b = increment_bound_check(Rational(1, 2), 40);
  CHECK(b.max_abs_increment == 1);
  CHECK(b.argmax_state == 0);
  CHECK(b.within_bound);
  CHECK(increment_bound_check(Rational(1, 3), 0).max_abs_increment == 1);
  CHECK_THROWS_AS(increment_bound_check(2, 10), std::invalid_argument);
  CHECK_THROWS_AS(increment_bound_check(1, 10), std::invalid_argument);
}

TEST_CASE("mean zero: exact DP and the modular certificate") {
  for (const Rational& q : kGrid) {
    const auto fn = [&](std::int64_t x) { return oracle::geometric_alpha(q, x); };
    for (int n = 0; n <= 25; ++n) {
      const auto law = oracle::plain_dp(fn, n);
      Rational mean = 0;
      for (int k = 0; k <= n; ++k) mean += law[k] * y_value(q, k, n);
      CHECK(mean == 0);
    }
    const MeanZeroCertificate cert = certify_mean_zero(q, 40, 1);
    CHECK(cert.all_certified());
    CHECK(cert.prime_bits > cert.height_bits);
    CHECK(cert.zero.size() == 41);
  }
}

TEST_CASE("modular certificate rejects a wrong compensator") {
  const Compensator c(alpha_geometric(3));
  const auto bad = [&](State x) -> Rational { return c.htilde(x) + (x >= 2 ? Rational(1, 5) : Rational(0)); };
  const std::vector<bool> zero = mean_zero_modular(3, 12, bad, 3);
  REQUIRE(zero.size() == 13);
  CHECK(zero[0]);
  CHECK(zero[1]);
  bool any_nonzero = false;
  for (bool z : zero) any_nonzero |= !z;
  CHECK(any_nonzero);
  const std::vector<bool> good = mean_zero_modular(3, 12, [&](State x) { return c.htilde(x); }, 3);
  for (bool z : good) CHECK(z);
}

TEST_CASE("certificate is independent of the worker count") {
  const MeanZeroCertificate a = certify_mean_zero(Rational(2, 3), 30, 1);
  const MeanZeroCertificate b = certify_mean_zero(Rational(2, 3), 30, 3);
  CHECK(a.zero == b.zero);
  CHECK(a.certified == b.certified);
  CHECK(a.primes_used == b.primes_used);
}
