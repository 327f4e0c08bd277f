#include "hopfchain/martingale.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "hopfchain/error.hpp"
#include "hopfchain/parallel.hpp"

namespace hopfchain::martingale {

using qcalc::BigInt;

Rational Compensator::htilde(State x) const {
  if (x < 0) throw std::invalid_argument("htilde requires x >= 0");
  switch (alpha_.kind()) {
    case AlphaLaw::Kind::Geometric: {
      const Rational& q = alpha_.parameter();
      if (q == 1) return x;
      return (1 - qcalc::pow(q, x)) / (1 - q);
    }
    case AlphaLaw::Kind::Constant: {
      const Rational& c = alpha_.parameter();
      return x * c / (1 - c);
    }
    case AlphaLaw::Kind::Table:
      break;
  }
  Rational sum = 0;
  for (State i = 0; i < x; ++i) {
    const Rational a = alpha_.alpha(i);
    sum += a / (1 - a);
  }
  return sum;
}

Rational y_value(const Rational& q0, State x, State n) {
  if (q0 <= 0) throw std::invalid_argument("q must be positive");
  if (x < 0 || n < 0) throw std::invalid_argument("y_value requires x, n >= 0");
  if (q0 == 1) return Rational(x - n + x);
  return x - n + (1 - qcalc::pow(q0, x)) / (1 - q0);
}

Rational y_alpha_value(const AlphaLaw& alpha, State x, State n) {
  if (x < 0 || n < 0) throw std::invalid_argument("y_alpha_value requires x, n >= 0");
  Rational sum = 0;
  for (State i = 0; i < x; ++i) {
    const Rational a = alpha.alpha(i);
    sum += a / (1 - a);
  }
  return x - n + sum;
}

State MartingaleReport::first_failure() const {
  for (const StepResidual& s : steps) {
    if (s.residual != 0) return s.state;
  }
  return -1;
}

MartingaleReport verify_one_step(const AlphaLaw& alpha, State max_state, State n,
                                 const std::function<Rational(State)>& compensator) {
  if (n < 1) throw std::invalid_argument("verify_one_step requires n >= 1");
  if (max_state < 0) throw std::invalid_argument("verify_one_step requires max_state >= 0");
  MartingaleReport report;
  report.alpha = alpha.descriptor();
  report.time = n;
  report.max_state = max_state;
  report.max_residual = 0;
  // h values for 0..max_state+1, computed once.
  std::vector<Rational> h;
  h.reserve(static_cast<std::size_t>(max_state) + 2);
  for (State x = 0; x <= max_state + 1; ++x) h.push_back(compensator(x));
  const auto y = [&](State x, State t) -> Rational { return x - t + h[static_cast<std::size_t>(x)]; };
  for (State x = 0; x <= max_state; ++x) {
    const Rational a = alpha.alpha(x);
    const Rational residual = a * y(x, n) + (1 - a) * y(x + 1, n) - y(x, n - 1);
    report.max_residual = std::max(report.max_residual, Rational(abs(residual)));
    report.steps.push_back({x, residual});
  }
  return report;
}

MartingaleReport verify_one_step(const AlphaLaw& alpha, State max_state, State n) {
  // Prefix sums of alpha/(1-alpha), independent of the Compensator closed forms.
  std::vector<Rational> prefix{Rational(0)};
  for (State i = 0; i <= max_state; ++i) {
    const Rational a = alpha.alpha(i);
    prefix.push_back(prefix.back() + a / (1 - a));
  }
  return verify_one_step(alpha, max_state, n, [&](State x) { return prefix[static_cast<std::size_t>(x)]; });
}

State htilde_inverse(const Compensator& c, const Rational& v) {
  if (v < 0) throw std::invalid_argument("htilde_inverse requires v >= 0");
  const AlphaLaw& alpha = c.alpha();
  const auto require_strict = [&](State from, State to) {
    if (alpha.kind() != AlphaLaw::Kind::Table && alpha.alpha(0) > 0) return;  // positive everywhere
    for (State i = from; i < to; ++i) {
      if (alpha.alpha(i) == 0) {
        throw NotInvertible("alpha(" + std::to_string(i) + ") = 0, so htilde is not strictly increasing");
      }
    }
  };
  // Invariant: htilde(low) <= v < htilde(high).
  State low = 0;
  State high = 1;
  require_strict(0, 1);
  while (c.htilde(high) <= v) {
    low = high;
    if (high > (State{1} << 61)) throw std::overflow_error("htilde_inverse search exceeded the state range");
    require_strict(high, 2 * high);
    high *= 2;
  }
  while (high - low > 1) {
    const State mid = low + (high - low) / 2;
    if (c.htilde(mid) <= v) {
      low = mid;
    } else {
      high = mid;
    }
  }
  return low;
}

std::vector<Rational> variance_ledger(const Rational& q0, State n) {
  if (q0 <= 0) throw std::invalid_argument("q must be positive");
  if (n < 1) throw std::invalid_argument("variance_ledger requires n >= 1");
  const auto history = markov::distribution_dp_history(AlphaLaw::geometric(q0), n - 1);
  std::vector<Rational> out;
  out.reserve(history.size());
  for (const auto& d : history) {
    out.push_back(markov::expectation(d, [&](State x) { return qcalc::pow(q0, x); }));
  }
  return out;
}

Rational second_moment(const Rational& q0, State n) {
  const auto d = markov::distribution_dp(AlphaLaw::geometric(q0), n);
  return markov::expectation(d, [&](State x) -> Rational {
    const Rational y = y_value(q0, x, n);
    return y * y;
  });
}

IncrementBound increment_bound_check(const Rational& q0, State max_state) {
  if (q0 <= 0 || q0 >= 1) throw std::invalid_argument("increment_bound_check requires 0 < q < 1");
  if (max_state < 0) throw std::invalid_argument("increment_bound_check requires max_state >= 0");
  IncrementBound out;
  out.max_abs_increment = 0;
  for (State x = 0; x <= max_state; ++x) {
    const Rational failure = y_value(q0, x, 1) - y_value(q0, x, 0);
    const Rational success = y_value(q0, x + 1, 1) - y_value(q0, x, 0);
    if (failure != -1 || success != qcalc::pow(q0, x)) {
      throw std::logic_error("martingale increment differs from -1 / q^x at state " + std::to_string(x));
    }
    if (abs(failure) > out.max_abs_increment) {
      out.max_abs_increment = abs(failure);
      out.argmax_state = x;
      out.argmax_is_success = false;
    }
    if (abs(success) > out.max_abs_increment) {
      out.max_abs_increment = abs(success);
      out.argmax_state = x;
      out.argmax_is_success = true;
    }
  }
  out.within_bound = out.max_abs_increment <= 2;
  return out;
}

// ---------------------------------------------------------------------------
// Modular zero test
// ---------------------------------------------------------------------------

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mul_mod(u64 a, u64 b, u64 p) { return static_cast<u64>(static_cast<u128>(a) * b % p); }

u64 pow_mod(u64 base, u64 e, u64 p) {
  u64 r = 1 % p;
  base %= p;
  while (e) {
    if (e & 1) r = mul_mod(r, base, p);
    base = mul_mod(base, base, p);
    e >>= 1;
  }
  return r;
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % small == 0) return n == small;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // Deterministic for n < 3.3e24.
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = pow_mod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int r = 1; r < s; ++r) {
      x = mul_mod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

/// Montgomery arithmetic modulo an odd p < 2^62.
class Montgomery {
 public:
  explicit Montgomery(u64 p) : p_(p) {
    u64 inv = p;  // Newton iteration for p^-1 mod 2^64
    for (int i = 0; i < 6; ++i) inv *= 2 - p * inv;
    neg_inv_ = ~inv + 1;
    const u64 r = static_cast<u64>((static_cast<u128>(1) << 64) % p);
    r2_ = mul_mod(r, r, p);
  }

  u64 modulus() const { return p_; }
  u64 to(u64 x) const { return reduce(static_cast<u128>(x % p_) * r2_); }
  u64 from(u64 x) const { return reduce(x); }
  u64 mul(u64 a, u64 b) const { return reduce(static_cast<u128>(a) * b); }
  u64 add(u64 a, u64 b) const {
    const u64 s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  u64 sub(u64 a, u64 b) const { return a >= b ? a - b : a + p_ - b; }
  u64 inverse(u64 a) const { return to(pow_mod(from(a), p_ - 2, p_)); }

  u64 from_signed(std::int64_t v) const {
    const u64 mag = to(static_cast<u64>(v < 0 ? -v : v));
    return v < 0 ? sub(0, mag) : mag;
  }

  u64 from_big(const BigInt& v) const {
    BigInt r;
    mpz_fdiv_r_ui(r.get_mpz_t(), v.get_mpz_t(), p_);
    return to(r.get_ui());
  }

 private:
  u64 reduce(u128 t) const {
    const u64 m = static_cast<u64>(t) * neg_inv_;
    const u64 out = static_cast<u64>((t + static_cast<u128>(m) * p_) >> 64);
    return out >= p_ ? out - p_ : out;
  }

  u64 p_;
  u64 neg_inv_;
  u64 r2_;
};

std::size_t bit_length(const BigInt& v) { return v == 0 ? 0 : mpz_sizeinbase(v.get_mpz_t(), 2); }

int floor_log2(u64 v) { return 63 - __builtin_clzll(v); }

/// Chain data reduced modulo p, or nullopt if a needed denominator vanishes.
struct ModularChain {
  std::vector<u64> stay;  // alpha(k), k < n
  std::vector<u64> step;  // 1 - alpha(k)
};

std::optional<ModularChain> reduce_chain(const Montgomery& m, const BigInt& a, const BigInt& b, State n) {
  const u64 am = m.from_big(a), bm = m.from_big(b);
  if (am == 0 || bm == 0) return std::nullopt;
  ModularChain out;
  std::vector<u64> denominators;
  u64 ak = m.to(1), bk = m.to(1);
  for (State k = 0; k < n; ++k) {
    const u64 d = m.add(ak, bk);
    if (d == 0) return std::nullopt;
    out.stay.push_back(ak);
    out.step.push_back(bk);
    denominators.push_back(d);
    ak = m.mul(ak, am);
    bk = m.mul(bk, bm);
  }
  if (denominators.empty()) return out;
  // Batch inversion: one modular inverse for all denominators.
  std::vector<u64> prefix(denominators.size());
  u64 acc = m.to(1);
  for (std::size_t k = 0; k < denominators.size(); ++k) {
    prefix[k] = acc;
    acc = m.mul(acc, denominators[k]);
  }
  u64 inv = m.inverse(acc);
  for (std::size_t k = denominators.size(); k-- > 0;) {
    const u64 inv_k = m.mul(inv, prefix[k]);
    inv = m.mul(inv, denominators[k]);
    out.stay[k] = m.mul(out.stay[k], inv_k);
    out.step[k] = m.mul(out.step[k], inv_k);
  }
  return out;
}

/// zero[t] for t = 0..n: sum_k P_t(k) (k - t + h[k]) == 0 mod p.
std::vector<bool> modular_mean_zero(const Montgomery& m, const ModularChain& chain, const std::vector<u64>& h, State n) {
  std::vector<bool> zero(static_cast<std::size_t>(n) + 1);
  std::vector<u64> p(static_cast<std::size_t>(n) + 1, 0);
  p[0] = m.to(1);
  zero[0] = m.from(h[0]) == 0;
  for (State t = 1; t <= n; ++t) {
    for (State k = t; k >= 0; --k) {
      u64 v = k < t ? m.mul(chain.stay[k], p[k]) : 0;
      if (k > 0) v = m.add(v, m.mul(chain.step[k - 1], p[k - 1]));
      p[k] = v;
    }
    u64 mean = 0;
    for (State k = 0; k <= t; ++k) {
      if (p[k] == 0) continue;
      const u64 y = m.add(m.from_signed(k - t), h[k]);
      mean = m.add(mean, m.mul(p[k], y));
    }
    zero[t] = mean == 0;
  }
  return zero;
}

/// 62-bit primes in decreasing order, skipping those that divide b or any
/// a^i + b^i for i < n (those are detected again, cheaply, in reduce_chain).
class PrimeStream {
 public:
  u64 next() {
    while (true) {
      candidate_ -= 2;
      if (is_prime(candidate_)) return candidate_;
    }
  }

 private:
  u64 candidate_ = (u64{1} << 62) + 1;
};

}  // namespace

bool MeanZeroCertificate::all_certified() const {
  return std::all_of(certified.begin(), certified.end(), [](bool b) { return b; });
}

MeanZeroCertificate certify_mean_zero(const Rational& q0, State max_n, std::size_t workers) {
  if (q0 <= 0) throw std::invalid_argument("q must be positive");
  if (max_n < 0) throw std::invalid_argument("max_n must be nonnegative");
  const BigInt a = q0.get_num(), b = q0.get_den();

  MeanZeroCertificate cert;
  cert.q = q0;
  cert.max_n = max_n;
  // |numerator| <= (n + h(n)) * b^n * prod_{i<n} (a^i + b^i)^{n-i}; the bound is
  // increasing in n, so the one at max_n covers every n.
  const Compensator comp(AlphaLaw::geometric(q0));
  BigInt y_bound;
  const Rational h_max = comp.htilde(max_n);
  mpz_cdiv_q(y_bound.get_mpz_t(), h_max.get_num_mpz_t(), h_max.get_den_mpz_t());
  y_bound += max_n;
  std::size_t height = bit_length(y_bound) + static_cast<std::size_t>(max_n) * bit_length(b);
  BigInt ai = 1, bi = 1;
  for (State i = 0; i < max_n; ++i) {
    height += static_cast<std::size_t>(max_n - i) * bit_length(ai + bi);
    ai *= a;
    bi *= b;
  }
  cert.height_bits = height + 1;

  struct Job {
    u64 prime;
  };
  std::vector<Job> jobs;
  PrimeStream primes;
  std::size_t bits = 0;
  while (bits <= cert.height_bits) {
    const u64 p = primes.next();
    const Montgomery m(p);
    if (!reduce_chain(m, a, b, max_n)) continue;
    jobs.push_back({p});
    bits += static_cast<std::size_t>(floor_log2(p));
  }
  cert.primes_used = jobs.size();
  cert.prime_bits = bits;

  std::vector<std::vector<bool>> results(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t j) {
    const Montgomery m(jobs[j].prime);
    const ModularChain chain = *reduce_chain(m, a, b, max_n);
    // h(k) = sum_{i<k} (a/b)^i
    std::vector<u64> h{0};
    const u64 ratio = m.mul(m.from_big(a), m.inverse(m.from_big(b)));
    u64 power = m.to(1);
    for (State k = 0; k < max_n; ++k) {
      h.push_back(m.add(h.back(), power));
      power = m.mul(power, ratio);
    }
    results[j] = modular_mean_zero(m, chain, h, max_n);
  });

  cert.zero.assign(static_cast<std::size_t>(max_n) + 1, true);
  for (const auto& r : results) {
    for (std::size_t t = 0; t < r.size(); ++t) cert.zero[t] = cert.zero[t] && r[t];
  }
  cert.certified.resize(cert.zero.size());
  for (std::size_t t = 0; t < cert.zero.size(); ++t) cert.certified[t] = cert.zero[t] && bits > cert.height_bits;
  return cert;
}

std::vector<bool> mean_zero_modular(const Rational& q0, State max_n, const std::function<Rational(State)>& compensator,
                                    std::size_t prime_count) {
  if (q0 <= 0) throw std::invalid_argument("q must be positive");
  const BigInt a = q0.get_num(), b = q0.get_den();
  std::vector<Rational> h_exact;
  for (State k = 0; k <= max_n; ++k) h_exact.push_back(compensator(k));
  std::vector<bool> zero(static_cast<std::size_t>(max_n) + 1, true);
  PrimeStream primes;
  std::size_t used = 0;
  while (used < prime_count) {
    const Montgomery m(primes.next());
    const auto chain = reduce_chain(m, a, b, max_n);
    if (!chain) continue;
    std::vector<u64> h;
    bool ok = true;
    for (const Rational& v : h_exact) {
      const u64 den = m.from_big(v.get_den());
      if (m.from(den) == 0) {
        ok = false;
        break;
      }
      h.push_back(m.mul(m.from_big(v.get_num()), m.inverse(den)));
    }
    if (!ok) continue;
    const auto r = modular_mean_zero(m, *chain, h, max_n);
    for (std::size_t t = 0; t < r.size(); ++t) zero[t] = zero[t] && r[t];
    ++used;
  }
  return zero;
}

}  // namespace hopfchain::martingale
