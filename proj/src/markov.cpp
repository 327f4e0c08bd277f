#include "hopfchain/markov.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "hopfchain/error.hpp"
#include "hopfchain/parallel.hpp"

namespace hopfchain::markov {

namespace {

// Integer DP is used while the common denominator stays below this size.
constexpr std::size_t kMaxCommonDenominatorBits = 256;

void require_nonnegative(State v, const char* what) {
  if (v < 0) throw std::invalid_argument(std::string(what) + " must be nonnegative");
}

std::vector<Rational> alpha_prefix(const AlphaLaw& alpha, State count) {
  std::vector<Rational> out;
  out.reserve(static_cast<std::size_t>(count));
  if (alpha.kind() == AlphaLaw::Kind::Geometric) {
    const Rational& q0 = alpha.parameter();
    Rational power = 1;
    for (State x = 0; x < count; ++x) {
      out.push_back(power / (1 + power));
      power *= q0;
    }
    return out;
  }
  for (State x = 0; x < count; ++x) out.push_back(alpha.alpha(x));
  return out;
}

/// lcm of the denominators of alphas, or nullopt once it grows too large.
std::optional<BigInt> small_common_denominator(const std::vector<Rational>& alphas) {
  BigInt l = 1;
  for (const Rational& a : alphas) {
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), a.get_den_mpz_t());
    if (mpz_sizeinbase(l.get_mpz_t(), 2) > kMaxCommonDenominatorBits) return std::nullopt;
  }
  return l;
}

Rational make_rational(const BigInt& num, const BigInt& den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

template <typename Sink>
void run_dp(const AlphaLaw& alpha, State n, Sink&& sink) {
  require_nonnegative(n, "horizon n");
  // States reachable before the last step are 0..n-1.
  const std::vector<Rational> alphas = alpha_prefix(alpha, n);

  if (const auto common = small_common_denominator(alphas)) {
    const BigInt& l = *common;
    std::vector<BigInt> stay, step;
    for (const Rational& a : alphas) {
      stay.push_back(a.get_num() * (l / a.get_den()));
      step.push_back(l - stay.back());
    }
    std::vector<BigInt> v{1}, next;
    BigInt scale = 1;  // l^t
    const auto emit = [&](State t) {
      Distribution d{t, {}};
      d.mass.reserve(v.size());
      for (const BigInt& x : v) d.mass.push_back(make_rational(x, scale));
      sink(std::move(d));
    };
    emit(0);
    for (State t = 1; t <= n; ++t) {
      next.assign(static_cast<std::size_t>(t) + 1, BigInt(0));
      for (State k = 0; k < t; ++k) {
        next[k] += stay[k] * v[k];
        next[k + 1] += step[k] * v[k];
      }
      v.swap(next);
      scale *= l;
      emit(t);
    }
    return;
  }

  std::vector<Rational> p{Rational(1)}, next;
  sink(Distribution{0, p});
  for (State t = 1; t <= n; ++t) {
    next.assign(static_cast<std::size_t>(t) + 1, Rational(0));
    for (State k = 0; k < t; ++k) {
      if (p[k] == 0) continue;
      next[k] += alphas[k] * p[k];
      next[k + 1] += (1 - alphas[k]) * p[k];
    }
    p.swap(next);
    sink(Distribution{t, p});
  }
}

/// Weak compositions of `total` into `parts` parts, odometer order.
template <typename Visit>
void for_each_composition(State total, State parts, Visit&& visit) {
  std::vector<State> y(static_cast<std::size_t>(parts), 0);
  y[0] = total;
  while (true) {
    visit(y);
    std::size_t j = 0;
    while (j + 1 < y.size() && y[j] == 0) ++j;
    if (j + 1 >= y.size()) return;
    const State carry = y[j];
    y[j] = 0;
    y[0] = carry - 1;
    ++y[j + 1];
  }
}

Rational composition_sum(const std::vector<Rational>& weights, State total) {
  // powers[i][j] = weights[i]^j
  std::vector<std::vector<Rational>> powers(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    powers[i].push_back(1);
    for (State j = 1; j <= total; ++j) powers[i].push_back(powers[i].back() * weights[i]);
  }
  Rational sum = 0;
  for_each_composition(total, static_cast<State>(weights.size()), [&](const std::vector<State>& y) {
    Rational term = 1;
    for (std::size_t i = 0; i < y.size() && term != 0; ++i) term *= powers[i][y[i]];
    sum += term;
  });
  return sum;
}

void check_support(State n, State k) {
  require_nonnegative(n, "n");
  require_nonnegative(k, "k");
  if (k > n) throw OutOfSupport("P(X_n = k) is outside the support: k=" + std::to_string(k) + " > n=" + std::to_string(n));
}

using Fixed = std::uint64_t;
constexpr Fixed kOne = Fixed{1} << DistributionEnclosure::kFractionBits;

Fixed floor_fixed(const Rational& r) {
  BigInt scaled = r.get_num();
  scaled <<= DistributionEnclosure::kFractionBits;
  BigInt out;
  mpz_fdiv_q(out.get_mpz_t(), scaled.get_mpz_t(), r.get_den_mpz_t());
  return static_cast<Fixed>(out.get_ui());
}

Fixed ceil_fixed(const Rational& r) {
  BigInt scaled = r.get_num();
  scaled <<= DistributionEnclosure::kFractionBits;
  BigInt out;
  mpz_cdiv_q(out.get_mpz_t(), scaled.get_mpz_t(), r.get_den_mpz_t());
  return static_cast<Fixed>(out.get_ui());
}

Fixed mul_down(Fixed a, Fixed b) {
  return static_cast<Fixed>((static_cast<unsigned __int128>(a) * b) >> DistributionEnclosure::kFractionBits);
}

Fixed mul_up(Fixed a, Fixed b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b + (kOne - 1);
  return static_cast<Fixed>(p >> DistributionEnclosure::kFractionBits);
}

Rational fixed_to_rational(const BigInt& v) {
  BigInt den = 1;
  den <<= DistributionEnclosure::kFractionBits;
  return make_rational(v, den);
}

BigInt to_big(Fixed v) {
  BigInt out;
  mpz_import(out.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return out;
}

}  // namespace

AlphaLaw AlphaLaw::geometric(const Rational& q0) {
  if (q0 <= 0) throw std::invalid_argument("geometric alpha requires q > 0, got " + qcalc::to_string(q0));
  return AlphaLaw(Kind::Geometric, q0, {});
}

AlphaLaw AlphaLaw::constant(const Rational& c) {
  if (c < 0 || c >= 1) throw std::invalid_argument("constant alpha must lie in [0, 1), got " + qcalc::to_string(c));
  return AlphaLaw(Kind::Constant, c, {});
}

AlphaLaw AlphaLaw::table(std::vector<Rational> values) {
  for (const Rational& v : values) {
    if (v < 0 || v >= 1) throw std::invalid_argument("alpha table entries must lie in [0, 1), got " + qcalc::to_string(v));
  }
  return AlphaLaw(Kind::Table, 0, std::move(values));
}

Rational AlphaLaw::alpha(State x) const {
  if (x < 0) throw std::invalid_argument("alpha queried at a negative state");
  switch (kind_) {
    case Kind::Geometric: {
      const Rational p = qcalc::pow(parameter_, x);
      return p / (1 + p);
    }
    case Kind::Constant:
      return parameter_;
    case Kind::Table:
      if (static_cast<std::size_t>(x) >= values_.size()) {
        throw OutOfRange("alpha table has no entry for state " + std::to_string(x));
      }
      return values_[static_cast<std::size_t>(x)];
  }
  throw std::logic_error("unknown alpha kind");
}

State AlphaLaw::domain_limit() const noexcept {
  return kind_ == Kind::Table ? static_cast<State>(values_.size()) - 1 : -1;
}

std::string AlphaLaw::descriptor() const {
  switch (kind_) {
    case Kind::Geometric:
      return "geometric(" + qcalc::to_string(parameter_) + ")";
    case Kind::Constant:
      return "constant(" + qcalc::to_string(parameter_) + ")";
    case Kind::Table: {
      std::string out = "table[";
      for (std::size_t i = 0; i < values_.size(); ++i) {
        if (i) out += ",";
        out += qcalc::to_string(values_[i]);
      }
      return out + "]";
    }
  }
  return "?";
}

AlphaLaw alpha_geometric(const Rational& q0) { return AlphaLaw::geometric(q0); }

Rational Distribution::at(State k) const {
  if (k < 0 || static_cast<std::size_t>(k) >= mass.size()) return 0;
  return mass[static_cast<std::size_t>(k)];
}

Rational Distribution::total() const {
  Rational sum = 0;
  for (const Rational& m : mass) sum += m;
  return sum;
}

Distribution distribution_dp(const AlphaLaw& alpha, State n) {
  Distribution last;
  run_dp(alpha, n, [&](Distribution&& d) {
    if (d.time == n) last = std::move(d);
  });
  return last;
}

std::vector<Distribution> distribution_dp_history(const AlphaLaw& alpha, State n) {
  std::vector<Distribution> out;
  run_dp(alpha, n, [&](Distribution&& d) { out.push_back(std::move(d)); });
  return out;
}

Rational distribution_formula(const Rational& q0, State n, State k) {
  if (q0 <= 0) throw std::invalid_argument("q must be positive");
  check_support(n, k);
  std::vector<Rational> failure;
  Rational power = 1;
  for (State i = 0; i <= k; ++i) {
    failure.push_back(power / (power + 1));
    power *= q0;
  }
  return composition_sum(failure, n - k) / qcalc::q_pochhammer_minus1(k, q0);
}

Rational distribution_formula_general(const AlphaLaw& alpha, State n, State k) {
  check_support(n, k);
  Rational successes = 1;
  std::vector<Rational> failure;
  for (State i = 0; i <= k; ++i) {
    failure.push_back(alpha.alpha(i));
    if (i < k) successes *= 1 - failure.back();
  }
  return successes * composition_sum(failure, n - k);
}

Rational expected_value(const Distribution& d) {
  return expectation(d, [](State k) { return Rational(k); });
}

Rational hitting_time_closed(const Rational& q0, State target) {
  if (q0 <= 0) throw std::invalid_argument("q must be positive");
  require_nonnegative(target, "target N");
  if (q0 == 1) return 2 * target;
  return target + (qcalc::pow(q0, target) - 1) / (q0 - 1);
}

Rational hitting_time_general(const AlphaLaw& alpha, State target) {
  require_nonnegative(target, "target N");
  Rational sum = 0;
  for (State i = 0; i < target; ++i) sum += 1 / alpha.success(i);
  return sum;
}

RationalMatrix absorbing_transition_matrix(const AlphaLaw& alpha, State target) {
  if (target < 1) throw std::invalid_argument("absorbing chain requires N >= 1");
  const auto size = static_cast<std::size_t>(target) + 1;
  RationalMatrix p(size, std::vector<Rational>(size, Rational(0)));
  for (std::size_t i = 0; i + 1 < size; ++i) {
    const Rational a = alpha.alpha(static_cast<State>(i));
    p[i][i] = a;
    p[i][i + 1] = 1 - a;
  }
  p[size - 1][size - 1] = 1;
  return p;
}

namespace {

/// (I - Q) for the transient block of an absorbing chain whose last state absorbs.
RationalMatrix transient_system(const RationalMatrix& p) {
  const std::size_t n = p.size() - 1;
  RationalMatrix m(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = (i == j ? Rational(1) : Rational(0)) - p[i][j];
  }
  return m;
}

/// Solves m x = rhs for upper-triangular m.
std::vector<Rational> back_substitute(const RationalMatrix& m, const std::vector<Rational>& rhs) {
  const std::size_t n = m.size();
  std::vector<Rational> x(n);
  for (std::size_t r = n; r-- > 0;) {
    for (std::size_t c = 0; c < r; ++c) {
      if (m[r][c] != 0) throw std::logic_error("transient system is not upper triangular");
    }
    Rational acc = rhs[r];
    for (std::size_t c = r + 1; c < n; ++c) acc -= m[r][c] * x[c];
    if (m[r][r] == 0) throw std::domain_error("absorbing state unreachable: alpha = 1 on a transient state");
    x[r] = acc / m[r][r];
  }
  return x;
}

}  // namespace

RationalMatrix fundamental_matrix(const AlphaLaw& alpha, State target) {
  const RationalMatrix system = transient_system(absorbing_transition_matrix(alpha, target));
  const std::size_t n = system.size();
  RationalMatrix w(n, std::vector<Rational>(n));
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<Rational> e(n, Rational(0));
    e[col] = 1;
    const std::vector<Rational> x = back_substitute(system, e);
    for (std::size_t row = 0; row < n; ++row) w[row][col] = x[row];
  }
  return w;
}

Rational hitting_time_matrix(const AlphaLaw& alpha, State target) {
  const RationalMatrix system = transient_system(absorbing_transition_matrix(alpha, target));
  return back_substitute(system, std::vector<Rational>(system.size(), Rational(1))).front();
}

Rational DistributionEnclosure::mass_lower(State k) const {
  if (k < 0 || static_cast<std::size_t>(k) >= lower.size()) return 0;
  return fixed_to_rational(to_big(lower[static_cast<std::size_t>(k)]));
}

Rational DistributionEnclosure::mass_upper(State k) const {
  if (k < 0 || static_cast<std::size_t>(k) >= upper.size()) return 0;
  return fixed_to_rational(to_big(upper[static_cast<std::size_t>(k)]));
}

Rational DistributionEnclosure::expected_lower() const {
  BigInt sum = 0;
  for (std::size_t k = 1; k < lower.size(); ++k) sum += to_big(lower[k]) * static_cast<unsigned long>(k);
  return fixed_to_rational(sum);
}

Rational DistributionEnclosure::expected_upper() const {
  BigInt direct = 0, low_part = 0, low_mass = 0;
  for (std::size_t k = 0; k < upper.size(); ++k) {
    direct += to_big(upper[k]) * static_cast<unsigned long>(k);
    low_part += to_big(lower[k]) * static_cast<unsigned long>(k);
    low_mass += to_big(lower[k]);
  }
  // Missing mass can sit no higher than state n.
  const BigInt via_mass = low_part + (to_big(kOne) - low_mass) * static_cast<unsigned long>(time);
  return fixed_to_rational(direct < via_mass ? direct : via_mass);
}

Rational DistributionEnclosure::cdf_lower(State k) const {
  BigInt below = 0, above = 0;
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (static_cast<State>(j) <= k) {
      below += to_big(lower[j]);
    } else {
      above += to_big(upper[j]);
    }
  }
  const BigInt complement = to_big(kOne) - above;
  return fixed_to_rational(std::max(below, complement));
}

Rational DistributionEnclosure::cdf_upper(State k) const {
  BigInt below = 0, above = 0;
  for (std::size_t j = 0; j < upper.size(); ++j) {
    if (static_cast<State>(j) <= k) {
      below += to_big(upper[j]);
    } else {
      above += to_big(lower[j]);
    }
  }
  const BigInt complement = to_big(kOne) - above;
  return fixed_to_rational(std::min(below, complement));
}

DistributionEnclosure distribution_enclosure(const AlphaLaw& alpha, State n) {
  require_nonnegative(n, "horizon n");
  const std::vector<Rational> alphas = alpha_prefix(alpha, n);
  std::vector<Fixed> stay_lo, stay_hi;
  for (const Rational& a : alphas) {
    stay_lo.push_back(floor_fixed(a));
    stay_hi.push_back(ceil_fixed(a));
  }
  DistributionEnclosure out;
  out.time = n;
  std::vector<Fixed>& lo = out.lower;
  std::vector<Fixed>& hi = out.upper;
  lo.assign(static_cast<std::size_t>(n) + 1, 0);
  hi.assign(static_cast<std::size_t>(n) + 1, 0);
  lo[0] = hi[0] = kOne;
  for (State t = 1; t <= n; ++t) {
    // In place from the top: slot k reads only k and k-1 from time t-1.
    for (State k = t; k >= 0; --k) {
      Fixed new_lo = 0, new_hi = 0;
      if (k < t) {
        new_lo = mul_down(stay_lo[k], lo[k]);
        new_hi = mul_up(stay_hi[k], hi[k]);
      }
      if (k > 0) {
        new_lo += mul_down(kOne - stay_hi[k - 1], lo[k - 1]);
        new_hi += mul_up(kOne - stay_lo[k - 1], hi[k - 1]);
      }
      lo[k] = new_lo;
      hi[k] = std::min(new_hi, kOne);
    }
  }
  return out;
}

RatioBounds expected_ratio(const AlphaLaw& alpha, State n, State exact_cutoff) {
  if (n < 1) throw std::invalid_argument("expected_ratio requires n >= 1");
  const bool cheap = n <= exact_cutoff || small_common_denominator(alpha_prefix(alpha, n)).has_value();
  if (cheap) {
    const Rational r = expected_value(distribution_dp(alpha, n)) / n;
    return {r, r, true};
  }
  const DistributionEnclosure enc = distribution_enclosure(alpha, n);
  return {enc.expected_lower() / n, enc.expected_upper() / n, false};
}

std::vector<PhaseCell> phase_scan(const std::vector<Rational>& q_list, const std::vector<State>& n_list,
                                  std::size_t workers) {
  std::vector<Rational> qs = q_list;
  std::vector<State> ns = n_list;
  std::sort(qs.begin(), qs.end());
  std::sort(ns.begin(), ns.end());
  for (const Rational& q : qs) {
    if (q <= 0) throw std::invalid_argument("phase_scan requires q > 0");
  }
  for (State n : ns) {
    if (n < 1) throw std::invalid_argument("phase_scan requires n >= 1");
  }
  std::vector<PhaseCell> cells;
  for (const Rational& q : qs) {
    for (State n : ns) cells.push_back(PhaseCell{q, n, {}});
  }
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    cells[i].ratio = expected_ratio(AlphaLaw::geometric(cells[i].q), cells[i].n);
  });
  return cells;
}

}  // namespace hopfchain::markov
