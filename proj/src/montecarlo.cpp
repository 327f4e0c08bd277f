#include "hopfchain/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hopfchain/chain_extract.hpp"
#include "hopfchain/error.hpp"
#include "hopfchain/martingale.hpp"
#include "hopfchain/parallel.hpp"
#include "hopfchain/philox.hpp"

namespace hopfchain::montecarlo {

using qcalc::BigInt;

namespace {

constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();

/// floor(r * 2^64) for 0 <= r < 1.
std::uint64_t scaled_floor(const Rational& r) {
  BigInt scaled = r.get_num();
  scaled <<= 64;
  BigInt q;
  mpz_fdiv_q(q.get_mpz_t(), scaled.get_mpz_t(), r.get_den_mpz_t());
  if (q < 0 || mpz_sizeinbase(q.get_mpz_t(), 2) > 64) throw std::logic_error("cumulative probability outside [0, 1)");
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, q.get_mpz_t());
  return out;
}

}  // namespace

TransitionSampler TransitionSampler::from_alpha(AlphaLaw alpha) {
  TransitionSampler s(1, alpha.descriptor());
  s.monotone_ = alpha.kind() == AlphaLaw::Kind::Geometric;
  s.q_ = alpha.kind() == AlphaLaw::Kind::Geometric ? alpha.parameter() : Rational(0);
  s.alpha_ = std::move(alpha);
  return s;
}

TransitionSampler TransitionSampler::from_chain(std::int64_t grading, const Rational& q0) {
  if (grading < 1) throw std::invalid_argument("chain sampler requires grading >= 1");
  if (q0 <= 0) throw std::invalid_argument("q must be positive");
  TransitionSampler s(grading, "chain(grading=" + std::to_string(grading) + ",q=" + qcalc::to_string(q0) + ")");
  s.q_ = q0;
  s.monotone_ = true;
  return s;
}

std::vector<std::uint64_t> TransitionSampler::row_thresholds(State x) const {
  std::vector<std::uint64_t> out;
  if (alpha_) {
    out.push_back(scaled_floor(alpha_->alpha(x)));
    return out;
  }
  const chain::ChainRow row = chain::chain_row(grading_, q_, x);
  Rational cumulative = 0;
  for (std::size_t j = 0; j + 1 < row.moves.size(); ++j) {
    cumulative += row.moves[j].probability;
    out.push_back(scaled_floor(cumulative));
  }
  return out;
}

void TransitionSampler::prepare(State max_state) {
  if (saturated_) return;
  // Rows that cannot change: q = 1, or a constant alpha.
  const bool uniform = (monotone_ && q_ == 1) || (alpha_ && alpha_->kind() == AlphaLaw::Kind::Constant);
  State last = max_state;
  if (alpha_ && alpha_->domain_limit() >= 0) last = std::min(last, alpha_->domain_limit());
  for (State x = rows_; x <= last; ++x) {
    const std::vector<std::uint64_t> row = row_thresholds(x);
    table_.insert(table_.end(), row.begin(), row.end());
    rows_ = x + 1;
    if (uniform) {
      saturated_ = true;
      return;
    }
    // For q != 1 the mass moves monotonically to one extreme jump, so a row
    // whose thresholds have all hit 0 or 2^64-1 is final.
    if (monotone_) {
      const bool all_zero = std::all_of(row.begin(), row.end(), [](std::uint64_t t) { return t == 0; });
      const bool all_max = std::all_of(row.begin(), row.end(), [](std::uint64_t t) { return t == kMax; });
      if (all_zero || all_max) {
        saturated_ = true;
        return;
      }
    }
  }
}

const std::uint64_t* TransitionSampler::thresholds(State x) const {
  if (x < 0) throw std::out_of_range("negative state");
  State row = x;
  if (row >= rows_) {
    if (!saturated_ || rows_ == 0) throw std::out_of_range("state " + std::to_string(x) + " is beyond the prepared table");
    row = rows_ - 1;
  }
  return table_.data() + static_cast<std::size_t>(row) * static_cast<std::size_t>(grading_);
}

State TransitionSampler::step(State x, std::uint64_t u) const {
  const std::uint64_t* t = thresholds(x);
  for (std::int64_t j = 0; j < grading_; ++j) {
    if (u < t[j]) return x + j;
  }
  return x + grading_;
}

TrajectorySample sample_trajectory(TransitionSampler& sampler, State n, std::uint64_t seed, std::uint64_t index) {
  if (n < 0) throw std::invalid_argument("horizon must be nonnegative");
  sampler.prepare(n * sampler.grading());
  TrajectorySample out{seed, index, n, {0}};
  out.path.reserve(static_cast<std::size_t>(n) + 1);
  PhiloxStream stream(seed, index);
  State x = 0;
  for (State t = 0; t < n; ++t) {
    x = sampler.step(x, stream.next());
    out.path.push_back(x);
  }
  return out;
}

std::vector<std::vector<State>> simulate_checkpoints(TransitionSampler& sampler, const std::vector<State>& checkpoints,
                                                     std::uint64_t num_traj, std::uint64_t master_seed,
                                                     std::size_t workers) {
  if (checkpoints.empty()) throw std::invalid_argument("at least one checkpoint is required");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) || checkpoints.front() < 0) {
    throw std::invalid_argument("checkpoints must be nonnegative and ascending");
  }
  sampler.prepare(checkpoints.back() * sampler.grading());
  const TransitionSampler& shared = sampler;
  std::vector<std::vector<State>> out(num_traj);
  parallel_for(num_traj, workers, [&](std::size_t t) {
    PhiloxStream stream(master_seed, t);
    std::vector<State>& row = out[t];
    row.reserve(checkpoints.size());
    State x = 0, time = 0;
    for (State cp : checkpoints) {
      for (; time < cp; ++time) x = shared.step(x, stream.next());
      row.push_back(x);
    }
  });
  return out;
}

RatioEstimate estimate_ratio(TransitionSampler& sampler, State n, std::uint64_t num_traj, std::uint64_t master_seed,
                             std::size_t workers) {
  if (n < 1) throw std::invalid_argument("estimate_ratio requires n >= 1");
  if (num_traj < 1) throw std::invalid_argument("estimate_ratio requires at least one trajectory");
  const auto finals = simulate_checkpoints(sampler, {n}, num_traj, master_seed, workers);
  unsigned __int128 sum = 0, sum_sq = 0;
  for (const auto& row : finals) {
    const auto x = static_cast<unsigned __int128>(row.front());
    sum += x;
    sum_sq += x * x;
  }
  const auto count = static_cast<long double>(num_traj);
  const long double mean_x = static_cast<long double>(sum) / count;
  long double var_x = 0;
  if (num_traj > 1) {
    var_x = (static_cast<long double>(sum_sq) - static_cast<long double>(sum) * mean_x) / (count - 1);
    var_x = std::max<long double>(var_x, 0);
  }
  RatioEstimate est;
  est.n = n;
  est.num_traj = num_traj;
  est.mean = static_cast<double>(mean_x / n);
  est.std_error = static_cast<double>(std::sqrt(var_x / count) / n);
  return est;
}

State nearest_rank(const std::vector<State>& sorted, const Rational& level) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (level <= 0 || level > 1) throw std::invalid_argument("quantile level must lie in (0, 1]");
  const Rational scaled = level * static_cast<long>(sorted.size());
  BigInt rank;
  mpz_cdiv_q(rank.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  const auto index = static_cast<std::size_t>(std::max<long>(rank.get_si(), 1)) - 1;
  return sorted[std::min(index, sorted.size() - 1)];
}

const std::vector<Rational>& report_levels() {
  static const std::vector<Rational> levels{Rational(1, 2), Rational(9, 10), Rational(99, 100), Rational(1)};
  return levels;
}

BoundReport bound_experiment(const Rational& q0, const std::vector<State>& n_grid, std::uint64_t num_traj,
                             std::uint64_t master_seed, std::size_t workers) {
  if (q0 <= 0 || q0 == 1) throw std::invalid_argument("bound_experiment requires q > 0 and q != 1");
  if (num_traj < 1) throw std::invalid_argument("bound_experiment requires at least one trajectory");
  std::vector<State> grid = n_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty() || grid.front() < 1) throw std::invalid_argument("bound_experiment requires a grid of n >= 1");

  TransitionSampler sampler = TransitionSampler::from_alpha(AlphaLaw::geometric(q0));
  const auto samples = simulate_checkpoints(sampler, grid, num_traj, master_seed, workers);

  BoundReport report;
  report.q = q0;
  report.horizon = grid.back();
  report.num_traj = num_traj;
  report.master_seed = master_seed;

  std::vector<std::vector<State>> by_n(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    by_n[g].reserve(num_traj);
    for (const auto& row : samples) by_n[g].push_back(row[g]);
    std::sort(by_n[g].begin(), by_n[g].end());
    GridRow gr{grid[g], {}, {}};
    std::vector<State> deficits;
    for (State x : by_n[g]) deficits.push_back(grid[g] - x);
    std::sort(deficits.begin(), deficits.end());
    for (const Rational& level : report_levels()) {
      gr.x_quantiles.push_back(nearest_rank(by_n[g], level));
      gr.deficit_quantiles.push_back(nearest_rank(deficits, level));
    }
    report.grid.push_back(std::move(gr));
  }

  const auto add_bound = [&](std::string name, auto value_at, bool upper) {
    CandidateBound b{std::move(name), {}, {}, 0};
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double v = value_at(grid[g]);
      std::uint64_t count = 0;
      for (State x : by_n[g]) {
        if (upper ? static_cast<double>(x) > v : static_cast<double>(x) < v) ++count;
      }
      b.value.push_back(v);
      b.violations.push_back(count);
      b.total_violations += count;
    }
    report.bounds.push_back(std::move(b));
  };

  const double log_q = std::log(q0.get_d());
  if (q0 > 1) {
    add_bound("X_n <= (2+delta)/ln(q) * ln(n), delta=1", [&](State n) { return 3.0 * std::log(static_cast<double>(n)) / log_q; },
              true);
    add_bound("X_n <= 3*log2(n) + 10", [](State n) { return 3.0 * std::log2(static_cast<double>(n)) + 10.0; }, true);
    const martingale::Compensator comp(AlphaLaw::geometric(q0));
    add_bound("X_n <= htilde^-1(n^3)",
              [&](State n) {
                const Rational cube = Rational(n) * n * n;
                return static_cast<double>(martingale::htilde_inverse(comp, cube));
              },
              true);
    double num = 0, den = 0;
    for (const GridRow& gr : report.grid) {
      const double ln_n = std::log(static_cast<double>(gr.n));
      num += static_cast<double>(gr.x_quantiles.back()) * ln_n;
      den += ln_n * ln_n;
    }
    report.fitted_log_constant = den > 0 ? num / den : 0.0;
  } else {
    const double shift = 1.0 / (1.0 - q0.get_d());
    add_bound("X_n >= n - n^(3/4) - 1/(1-q)",
              [&](State n) { return static_cast<double>(n) - std::pow(static_cast<double>(n), 0.75) - shift; }, false);
    State worst = 0, p99_min = std::numeric_limits<State>::max(), p99_max = 0;
    const std::size_t p99_index = 2;  // report_levels()[2] == 99/100
    for (const GridRow& gr : report.grid) {
      worst = std::max(worst, gr.deficit_quantiles.back());
      p99_min = std::min(p99_min, gr.deficit_quantiles[p99_index]);
      p99_max = std::max(p99_max, gr.deficit_quantiles[p99_index]);
    }
    report.fitted_deficit = worst;
    report.deficit_p99_spread = p99_max - p99_min;
  }
  return report;
}

std::optional<State> deficit_quantile_oracle(const Rational& q0, State n, const Rational& level) {
  if (level <= 0 || level > 1) throw std::invalid_argument("level must lie in (0, 1]");
  const markov::DistributionEnclosure enc = markov::distribution_enclosure(AlphaLaw::geometric(q0), n);
  // P(n - X <= d) = 1 - P(X <= n - d - 1)
  const auto lower = [&](State d) -> Rational { return d >= n ? Rational(1) : 1 - enc.cdf_upper(n - d - 1); };
  const auto upper = [&](State d) -> Rational { return d >= n ? Rational(1) : 1 - enc.cdf_lower(n - d - 1); };
  for (State d = 0; d <= n; ++d) {
    if (lower(d) >= level) {
      if (d > 0 && upper(d - 1) >= level) return std::nullopt;
      return d;
    }
    if (upper(d) >= level) return std::nullopt;  // cannot decide d
  }
  return std::nullopt;
}

}  // namespace hopfchain::montecarlo
