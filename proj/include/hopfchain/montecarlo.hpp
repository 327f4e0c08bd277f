#pragma once

/**
 * @file montecarlo.hpp
 * @brief Seeded simulation of the extracted chains.
 *
 * Trajectory t of a run with master seed s draws from PhiloxStream(s, t), so
 * results do not depend on the number of workers. A row with probabilities
 * p_0..p_g (by increasing jump) is sampled from a uniform 64-bit u by taking
 * the first j with u < floor(2^64 (p_0 + ... + p_j)); the last outcome takes
 * the rest. The thresholds are computed with exact integer arithmetic.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hopfchain/markov.hpp"

namespace hopfchain::montecarlo {

using markov::AlphaLaw;
using markov::State;
using qcalc::Rational;

class TransitionSampler {
 public:
  /// Stay with probability alpha(x), step +1 otherwise.
  static TransitionSampler from_alpha(AlphaLaw alpha);
  /// The Phi_i chain of grading i >= 1 at q0 > 0.
  static TransitionSampler from_chain(std::int64_t grading, const Rational& q0);

  std::int64_t grading() const noexcept { return grading_; }
  std::string descriptor() const { return descriptor_; }

  /// Tabulates thresholds for states 0..max_state. Not thread-safe; call it
  /// before sharing the sampler between workers.
  void prepare(State max_state);

  /// Next state from x given a uniform 64-bit draw. Throws std::out_of_range
  /// for states beyond the prepared table (unless the rows have saturated).
  State step(State x, std::uint64_t u) const;

  /// Cumulative thresholds of row x (all outcomes but the last).
  const std::uint64_t* thresholds(State x) const;

 private:
  TransitionSampler(std::int64_t grading, std::string descriptor) : grading_(grading), descriptor_(std::move(descriptor)) {}

  std::vector<std::uint64_t> row_thresholds(State x) const;

  std::int64_t grading_ = 1;
  std::string descriptor_;
  std::optional<AlphaLaw> alpha_;
  Rational q_;
  bool monotone_ = false;  // rows eventually constant, detected by saturation
  std::vector<std::uint64_t> table_;
  State rows_ = 0;
  bool saturated_ = false;
};

struct TrajectorySample {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;  // trajectory number within the seeded run
  State horizon = 0;
  std::vector<State> path;  // X_0..X_n
};

/// Full path of trajectory `index` in the run seeded by `seed`; it matches
/// what simulate_checkpoints sees for that trajectory.
TrajectorySample sample_trajectory(TransitionSampler& sampler, State n, std::uint64_t seed, std::uint64_t index = 0);

/// One row per trajectory: X at each checkpoint (checkpoints sorted ascending).
std::vector<std::vector<State>> simulate_checkpoints(TransitionSampler& sampler, const std::vector<State>& checkpoints,
                                                     std::uint64_t num_traj, std::uint64_t master_seed,
                                                     std::size_t workers);

struct RatioEstimate {
  State n = 0;
  std::uint64_t num_traj = 0;
  double mean = 0;       // of X_n / n
  double std_error = 0;  // of the mean
};

RatioEstimate estimate_ratio(TransitionSampler& sampler, State n, std::uint64_t num_traj, std::uint64_t master_seed,
                             std::size_t workers);

/// Nearest-rank quantile of sorted values: the ceil(level * N)-th smallest.
State nearest_rank(const std::vector<State>& sorted, const Rational& level);

/// Quantile levels reported in bound experiments: 1/2, 9/10, 99/100, 1.
const std::vector<Rational>& report_levels();

struct CandidateBound {
  std::string name;
  std::vector<double> value;          // bound at each grid n
  std::vector<std::uint64_t> violations;  // per grid n
  std::uint64_t total_violations = 0;
};

struct GridRow {
  State n = 0;
  std::vector<State> x_quantiles;        // X_n at report_levels()
  std::vector<State> deficit_quantiles;  // n - X_n at report_levels()
};

struct BoundReport {
  Rational q;
  State horizon = 0;
  std::uint64_t num_traj = 0;
  std::uint64_t master_seed = 0;
  std::vector<GridRow> grid;
  std::vector<CandidateBound> bounds;
  /// q > 1: C in X_n ~ C ln n fitted by least squares on the top quantile.
  std::optional<double> fitted_log_constant;
  /// q < 1: largest observed deficit n - X_n over the grid (the D in X_n >= n - D).
  std::optional<State> fitted_deficit;
  /// q < 1: max - min over the grid of the 99th percentile of n - X_n.
  std::optional<State> deficit_p99_spread;
};

/// Runs num_traj trajectories to max(n_grid), observing each at every grid
/// point. Requires q0 != 1.
BoundReport bound_experiment(const Rational& q0, const std::vector<State>& n_grid, std::uint64_t num_traj,
                             std::uint64_t master_seed, std::size_t workers);

/// Smallest d with P(n - X_n <= d) >= level, certified from the enclosure DP;
/// nullopt if the enclosure cannot separate two candidates.
std::optional<State> deficit_quantile_oracle(const Rational& q0, State n, const Rational& level);

}  // namespace hopfchain::montecarlo
