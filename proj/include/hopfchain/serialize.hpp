#pragma once

/**
 * @file serialize.hpp
 * @brief JSON and CSV forms of every result type.
 *
 * Rationals are [numerator, denominator] pairs; an integer that does not fit
 * in int64 is written as a decimal string. Readers accept both.
 */

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hopfchain/chain_extract.hpp"
#include "hopfchain/hopf.hpp"
#include "hopfchain/markov.hpp"
#include "hopfchain/martingale.hpp"
#include "hopfchain/montecarlo.hpp"

namespace hopfchain::serialize {

using json = nlohmann::json;
using qcalc::BigInt;
using qcalc::Rational;

json big_to_json(const BigInt& v);
BigInt big_from_json(const json& j);

json rational_to_json(const Rational& r);
Rational rational_from_json(const json& j);

/// [[exponent, num, den], ...] by increasing exponent.
json to_json(const qcalc::LaurentPoly& p);
qcalc::LaurentPoly laurent_from_json(const json& j);

/// [{e, k, coeff}, ...] sorted by (e, k).
json to_json(const hopf::AlgebraElement& x);
hopf::AlgebraElement algebra_from_json(const json& j);

/// [{left: "E^a K^b", right: "E^c K^d", coeff}, ...] sorted by (left, right).
json to_json(const hopf::TensorElement& t);
hopf::TensorElement tensor_from_json(const json& j);

json to_json(const hopf::AxiomReport& r);
hopf::AxiomReport axiom_report_from_json(const json& j);

json to_json(const chain::ChainSpec& spec);
chain::ChainSpec chain_spec_from_json(const json& j);

json to_json(const markov::Distribution& d);
markov::Distribution distribution_from_json(const json& j);

/// Header "n,k,p_num,p_den", one line per k.
void write_csv(std::ostream& out, const std::vector<markov::Distribution>& laws);
std::vector<markov::Distribution> distributions_from_csv(std::istream& in);

json to_json(const markov::RatioBounds& r);
markov::RatioBounds ratio_bounds_from_json(const json& j);

json to_json(const std::vector<markov::PhaseCell>& cells);
std::vector<markov::PhaseCell> phase_scan_from_json(const json& j);
/// Header "q_num,q_den,n,lower_num,lower_den,upper_num,upper_den,exact".
void write_csv(std::ostream& out, const std::vector<markov::PhaseCell>& cells);

json to_json(const martingale::MartingaleReport& r);
martingale::MartingaleReport martingale_report_from_json(const json& j);

json to_json(const martingale::MeanZeroCertificate& c);

json to_json(const montecarlo::RatioEstimate& r);
montecarlo::RatioEstimate ratio_estimate_from_json(const json& j);

json to_json(const montecarlo::BoundReport& r);
montecarlo::BoundReport bound_report_from_json(const json& j);
/// Per-n quantiles: header "n,level,x,deficit".
void write_csv(std::ostream& out, const montecarlo::BoundReport& r);

/// Header "trajectory,t,x".
void write_trajectories_csv(std::ostream& out, const std::vector<montecarlo::TrajectorySample>& paths);

}  // namespace hopfchain::serialize
