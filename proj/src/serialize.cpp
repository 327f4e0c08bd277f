#include "hopfchain/serialize.hpp"

#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "hopfchain/error.hpp"

namespace hopfchain::serialize {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ParseError("malformed document: " + what, 0);
}

std::int64_t int_field(const json& j, const char* key) {
  require(j.contains(key) && j.at(key).is_number_integer(), std::string("integer field '") + key + "'");
  return j.at(key).get<std::int64_t>();
}

}  // namespace

json big_to_json(const BigInt& v) {
  if (v.fits_slong_p()) return json(static_cast<std::int64_t>(v.get_si()));
  return json(v.get_str());
}

BigInt big_from_json(const json& j) {
  if (j.is_number_unsigned()) return BigInt(std::to_string(j.get<std::uint64_t>()));
  if (j.is_number_integer()) return BigInt(std::to_string(j.get<std::int64_t>()));
  require(j.is_string(), "integer or decimal string expected");
  BigInt out;
  require(out.set_str(j.get<std::string>(), 10) == 0, "bad integer string '" + j.get<std::string>() + "'");
  return out;
}

json rational_to_json(const Rational& r) { return json::array({big_to_json(r.get_num()), big_to_json(r.get_den())}); }

Rational rational_from_json(const json& j) {
  if (j.is_string()) return qcalc::parse_rational(j.get<std::string>());
  require(j.is_array() && j.size() == 2, "rational must be [num, den]");
  const BigInt den = big_from_json(j[1]);
  require(den != 0, "zero denominator");
  Rational r(big_from_json(j[0]), den);
  r.canonicalize();
  return r;
}

json to_json(const qcalc::LaurentPoly& p) {
  json out = json::array();
  for (const auto& [e, c] : p.terms()) {
    out.push_back(json::array({e, big_to_json(c.get_num()), big_to_json(c.get_den())}));
  }
  return out;
}

qcalc::LaurentPoly laurent_from_json(const json& j) {
  require(j.is_array(), "coefficient list");
  qcalc::LaurentPoly p;
  for (const json& term : j) {
    require(term.is_array() && term.size() == 3 && term[0].is_number_integer(), "term [exponent, num, den]");
    p.add_term(term[0].get<qcalc::Exponent>(), rational_from_json(json::array({term[1], term[2]})));
  }
  return p;
}

json to_json(const hopf::AlgebraElement& x) {
  json out = json::array();
  for (const auto& [m, c] : x.terms()) out.push_back({{"e", m.e_pow}, {"k", m.k_pow}, {"coeff", to_json(c)}});
  return out;
}

hopf::AlgebraElement algebra_from_json(const json& j) {
  require(j.is_array(), "element must be a list");
  hopf::AlgebraElement x;
  for (const json& t : j) x.add({int_field(t, "e"), int_field(t, "k")}, laurent_from_json(t.at("coeff")));
  return x;
}

json to_json(const hopf::TensorElement& t) {
  json out = json::array();
  for (const auto& [key, c] : t.terms()) {
    out.push_back({{"left", hopf::to_string(key.first)}, {"right", hopf::to_string(key.second)}, {"coeff", to_json(c)}});
  }
  return out;
}

hopf::TensorElement tensor_from_json(const json& j) {
  require(j.is_array(), "tensor must be a list");
  hopf::TensorElement t;
  for (const json& term : j) {
    t.add(hopf::parse_monomial(term.at("left").get<std::string>()), hopf::parse_monomial(term.at("right").get<std::string>()),
          laurent_from_json(term.at("coeff")));
  }
  return t;
}

json to_json(const hopf::AxiomReport& r) {
  json results = json::array();
  for (const auto& a : r.results) {
    results.push_back(
        {{"axiom", a.axiom}, {"passed", a.passed}, {"cases_checked", a.cases_checked}, {"counterexample", a.counterexample}});
  }
  return {{"max_i", r.max_i}, {"max_abs_l", r.max_abs_l}, {"all_passed", r.all_passed()}, {"results", results}};
}

hopf::AxiomReport axiom_report_from_json(const json& j) {
  hopf::AxiomReport r;
  r.max_i = int_field(j, "max_i");
  r.max_abs_l = int_field(j, "max_abs_l");
  for (const json& a : j.at("results")) {
    r.results.push_back({a.at("axiom").get<std::string>(), a.at("passed").get<bool>(), a.at("cases_checked").get<std::size_t>(),
                         a.at("counterexample").get<std::string>()});
  }
  return r;
}

json to_json(const chain::ChainSpec& spec) {
  json rows = json::array();
  for (const auto& row : spec.rows) {
    json moves = json::array();
    for (const auto& mv : row.moves) moves.push_back({{"target", mv.target}, {"p", rational_to_json(mv.probability)}});
    rows.push_back({{"state", row.state}, {"moves", moves}});
  }
  return {{"grading", spec.grading}, {"q", rational_to_json(spec.q)}, {"rows", rows}};
}

chain::ChainSpec chain_spec_from_json(const json& j) {
  chain::ChainSpec spec;
  spec.grading = int_field(j, "grading");
  spec.q = rational_from_json(j.at("q"));
  for (const json& row : j.at("rows")) {
    chain::ChainRow r{int_field(row, "state"), {}};
    for (const json& mv : row.at("moves")) r.moves.push_back({int_field(mv, "target"), rational_from_json(mv.at("p"))});
    spec.rows.push_back(std::move(r));
  }
  return spec;
}

json to_json(const markov::Distribution& d) {
  json mass = json::array();
  for (const auto& p : d.mass) mass.push_back(rational_to_json(p));
  return {{"n", d.time}, {"mass", mass}};
}

markov::Distribution distribution_from_json(const json& j) {
  markov::Distribution d;
  d.time = int_field(j, "n");
  for (const json& p : j.at("mass")) d.mass.push_back(rational_from_json(p));
  return d;
}

void write_csv(std::ostream& out, const std::vector<markov::Distribution>& laws) {
  out << "n,k,p_num,p_den\n";
  for (const auto& d : laws) {
    for (std::size_t k = 0; k < d.mass.size(); ++k) {
      out << d.time << ',' << k << ',' << d.mass[k].get_num().get_str() << ',' << d.mass[k].get_den().get_str() << '\n';
    }
  }
}

std::vector<markov::Distribution> distributions_from_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == "n,k,p_num,p_den", "csv header n,k,p_num,p_den");
  std::vector<markov::Distribution> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    require(f.size() == 4, "csv row '" + line + "'");
    const auto n = std::stoll(f[0]);
    const auto k = std::stoull(f[1]);
    if (out.empty() || out.back().time != n) out.push_back({n, {}});
    require(out.back().mass.size() == k, "csv rows out of order at '" + line + "'");
    out.back().mass.push_back(qcalc::parse_rational(f[2] + "/" + f[3]));
  }
  return out;
}

json to_json(const markov::RatioBounds& r) {
  return {{"lower", rational_to_json(r.lower)}, {"upper", rational_to_json(r.upper)}, {"exact", r.exact}};
}

markov::RatioBounds ratio_bounds_from_json(const json& j) {
  return {rational_from_json(j.at("lower")), rational_from_json(j.at("upper")), j.at("exact").get<bool>()};
}

json to_json(const std::vector<markov::PhaseCell>& cells) {
  json out = json::array();
  for (const auto& c : cells) out.push_back({{"q", rational_to_json(c.q)}, {"n", c.n}, {"ratio", to_json(c.ratio)}});
  return out;
}

std::vector<markov::PhaseCell> phase_scan_from_json(const json& j) {
  std::vector<markov::PhaseCell> out;
  for (const json& c : j) out.push_back({rational_from_json(c.at("q")), int_field(c, "n"), ratio_bounds_from_json(c.at("ratio"))});
  return out;
}

void write_csv(std::ostream& out, const std::vector<markov::PhaseCell>& cells) {
  out << "q_num,q_den,n,lower_num,lower_den,upper_num,upper_den,exact\n";
  for (const auto& c : cells) {
    out << c.q.get_num().get_str() << ',' << c.q.get_den().get_str() << ',' << c.n << ','
        << c.ratio.lower.get_num().get_str() << ',' << c.ratio.lower.get_den().get_str() << ','
        << c.ratio.upper.get_num().get_str() << ',' << c.ratio.upper.get_den().get_str() << ','
        << (c.ratio.exact ? 1 : 0) << '\n';
  }
}

json to_json(const martingale::MartingaleReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps) steps.push_back({{"state", s.state}, {"residual", rational_to_json(s.residual)}});
  return {{"alpha", r.alpha},
          {"n", r.time},
          {"max_state", r.max_state},
          {"max_residual", rational_to_json(r.max_residual)},
          {"verified", r.verified()},
          {"steps", steps}};
}

martingale::MartingaleReport martingale_report_from_json(const json& j) {
  martingale::MartingaleReport r;
  r.alpha = j.at("alpha").get<std::string>();
  r.time = int_field(j, "n");
  r.max_state = int_field(j, "max_state");
  r.max_residual = rational_from_json(j.at("max_residual"));
  for (const json& s : j.at("steps")) r.steps.push_back({int_field(s, "state"), rational_from_json(s.at("residual"))});
  return r;
}

json to_json(const martingale::MeanZeroCertificate& c) {
  std::vector<markov::State> uncertified;
  for (std::size_t n = 0; n < c.certified.size(); ++n) {
    if (!c.certified[n]) uncertified.push_back(static_cast<markov::State>(n));
  }
  return {{"q", rational_to_json(c.q)},     {"max_n", c.max_n},
          {"height_bits", c.height_bits},   {"primes_used", c.primes_used},
          {"prime_bits", c.prime_bits},     {"all_certified", c.all_certified()},
          {"uncertified_n", uncertified}};
}

json to_json(const montecarlo::RatioEstimate& r) {
  return {{"n", r.n}, {"num_traj", r.num_traj}, {"mean", r.mean}, {"std_error", r.std_error}};
}

montecarlo::RatioEstimate ratio_estimate_from_json(const json& j) {
  return {int_field(j, "n"), j.at("num_traj").get<std::uint64_t>(), j.at("mean").get<double>(), j.at("std_error").get<double>()};
}

json to_json(const montecarlo::BoundReport& r) {
  json levels = json::array();
  for (const auto& l : montecarlo::report_levels()) levels.push_back(rational_to_json(l));
  json grid = json::array();
  for (const auto& g : r.grid) grid.push_back({{"n", g.n}, {"x_quantiles", g.x_quantiles}, {"deficit_quantiles", g.deficit_quantiles}});
  json bounds = json::array();
  for (const auto& b : r.bounds) {
    bounds.push_back(
        {{"name", b.name}, {"value", b.value}, {"violations", b.violations}, {"total_violations", b.total_violations}});
  }
  json out = {{"q", rational_to_json(r.q)}, {"horizon", r.horizon}, {"num_traj", r.num_traj},
              {"master_seed", r.master_seed}, {"levels", levels}, {"grid", grid}, {"bounds", bounds}};
  if (r.fitted_log_constant) out["fitted_log_constant"] = *r.fitted_log_constant;
  if (r.fitted_deficit) out["fitted_deficit"] = *r.fitted_deficit;
  if (r.deficit_p99_spread) out["deficit_p99_spread"] = *r.deficit_p99_spread;
  return out;
}

montecarlo::BoundReport bound_report_from_json(const json& j) {
  montecarlo::BoundReport r;
  r.q = rational_from_json(j.at("q"));
  r.horizon = int_field(j, "horizon");
  r.num_traj = j.at("num_traj").get<std::uint64_t>();
  r.master_seed = j.at("master_seed").get<std::uint64_t>();
  for (const json& g : j.at("grid")) {
    r.grid.push_back({int_field(g, "n"), g.at("x_quantiles").get<std::vector<markov::State>>(),
                      g.at("deficit_quantiles").get<std::vector<markov::State>>()});
  }
  for (const json& b : j.at("bounds")) {
    r.bounds.push_back({b.at("name").get<std::string>(), b.at("value").get<std::vector<double>>(),
                        b.at("violations").get<std::vector<std::uint64_t>>(), b.at("total_violations").get<std::uint64_t>()});
  }
  if (j.contains("fitted_log_constant")) r.fitted_log_constant = j.at("fitted_log_constant").get<double>();
  if (j.contains("fitted_deficit")) r.fitted_deficit = j.at("fitted_deficit").get<markov::State>();
  if (j.contains("deficit_p99_spread")) r.deficit_p99_spread = j.at("deficit_p99_spread").get<markov::State>();
  return r;
}

void write_csv(std::ostream& out, const montecarlo::BoundReport& r) {
  const auto& levels = montecarlo::report_levels();
  out << "n,level,x,deficit\n";
  for (const auto& g : r.grid) {
    for (std::size_t i = 0; i < levels.size(); ++i) {
      out << g.n << ',' << qcalc::to_string(levels[i]) << ',' << g.x_quantiles[i] << ',' << g.deficit_quantiles[i] << '\n';
    }
  }
}

void write_trajectories_csv(std::ostream& out, const std::vector<montecarlo::TrajectorySample>& paths) {
  out << "trajectory,t,x\n";
  for (const auto& p : paths) {
    for (std::size_t t = 0; t < p.path.size(); ++t) out << p.index << ',' << t << ',' << p.path[t] << '\n';
  }
}

}  // namespace hopfchain::serialize
