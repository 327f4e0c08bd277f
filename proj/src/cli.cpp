#include "hopfchain/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "hopfchain/chain_extract.hpp"
#include "hopfchain/error.hpp"
#include "hopfchain/hopf.hpp"
#include "hopfchain/markov.hpp"
#include "hopfchain/martingale.hpp"
#include "hopfchain/montecarlo.hpp"
#include "hopfchain/parallel.hpp"
#include "hopfchain/serialize.hpp"

namespace hopfchain::cli {

using markov::State;
using qcalc::Rational;
using serialize::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Rational parse_q(const std::string& flag, const std::string& text, bool positive = true) {
  Rational r;
  try {
    r = qcalc::parse_rational(trim(text));
  } catch (const ParseError& e) {
    throw UsageError(flag + ": " + e.what());
  }
  if (positive && r <= 0) throw UsageError(flag + ": q must be positive, got " + text);
  return r;
}

std::vector<State> parse_states(const std::string& flag, const std::string& text, State min_value) {
  std::vector<State> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    State v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw UsageError(flag + ": '" + item + "' is not an integer");
    if (v < min_value) throw UsageError(flag + ": values must be >= " + std::to_string(min_value));
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + ": expected a comma-separated list of integers");
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

struct Output {
  std::string path;
  std::string format = "json";
};

void add_output_flags(CLI::App* cmd, Output& o, bool csv = true) {
  cmd->add_option("-o,--output", o.path, "write the result to this file instead of stdout")->take_last();
  auto* f = cmd->add_option("--format", o.format, "json or csv")->take_last();
  f->check(CLI::IsMember(csv ? std::vector<std::string>{"json", "csv"} : std::vector<std::string>{"json"}));
}

/// Writes the document to --output (and the summary to stdout) or, without
/// --output, the document to stdout (and the summary to stderr).
void emit(const Output& o, std::ostream& out, std::ostream& err, const std::function<void(std::ostream&)>& write,
          const std::string& summary = "") {
  if (o.path.empty()) {
    write(out);
    if (!summary.empty()) err << summary << '\n';
    return;
  }
  std::ofstream file(o.path, std::ios::binary);
  if (!file) throw IoError("cannot open '" + o.path + "' for writing");
  write(file);
  file.flush();
  if (!file) throw IoError("failed while writing '" + o.path + "'");
  if (!summary.empty()) out << summary << '\n';
}

std::function<void(std::ostream&)> json_writer(const json& doc) {
  return [doc](std::ostream& s) { s << doc.dump(2) << '\n'; };
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::setprecision(digits) << std::fixed << v;
  return s.str();
}

std::size_t resolve_workers(std::size_t requested) {
  const std::size_t cap = default_worker_count();
  return requested == 0 ? cap : std::min(requested, cap);
}

// ---------------------------------------------------------------- hopf

struct HopfArgs {
  std::string action;
  std::string expr;
  std::int64_t max_i = 3;
  std::int64_t max_l = 2;
  Output out;
};

void element_csv(std::ostream& s, const hopf::AlgebraElement& x) {
  s << "e,k,exponent,num,den\n";
  for (const auto& [m, c] : x.terms()) {
    for (const auto& [e, r] : c.terms()) {
      s << m.e_pow << ',' << m.k_pow << ',' << e << ',' << r.get_num().get_str() << ',' << r.get_den().get_str() << '\n';
    }
  }
}

int cmd_hopf(const HopfArgs& a, std::ostream& out, std::ostream& err) {
  if (a.action == "verify") {
    require(a.max_i >= 0, "--max-i: must be >= 0");
    require(a.max_l >= 0, "--max-l: must be >= 0");
    const hopf::AxiomReport report = hopf::verify_axioms(a.max_i, a.max_l);
    if (a.out.format == "csv") {
      emit(a.out, out, err, [&](std::ostream& s) {
        s << "axiom,passed,cases_checked\n";
        for (const auto& r : report.results) s << r.axiom << ',' << (r.passed ? 1 : 0) << ',' << r.cases_checked << '\n';
      });
    } else {
      emit(a.out, out, err, json_writer(serialize::to_json(report)));
    }
    for (const auto& r : report.results) {
      if (!r.passed) err << "axiom failed: " << r.axiom << ": " << r.counterexample << '\n';
    }
    return report.all_passed() ? kOk : kCheckFailed;
  }

  require(!a.expr.empty(), "expr: a monomial such as \"E^1 K^0\" is required for '" + a.action + "'");
  hopf::Monomial m;
  try {
    m = hopf::parse_monomial(a.expr);
  } catch (const ParseError& e) {
    throw UsageError(std::string("expr: ") + e.what());
  }
  json doc = {{"action", a.action}, {"input", hopf::to_string(m)}};
  if (a.action == "coproduct") {
    const hopf::TensorElement t = hopf::coproduct(m);
    doc["text"] = hopf::to_string(t);
    doc["result"] = serialize::to_json(t);
    if (a.out.format == "csv") {
      emit(a.out, out, err, [&](std::ostream& s) {
        s << "left,right,exponent,num,den\n";
        for (const auto& [key, c] : t.terms()) {
          for (const auto& [e, r] : c.terms()) {
            s << hopf::to_string(key.first) << ',' << hopf::to_string(key.second) << ',' << e << ','
              << r.get_num().get_str() << ',' << r.get_den().get_str() << '\n';
          }
        }
      });
      return kOk;
    }
    emit(a.out, out, err, json_writer(doc));
    return kOk;
  }
  const hopf::AlgebraElement x = a.action == "square" ? hopf::hopf_square(m) : hopf::antipode(m);
  doc["text"] = hopf::to_string(x);
  doc["result"] = serialize::to_json(x);
  if (a.out.format == "csv") {
    emit(a.out, out, err, [&](std::ostream& s) { element_csv(s, x); });
  } else {
    emit(a.out, out, err, json_writer(doc));
  }
  return kOk;
}

// ---------------------------------------------------------------- chain

struct ChainArgs {
  std::int64_t grading = 1;
  std::string q;
  std::int64_t max_state = 10;
  Output out;
};

int cmd_chain(const ChainArgs& a, std::ostream& out, std::ostream& err) {
  const Rational q0 = parse_q("--q", a.q);
  require(a.grading >= 1, "--grading: must be >= 1");
  require(a.max_state >= 0, "--max-state: must be >= 0");
  const chain::ChainSpec spec = chain::build_chain_spec(a.grading, q0, a.max_state);
  if (a.out.format == "csv") {
    emit(a.out, out, err, [&](std::ostream& s) {
      s << "state,target,p_num,p_den\n";
      for (const auto& row : spec.rows) {
        for (const auto& mv : row.moves) {
          s << row.state << ',' << mv.target << ',' << mv.probability.get_num().get_str() << ','
            << mv.probability.get_den().get_str() << '\n';
        }
      }
    });
  } else {
    emit(a.out, out, err, json_writer(serialize::to_json(spec)));
  }
  return kOk;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string q;
  State n = 10;
  std::string method = "dp";
  bool crosscheck = false;
  bool history = false;
  State target = 1;
  std::string q_list;
  std::string n_list;
  std::string alpha_table;
  State max_state = 100;
  State mean_zero = -1;
  std::size_t workers = 0;
  Output out;
};

int cmd_dist(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const Rational q0 = parse_q("--q", a.q);
  require(a.n >= 0, "--n: must be >= 0");
  require(!(a.history && a.method == "formula"), "--history: only available with --method dp");
  const markov::AlphaLaw law = markov::AlphaLaw::geometric(q0);

  std::vector<markov::Distribution> laws;
  if (a.history) {
    laws = markov::distribution_dp_history(law, a.n);
  } else if (a.method == "dp") {
    laws.push_back(markov::distribution_dp(law, a.n));
  }
  if (a.method == "formula" || a.crosscheck) {
    markov::Distribution f{a.n, {}};
    for (State k = 0; k <= a.n; ++k) f.mass.push_back(markov::distribution_formula(q0, a.n, k));
    if (a.method == "formula") laws.push_back(f);
    if (a.crosscheck) {
      const markov::Distribution dp = a.method == "dp" ? laws.back() : markov::distribution_dp(law, a.n);
      for (State k = 0; k <= a.n; ++k) {
        if (dp.mass[static_cast<std::size_t>(k)] != f.mass[static_cast<std::size_t>(k)]) {
          err << "crosscheck failed at (n,k) = (" << a.n << ',' << k << "): dp "
              << qcalc::to_string(dp.mass[static_cast<std::size_t>(k)]) << " vs formula "
              << qcalc::to_string(f.mass[static_cast<std::size_t>(k)]) << '\n';
          return kCheckFailed;
        }
      }
    }
  }

  const markov::Distribution& last = laws.back();
  if (a.out.format == "csv") {
    emit(a.out, out, err, [&](std::ostream& s) { serialize::write_csv(s, laws); },
         a.crosscheck ? "crosscheck: pass" : "");
    return kOk;
  }
  json doc = {{"q", serialize::rational_to_json(q0)},
              {"n", a.n},
              {"method", a.method},
              {"expected_value", serialize::rational_to_json(markov::expected_value(last))}};
  if (a.crosscheck) doc["crosscheck"] = "pass";
  if (a.history) {
    doc["history"] = json::array();
    for (const auto& d : laws) doc["history"].push_back(serialize::to_json(d));
  } else {
    doc["distribution"] = serialize::to_json(last);
  }
  emit(a.out, out, err, json_writer(doc), a.crosscheck ? "crosscheck: pass" : "");
  return kOk;
}

int cmd_hit(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const Rational q0 = parse_q("--q", a.q);
  require(a.target >= 0, "--N: must be >= 0");
  const markov::AlphaLaw law = markov::AlphaLaw::geometric(q0);
  const Rational closed = markov::hitting_time_closed(q0, a.target);
  const Rational sum = markov::hitting_time_general(law, a.target);
  const Rational matrix = markov::hitting_time_matrix(law, a.target);
  const bool agree = closed == sum && sum == matrix;
  json doc = {{"q", serialize::rational_to_json(q0)},
              {"N", a.target},
              {"hitting_time", qcalc::to_string(closed)},
              {"closed_form", serialize::rational_to_json(closed)},
              {"sum", serialize::rational_to_json(sum)},
              {"fundamental_matrix", serialize::rational_to_json(matrix)},
              {"agree", agree}};
  if (a.out.format == "csv") {
    emit(a.out, out, err, [&](std::ostream& s) {
      s << "q_num,q_den,N,t_num,t_den,agree\n"
        << q0.get_num().get_str() << ',' << q0.get_den().get_str() << ',' << a.target << ','
        << closed.get_num().get_str() << ',' << closed.get_den().get_str() << ',' << (agree ? 1 : 0) << '\n';
    });
  } else {
    emit(a.out, out, err, json_writer(doc));
  }
  if (!agree) err << "hitting-time methods disagree\n";
  return agree ? kOk : kCheckFailed;
}

int cmd_phase(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  require(!a.q_list.empty(), "--q-list: required");
  require(!a.n_list.empty(), "--n-list: required");
  std::vector<Rational> qs;
  for (const auto& item : split_list(a.q_list)) qs.push_back(parse_q("--q-list", item));
  const std::vector<State> ns = parse_states("--n-list", a.n_list, 1);
  const auto cells = markov::phase_scan(qs, ns, resolve_workers(a.workers));
  if (a.out.format == "csv") {
    emit(a.out, out, err, [&](std::ostream& s) { serialize::write_csv(s, cells); });
  } else {
    emit(a.out, out, err, json_writer(json{{"cells", serialize::to_json(cells)}}));
  }
  return kOk;
}

int cmd_martingale(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  require(a.q.empty() != a.alpha_table.empty(), "give exactly one of --q and --alpha-table");
  require(a.max_state >= 0, "--max-state: must be >= 0");
  require(a.n >= 1, "--n: must be >= 1");
  std::optional<markov::AlphaLaw> law;
  if (!a.q.empty()) {
    law = markov::AlphaLaw::geometric(parse_q("--q", a.q));
  } else {
    std::vector<Rational> values;
    for (const auto& item : split_list(a.alpha_table)) values.push_back(parse_q("--alpha-table", item, false));
    require(!values.empty(), "--alpha-table: expected a comma-separated list of rationals");
    require(a.max_state < static_cast<State>(values.size()),
            "--max-state: must be below the --alpha-table length " + std::to_string(values.size()));
    law = markov::AlphaLaw::table(std::move(values));
  }
  const martingale::MartingaleReport report = martingale::verify_one_step(*law, a.max_state, a.n);
  bool ok = report.verified();
  json doc = {{"one_step", serialize::to_json(report)}};
  if (a.mean_zero >= 0) {
    require(!a.q.empty(), "--mean-zero: only available with --q");
    const auto cert = martingale::certify_mean_zero(parse_q("--q", a.q), a.mean_zero, resolve_workers(a.workers));
    doc["mean_zero"] = serialize::to_json(cert);
    ok = ok && cert.all_certified();
  }
  if (a.out.format == "csv") {
    emit(a.out, out, err, [&](std::ostream& s) {
      s << "state,residual_num,residual_den\n";
      for (const auto& st : report.steps) {
        s << st.state << ',' << st.residual.get_num().get_str() << ',' << st.residual.get_den().get_str() << '\n';
      }
    });
  } else {
    emit(a.out, out, err, json_writer(doc));
  }
  if (!report.verified()) err << "nonzero residual at state " << report.first_failure() << '\n';
  return ok ? kOk : kCheckFailed;
}

int cmd_variance(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
  const Rational q0 = parse_q("--q", a.q);
  require(a.n >= 1, "--n: must be >= 1");
  const std::vector<Rational> ledger = martingale::variance_ledger(q0, a.n);
  json rows = json::array();
  Rational partial = 0;
  bool ok = true;
  std::vector<std::pair<Rational, Rational>> table;
  for (State m = 1; m <= a.n; ++m) {
    partial += ledger[static_cast<std::size_t>(m - 1)];
    const Rational direct = martingale::second_moment(q0, m);
    const bool equal = direct == partial;
    ok = ok && equal;
    if (!equal) err << "variance mismatch at n = " << m << '\n';
    rows.push_back({{"n", m},
                    {"ledger", serialize::rational_to_json(partial)},
                    {"second_moment", serialize::rational_to_json(direct)},
                    {"equal", equal}});
    table.emplace_back(partial, direct);
  }
  if (a.out.format == "csv") {
    emit(a.out, out, err, [&](std::ostream& s) {
      s << "n,ledger_num,ledger_den,second_moment_num,second_moment_den\n";
      for (std::size_t i = 0; i < table.size(); ++i) {
        s << i + 1 << ',' << table[i].first.get_num().get_str() << ',' << table[i].first.get_den().get_str() << ','
          << table[i].second.get_num().get_str() << ',' << table[i].second.get_den().get_str() << '\n';
      }
    });
  } else {
    emit(a.out, out, err, json_writer(json{{"q", serialize::rational_to_json(q0)}, {"rows", rows}}));
  }
  return ok ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------- simulate / bounds

struct SimArgs {
  std::string q;
  std::string n;
  std::int64_t grading = 1;
  std::uint64_t traj = 1000;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string paths;
  std::uint64_t paths_count = 10;
  Output out;
};

montecarlo::TransitionSampler make_sampler(std::int64_t grading, const Rational& q0) {
  if (grading == 1) return montecarlo::TransitionSampler::from_alpha(markov::AlphaLaw::geometric(q0));
  return montecarlo::TransitionSampler::from_chain(grading, q0);
}

void export_paths(const SimArgs& a, montecarlo::TransitionSampler& sampler, State horizon) {
  if (a.paths.empty()) return;
  std::vector<montecarlo::TrajectorySample> paths;
  for (std::uint64_t t = 0; t < std::min(a.paths_count, a.traj); ++t) {
    paths.push_back(montecarlo::sample_trajectory(sampler, horizon, a.seed, t));
  }
  std::ofstream file(a.paths, std::ios::binary);
  if (!file) throw IoError("cannot open '" + a.paths + "' for writing");
  serialize::write_trajectories_csv(file, paths);
  file.flush();
  if (!file) throw IoError("failed while writing '" + a.paths + "'");
}

int cmd_simulate(const SimArgs& a, std::ostream& out, std::ostream& err) {
  const Rational q0 = parse_q("--q", a.q);
  require(a.grading >= 1, "--grading: must be >= 1");
  require(a.traj >= 1, "--traj: must be >= 1");
  const std::vector<State> ns = parse_states("--n", a.n, 1);
  require(ns.size() == 1, "--n: simulate takes a single horizon");
  auto sampler = make_sampler(a.grading, q0);
  const auto est = montecarlo::estimate_ratio(sampler, ns.front(), a.traj, a.seed, resolve_workers(a.workers));
  export_paths(a, sampler, ns.front());
  const std::string summary = "E[X_n]/n ~ " + fixed(est.mean) + " +/- " + fixed(est.std_error) + " (n=" +
                              std::to_string(est.n) + ", " + std::to_string(est.num_traj) + " trajectories, seed " +
                              std::to_string(a.seed) + ")";
  if (a.out.format == "csv") {
    emit(a.out, out, err, [&](std::ostream& s) {
      s << "q_num,q_den,grading,n,num_traj,seed,mean,std_error\n"
        << q0.get_num().get_str() << ',' << q0.get_den().get_str() << ',' << a.grading << ',' << est.n << ','
        << est.num_traj << ',' << a.seed << ',' << json(est.mean).dump() << ',' << json(est.std_error).dump() << '\n';
    }, summary);
  } else {
    const json doc = {{"q", serialize::rational_to_json(q0)},
                      {"grading", a.grading},
                      {"seed", a.seed},
                      {"generator", "philox4x32-10"},
                      {"estimate", serialize::to_json(est)}};
    emit(a.out, out, err, json_writer(doc), summary);
  }
  return kOk;
}

int cmd_bounds(const SimArgs& a, std::ostream& out, std::ostream& err) {
  const Rational q0 = parse_q("--q", a.q);
  require(q0 != 1, "--q: bounds needs q != 1");
  require(a.traj >= 1, "--traj: must be >= 1");
  const std::vector<State> ns = parse_states("--n", a.n, 1);
  const auto report = montecarlo::bound_experiment(q0, ns, a.traj, a.seed, resolve_workers(a.workers));
  if (!a.paths.empty()) {
    auto sampler = make_sampler(1, q0);
    export_paths(a, sampler, report.horizon);
  }
  std::string summary;
  if (report.fitted_log_constant) {
    summary = "fitted C = " + fixed(*report.fitted_log_constant, 4);
  } else {
    summary = "fitted D = " + std::to_string(report.fitted_deficit.value_or(0)) +
              ", p99 deficit spread = " + std::to_string(report.deficit_p99_spread.value_or(0));
  }
  for (const auto& b : report.bounds) summary += "; violations of " + b.name + ": " + std::to_string(b.total_violations);
  if (a.out.format == "csv") {
    emit(a.out, out, err, [&](std::ostream& s) { serialize::write_csv(s, report); }, summary);
  } else {
    emit(a.out, out, err, json_writer(serialize::to_json(report)), summary);
  }
  return kOk;
}

bool is_flag_token(const std::string& s) { return s.size() > 1 && s[0] == '-'; }

}  // namespace

ConfigFile read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  ConfigFile cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw UsageError(path + ":" + std::to_string(line_no) + ": empty key");
    if (key == "command") {
      std::istringstream words(value);
      for (std::string w; words >> w;) cfg.command.push_back(w);
    } else if (value == "true") {
      cfg.flags.push_back("--" + key);
    } else if (value != "false") {
      cfg.flags.push_back("--" + key);
      cfg.flags.push_back(value);
    }
  }
  return cfg;
}

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hopf-square Markov chains of the E,K sub-Hopf algebra of U_q(sl2)", "hopfchain"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand help for every command");
  std::string config_doc;
  app.add_option("--config", config_doc, "key = value file supplying flags; explicit flags win");

  HopfArgs hopf_args;
  auto* hopf = app.add_subcommand("hopf", "symbolic Hopf algebra operations");
  hopf->add_option("action", hopf_args.action, "square | coproduct | antipode | verify")
      ->required()
      ->check(CLI::IsMember({"square", "coproduct", "antipode", "verify"}));
  hopf->add_option("expr", hopf_args.expr, "monomial such as \"E^2 K^-1\"");
  hopf->add_option("--max-i", hopf_args.max_i, "verify: largest e_pow")->take_last();
  hopf->add_option("--max-l", hopf_args.max_l, "verify: largest |k_pow|")->take_last();
  add_output_flags(hopf, hopf_args.out);

  ChainArgs chain_args;
  auto* chain = app.add_subcommand("chain", "extract the Markov chain of one grading");
  chain->add_option("--grading", chain_args.grading, "grading i >= 1")->take_last();
  chain->add_option("--q", chain_args.q, "q as p/r")->required()->take_last();
  chain->add_option("--max-state", chain_args.max_state, "tabulate states 0..max")->take_last();
  add_output_flags(chain, chain_args.out);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "exact analysis of the grading-1 chain");
  analyze->require_subcommand(1);
  auto* dist = analyze->add_subcommand("dist", "law of X_n");
  dist->add_option("--q", an.q, "q as p/r")->required()->take_last();
  dist->add_option("--n", an.n, "horizon")->take_last();
  dist->add_option("--method", an.method, "dp or formula")->take_last()->check(CLI::IsMember({"dp", "formula"}));
  dist->add_flag("--crosscheck", an.crosscheck, "require the dp and formula laws to agree");
  dist->add_flag("--history", an.history, "emit the laws of X_0..X_n");
  add_output_flags(dist, an.out);
  auto* hit = analyze->add_subcommand("hit", "expected hitting time of state N");
  hit->add_option("--q", an.q, "q as p/r")->required()->take_last();
  hit->add_option("--N", an.target, "target state")->take_last();
  add_output_flags(hit, an.out);
  auto* phase = analyze->add_subcommand("phase", "E[X_n]/n over a (q, n) grid");
  phase->add_option("--q-list", an.q_list, "comma-separated q values")->take_last();
  phase->add_option("--n-list", an.n_list, "comma-separated horizons")->take_last();
  phase->add_option("--workers", an.workers, "worker threads (0 = HOPFCHAIN_THREADS or all cores)")->take_last();
  add_output_flags(phase, an.out);
  auto* mart = analyze->add_subcommand("martingale", "one-step martingale identity");
  mart->add_option("--q", an.q, "q as p/r")->take_last();
  mart->add_option("--alpha-table", an.alpha_table, "comma-separated alpha(0), alpha(1), ...")->take_last();
  mart->add_option("--max-state", an.max_state, "check states 0..max")->take_last();
  mart->add_option("--n", an.n, "time index of the step")->take_last();
  mart->add_option("--mean-zero", an.mean_zero, "also certify E[Y_m] = 0 for m <= this")->take_last();
  mart->add_option("--workers", an.workers, "worker threads")->take_last();
  add_output_flags(mart, an.out);
  auto* var = analyze->add_subcommand("variance", "Var(Y_n) two ways");
  var->add_option("--q", an.q, "q as p/r")->required()->take_last();
  var->add_option("--n", an.n, "largest horizon")->take_last();
  add_output_flags(var, an.out);

  SimArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of E[X_n]/n");
  SimArgs bound_args;
  bound_args.n = "1000,10000";
  auto* bounds = app.add_subcommand("bounds", "growth-bound experiment over an n grid");
  for (auto [cmd, sa] : {std::pair{simulate, &sim_args}, std::pair{bounds, &bound_args}}) {
    cmd->add_option("--q", sa->q, "q as p/r")->required()->take_last();
    cmd->add_option("--n", sa->n, cmd == simulate ? "horizon" : "comma-separated horizons")->take_last();
    cmd->add_option("--traj", sa->traj, "number of trajectories")->take_last();
    cmd->add_option("--seed", sa->seed, "master seed")->take_last();
    cmd->add_option("--workers", sa->workers, "worker threads (never changes results)")->take_last();
    cmd->add_option("--paths", sa->paths, "also write the first trajectories as CSV here")->take_last();
    cmd->add_option("--paths-count", sa->paths_count, "how many trajectories --paths exports")->take_last();
    add_output_flags(cmd, sa->out);
  }
  simulate->add_option("--grading", sim_args.grading, "grading i >= 1")->take_last();
  sim_args.n = "1000";

  try {
    // Splice config flags in front of the explicit ones so the latter win.
    std::vector<std::string> args;
    std::vector<std::string> rest;
    std::optional<std::string> config_path;
    for (std::size_t i = 0; i < args_in.size(); ++i) {
      if (args_in[i] == "--config") {
        if (i + 1 >= args_in.size()) throw UsageError("--config: missing file name");
        config_path = args_in[++i];
      } else if (args_in[i].rfind("--config=", 0) == 0) {
        config_path = args_in[i].substr(9);
      } else {
        rest.push_back(args_in[i]);
      }
    }
    if (config_path) {
      const ConfigFile cfg = read_config(*config_path);
      std::size_t split = 0;
      while (split < rest.size() && !is_flag_token(rest[split])) ++split;
      args.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(split));
      if (args.empty()) args = cfg.command;
      args.insert(args.end(), cfg.flags.begin(), cfg.flags.end());
      args.insert(args.end(), rest.begin() + static_cast<std::ptrdiff_t>(split), rest.end());
    } else {
      args = rest;
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);

    if (hopf->parsed()) return cmd_hopf(hopf_args, out, err);
    if (chain->parsed()) return cmd_chain(chain_args, out, err);
    if (dist->parsed()) return cmd_dist(an, out, err);
    if (hit->parsed()) return cmd_hit(an, out, err);
    if (phase->parsed()) return cmd_phase(an, out, err);
    if (mart->parsed()) return cmd_martingale(an, out, err);
    if (var->parsed()) return cmd_variance(an, out, err);
    if (simulate->parsed()) return cmd_simulate(sim_args, out, err);
    if (bounds->parsed()) return cmd_bounds(bound_args, out, err);
    err << app.help();
    return kUsage;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NonPositiveCoefficient& e) {
    err << "error: positivity gate failed: " << e.what() << '\n';
    return kCheckFailed;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace hopfchain::cli
