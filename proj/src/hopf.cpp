#include "hopfchain/hopf.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>

#include "hopfchain/error.hpp"

namespace hopfchain::hopf {

using qcalc::q_binomial;

std::string to_string(const Monomial& m) {
  return "E^" + std::to_string(m.e_pow) + " K^" + std::to_string(m.k_pow);
}

namespace {

class MonomialParser {
 public:
  explicit MonomialParser(std::string_view text) : text_(text) {}

  Monomial parse() {
    Monomial m;
    bool seen_e = false, seen_k = false, seen_any = false;
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '1') {
      ++pos_;
      skip_space();
      if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
      return m;
    }
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == 'E' && !seen_e && !seen_k) {
        ++pos_;
        m.e_pow = parse_exponent(false);
        seen_e = true;
      } else if (c == 'K' && !seen_k) {
        ++pos_;
        m.k_pow = parse_exponent(true);
        seen_k = true;
      } else {
        throw ParseError(std::string("unexpected character '") + c + "' (expected \"E^i K^l\")", pos_);
      }
      seen_any = true;
      skip_space();
    }
    if (!seen_any) throw ParseError("empty monomial", pos_);
    return m;
  }

 private:
  std::int64_t parse_exponent(bool allow_negative) {
    if (pos_ >= text_.size() || text_[pos_] != '^') return 1;
    ++pos_;
    const std::size_t start = pos_;
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      if (negative && !allow_negative) throw ParseError("the power of E must be nonnegative", pos_);
      ++pos_;
    }
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      throw ParseError("expected an integer exponent", pos_);
    }
    std::int64_t value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + (text_[pos_] - '0');
      if (value > (std::int64_t{1} << 40)) throw ParseError("exponent too large", start);
      ++pos_;
    }
    return negative ? -value : value;
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '*')) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string coefficient_prefix(const LaurentPoly& c) {
  if (c == LaurentPoly(1)) return "";
  if (c == LaurentPoly(-1)) return "-";
  if (c.terms().size() == 1) return qcalc::to_string(c) + "*";
  return "(" + qcalc::to_string(c) + ")*";
}

std::string pretty(const Monomial& m) {
  if (m.e_pow == 0 && m.k_pow == 0) return "1";
  std::string out;
  if (m.e_pow > 0) out += m.e_pow == 1 ? "E" : "E^" + std::to_string(m.e_pow);
  if (m.k_pow != 0) out += m.k_pow == 1 ? "K" : "K^" + std::to_string(m.k_pow);
  return out;
}

}  // namespace

Monomial parse_monomial(std::string_view text) { return MonomialParser(text).parse(); }

void AlgebraElement::add(const Monomial& m, const LaurentPoly& c) {
  if (m.e_pow < 0) throw std::invalid_argument("monomial with negative power of E");
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (inserted) return;
  it->second += c;
  if (it->second.is_zero()) terms_.erase(it);
}

LaurentPoly AlgebraElement::coefficient(const Monomial& m) const {
  const auto it = terms_.find(m);
  return it == terms_.end() ? LaurentPoly() : it->second;
}

std::optional<std::int64_t> AlgebraElement::homogeneous_grading() const {
  if (terms_.empty()) return std::nullopt;
  const std::int64_t i = terms_.begin()->first.e_pow;
  for (const auto& [m, c] : terms_) {
    if (m.e_pow != i) return std::nullopt;
  }
  return i;
}

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& other) {
  for (const auto& [m, c] : other.terms_) add(m, c);
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& other) {
  for (const auto& [m, c] : other.terms_) add(m, -c);
  return *this;
}

AlgebraElement AlgebraElement::scaled(const LaurentPoly& c) const {
  AlgebraElement out;
  for (const auto& [m, coeff] : terms_) out.add(m, coeff * c);
  return out;
}

std::string to_string(const AlgebraElement& x) {
  if (x.is_zero()) return "0";
  std::string out;
  // Highest K power first, matching how the formulas are usually written.
  for (auto it = x.terms().rbegin(); it != x.terms().rend(); ++it) {
    if (!out.empty()) out += " + ";
    out += coefficient_prefix(it->second) + pretty(it->first);
  }
  return out;
}

void TensorElement::add(const Monomial& left, const Monomial& right, const LaurentPoly& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(Key{left, right}, c);
  if (inserted) return;
  it->second += c;
  if (it->second.is_zero()) terms_.erase(it);
}

TensorElement& TensorElement::operator+=(const TensorElement& other) {
  for (const auto& [key, c] : other.terms_) add(key.first, key.second, c);
  return *this;
}

std::string to_string(const TensorElement& t) {
  if (t.is_zero()) return "0";
  std::string out;
  for (const auto& [key, c] : t.terms()) {
    if (!out.empty()) out += " + ";
    out += coefficient_prefix(c) + pretty(key.first) + "⊗" + pretty(key.second);
  }
  return out;
}

void Tensor3Element::add(const Key& key, const LaurentPoly& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(key, c);
  if (inserted) return;
  it->second += c;
  if (it->second.is_zero()) terms_.erase(it);
}

AlgebraElement normal_order(const std::vector<Generator>& word, const LaurentPoly& scalar) {
  // Scanning left to right keeps the prefix in the form E^e K^k; appending E
  // moves it past the k copies of K, each contributing q^2 (q^-2 for K^-1).
  Monomial m;
  qcalc::Exponent q_exp = 0;
  for (const Generator g : word) {
    switch (g) {
      case Generator::E:
        q_exp += 2 * m.k_pow;
        ++m.e_pow;
        break;
      case Generator::K:
        ++m.k_pow;
        break;
      case Generator::KInv:
        --m.k_pow;
        break;
    }
  }
  return AlgebraElement(m, scalar * LaurentPoly::monomial(q_exp));
}

std::vector<Generator> to_word(const Monomial& m) {
  std::vector<Generator> word(static_cast<std::size_t>(m.e_pow), Generator::E);
  const Generator k = m.k_pow >= 0 ? Generator::K : Generator::KInv;
  for (std::int64_t j = 0; j < (m.k_pow >= 0 ? m.k_pow : -m.k_pow); ++j) word.push_back(k);
  return word;
}

AlgebraElement multiply(const Monomial& x, const Monomial& y) {
  std::vector<Generator> word = to_word(x);
  const std::vector<Generator> tail = to_word(y);
  word.insert(word.end(), tail.begin(), tail.end());
  return normal_order(word);
}

namespace {

// The single term of normal_order applied to the concatenated words.
std::pair<Monomial, LaurentPoly> monomial_product(const Monomial& x, const Monomial& y) {
  const AlgebraElement xy = multiply(x, y);
  return *xy.terms().begin();
}

}  // namespace

AlgebraElement multiply(const AlgebraElement& x, const AlgebraElement& y) {
  AlgebraElement out;
  for (const auto& [mx, cx] : x.terms()) {
    for (const auto& [my, cy] : y.terms()) {
      const auto [m, c] = monomial_product(mx, my);
      out.add(m, cx * cy * c);
    }
  }
  return out;
}

TensorElement multiply(const TensorElement& x, const TensorElement& y) {
  TensorElement out;
  for (const auto& [kx, cx] : x.terms()) {
    for (const auto& [ky, cy] : y.terms()) {
      const auto [left, c_left] = monomial_product(kx.first, ky.first);
      const auto [right, c_right] = monomial_product(kx.second, ky.second);
      out.add(left, right, cx * cy * c_left * c_right);
    }
  }
  return out;
}

TensorElement coproduct(const Monomial& m) {
  const std::int64_t i = m.e_pow;
  const std::int64_t l = m.k_pow;
  TensorElement out;
  for (std::int64_t r = 0; r <= i; ++r) {
    out.add(Monomial{i - r, l}, Monomial{r, l + (i - r)}, q_binomial(i, r).shifted(r * (i - r)));
  }
  return out;
}

TensorElement coproduct(const AlgebraElement& x) {
  TensorElement out;
  for (const auto& [m, c] : x.terms()) {
    const TensorElement d = coproduct(m);
    for (const auto& [key, coeff] : d.terms()) out.add(key.first, key.second, coeff * c);
  }
  return out;
}

LaurentPoly counit(const Monomial& m) { return m.e_pow == 0 ? LaurentPoly(1) : LaurentPoly(); }

LaurentPoly counit(const AlgebraElement& x) {
  LaurentPoly out;
  for (const auto& [m, c] : x.terms()) out += c * counit(m);
  return out;
}

AlgebraElement antipode(const Monomial& m) {
  const AlgebraElement s_e(Monomial{1, -1}, LaurentPoly(-1));
  const AlgebraElement s_k(Monomial{0, -m.k_pow});  // S(K)^l = K^{-l}
  AlgebraElement out = s_k;
  for (std::int64_t j = 0; j < m.e_pow; ++j) out = multiply(out, s_e);
  return out;
}

AlgebraElement antipode(const AlgebraElement& x) {
  AlgebraElement out;
  for (const auto& [m, c] : x.terms()) out += antipode(m).scaled(c);
  return out;
}

AlgebraElement contract(const TensorElement& t) {
  AlgebraElement out;
  for (const auto& [key, c] : t.terms()) out += multiply(key.first, key.second).scaled(c);
  return out;
}

AlgebraElement hopf_square(const Monomial& m) { return contract(coproduct(m)); }

AlgebraElement hopf_square_closed_form(const Monomial& m) {
  const std::int64_t i = m.e_pow;
  const std::int64_t l = m.k_pow;
  AlgebraElement out;
  for (std::int64_t r = 0; r <= i; ++r) {
    out.add(Monomial{i, 2 * l + i - r}, q_binomial(i, r).shifted(r * (i - r + 2 * l)));
  }
  return out;
}

bool AxiomReport::all_passed() const {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

namespace {

std::vector<Monomial> monomial_box(std::int64_t max_i, std::int64_t max_abs_l) {
  std::vector<Monomial> out;
  for (std::int64_t i = 0; i <= max_i; ++i) {
    for (std::int64_t l = -max_abs_l; l <= max_abs_l; ++l) out.push_back(Monomial{i, l});
  }
  return out;
}

Tensor3Element delta_then_id(const TensorElement& t) {
  Tensor3Element out;
  for (const auto& [key, c] : t.terms()) {
    const TensorElement d = coproduct(key.first);
    for (const auto& [inner, ci] : d.terms()) {
      out.add({inner.first, inner.second, key.second}, c * ci);
    }
  }
  return out;
}

Tensor3Element id_then_delta(const TensorElement& t) {
  Tensor3Element out;
  for (const auto& [key, c] : t.terms()) {
    const TensorElement d = coproduct(key.second);
    for (const auto& [inner, ci] : d.terms()) {
      out.add({key.first, inner.first, inner.second}, c * ci);
    }
  }
  return out;
}

class AxiomCheck {
 public:
  explicit AxiomCheck(std::string name) { result_.axiom = std::move(name); }

  void record(bool ok, const std::string& where) {
    ++result_.cases_checked;
    if (!ok && result_.passed) {
      result_.passed = false;
      result_.counterexample = where;
    }
  }

  AxiomResult finish() { return std::move(result_); }

 private:
  AxiomResult result_;
};

}  // namespace

AxiomReport verify_axioms(std::int64_t max_i, std::int64_t max_abs_l) {
  if (max_i < 0 || max_abs_l < 0) throw std::invalid_argument("verify_axioms requires nonnegative caps");
  const std::vector<Monomial> box = monomial_box(max_i, max_abs_l);

  AxiomCheck coassoc("coassociativity");
  AxiomCheck counit_left("counit (eps (x) id) Delta = id");
  AxiomCheck counit_right("counit (id (x) eps) Delta = id");
  AxiomCheck antipode_left("antipode mu (S (x) id) Delta = eta eps");
  AxiomCheck antipode_right("antipode mu (id (x) S) Delta = eta eps");
  AxiomCheck delta_mult("Delta(xy) = Delta(x) Delta(y)");
  AxiomCheck counit_mult("eps(xy) = eps(x) eps(y)");
  AxiomCheck assoc("associativity (xy)z = x(yz)");

  for (const Monomial& x : box) {
    const std::string where = to_string(x);
    const TensorElement dx = coproduct(x);
    coassoc.record(delta_then_id(dx) == id_then_delta(dx), where);

    AlgebraElement left, right, s_left, s_right;
    for (const auto& [key, c] : dx.terms()) {
      left += AlgebraElement(key.second, c * counit(key.first));
      right += AlgebraElement(key.first, c * counit(key.second));
      s_left += multiply(antipode(key.first), AlgebraElement(key.second)).scaled(c);
      s_right += multiply(AlgebraElement(key.first), antipode(key.second)).scaled(c);
    }
    const AlgebraElement id_x(x);
    counit_left.record(left == id_x, where);
    counit_right.record(right == id_x, where);
    const AlgebraElement unit_eps = AlgebraElement::one().scaled(counit(x));
    antipode_left.record(s_left == unit_eps, where);
    antipode_right.record(s_right == unit_eps, where);
  }

  for (const Monomial& x : box) {
    const TensorElement dx = coproduct(x);
    for (const Monomial& y : box) {
      const AlgebraElement xy = multiply(x, y);
      const std::string where = to_string(x) + " * " + to_string(y);
      delta_mult.record(coproduct(xy) == multiply(dx, coproduct(y)), where);
      counit_mult.record(counit(xy) == counit(x) * counit(y), where);
    }
  }

  // Associativity on a smaller box keeps the triple loop cheap.
  const std::vector<Monomial> small = monomial_box(std::min<std::int64_t>(max_i, 3), std::min<std::int64_t>(max_abs_l, 2));
  for (const Monomial& x : small) {
    for (const Monomial& y : small) {
      for (const Monomial& z : small) {
        const AlgebraElement lhs = multiply(multiply(x, y), AlgebraElement(z));
        const AlgebraElement rhs = multiply(AlgebraElement(x), multiply(y, z));
        assoc.record(lhs == rhs, to_string(x) + " * " + to_string(y) + " * " + to_string(z));
      }
    }
  }

  AxiomReport report;
  report.max_i = max_i;
  report.max_abs_l = max_abs_l;
  for (AxiomCheck* c : {&coassoc, &counit_left, &counit_right, &delta_mult, &counit_mult, &antipode_left,
                        &antipode_right, &assoc}) {
    report.results.push_back(c->finish());
  }
  return report;
}

}  // namespace hopfchain::hopf
