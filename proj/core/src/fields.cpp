#include "conjlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace conjlab {

namespace {

// Max supported exponent per variable in the flattened evaluator.
constexpr int kMaxPower = 63;

double ipow(double base, int n) {
  double r = 1.0;
  while (n > 0) {
    if (n & 1) r *= base;
    base *= base;
    n >>= 1;
  }
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Poly3

Poly3::Poly3(double c) {
  if (c != 0.0) terms_[{0, 0, 0}] = c;
}

Poly3 Poly3::monomial(double coefficient, Exponents exponents) {
  for (int e : exponents) {
    if (e < 0) throw std::invalid_argument("negative exponent in monomial");
  }
  Poly3 p;
  p.add_term(exponents, coefficient);
  return p;
}

Poly3 Poly3::variable(Axis a) {
  Exponents e{0, 0, 0};
  e[index(a)] = 1;
  return monomial(1.0, e);
}

bool Poly3::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Exponents{0, 0, 0});
}

double Poly3::constant_term() const {
  auto it = terms_.find({0, 0, 0});
  return it == terms_.end() ? 0.0 : it->second;
}

int Poly3::degree() const {
  int d = -1;
  for (const auto& [e, c] : terms_) d = std::max(d, e[0] + e[1] + e[2]);
  return d;
}

int Poly3::degree_in(Axis a) const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e[index(a)]);
  return d;
}

double Poly3::operator()(const Point& q) const {
  double sum = 0.0;
  for (const auto& [e, c] : terms_) sum += c * ipow(q.x(), e[0]) * ipow(q.y(), e[1]) * ipow(q.z(), e[2]);
  return sum;
}

Poly3 Poly3::partial(Axis a) const {
  const int i = index(a);
  Poly3 out;
  for (const auto& [e, c] : terms_) {
    if (e[i] == 0) continue;
    Exponents d = e;
    d[i] -= 1;
    out.add_term(d, c * e[i]);
  }
  return out;
}

void Poly3::add_term(const Exponents& e, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

Poly3& Poly3::operator+=(const Poly3& other) {
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Poly3& Poly3::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Poly3 operator*(const Poly3& a, const Poly3& b) {
  Poly3 out;
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      out.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
    }
  }
  return out;
}

bool operator<(const Poly3& a, const Poly3& b) {
  return std::lexicographical_compare(a.terms_.begin(), a.terms_.end(), b.terms_.begin(), b.terms_.end());
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(double c) : ScalarField(Poly3(c)) {}

ScalarField::ScalarField(Poly3 p) {
  if (!p.is_zero()) terms_.emplace(Poly3{}, std::move(p));
}

ScalarField ScalarField::exp2(Poly3 p) {
  ScalarField f;
  f.add_term(p, Poly3(1.0));
  return f;
}

bool ScalarField::is_polynomial() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_zero());
}

Poly3 ScalarField::as_polynomial() const {
  auto it = terms_.find(Poly3{});
  return it == terms_.end() ? Poly3{} : it->second;
}

void ScalarField::add_term(const Poly3& exponent, const Poly3& coefficient) {
  if (coefficient.is_zero()) return;
  // Keep constant parts of exponents out of the key: exp(2(Q + c)) = e^{2c} exp(2Q).
  const double shift = exponent.constant_term();
  if (shift != 0.0) {
    Poly3 q = exponent - Poly3(shift);
    add_term(q, std::exp(2.0 * shift) * coefficient);
    return;
  }
  auto [it, inserted] = terms_.try_emplace(exponent, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

double ScalarField::operator()(const Point& q) const {
  double sum = 0.0;
  for (const auto& [expo, coef] : terms_) {
    const double c = coef(q);
    sum += expo.is_zero() ? c : c * std::exp(2.0 * expo(q));
  }
  return sum;
}

ScalarField ScalarField::partial(Axis a) const {
  ScalarField out;
  for (const auto& [expo, coef] : terms_) {
    Poly3 d = coef.partial(a);
    if (!expo.is_zero()) d += 2.0 * (coef * expo.partial(a));
    out.add_term(expo, d);
  }
  return out;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  for (const auto& [expo, coef] : other.terms_) add_term(expo, coef);
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [expo, coef] : terms_) coef *= s;
  return *this;
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  ScalarField out;
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) out.add_term(ea + eb, ca * cb);
  }
  return out;
}

ScalarField ScalarField::pow(int n) const {
  if (n < 0) throw std::invalid_argument("negative power of a scalar field");
  ScalarField result(1.0);
  for (int i = 0; i < n; ++i) result = result * *this;
  return result;
}

ScalarField partial(const ScalarField& f, Axis a) { return f.partial(a); }

double eval_field(const ScalarField& f, const Point& q) { return f(q); }

// ---------------------------------------------------------------------------
// FieldBundle

FieldBundle::FieldBundle(std::span<const ScalarField> fields) {
  std::map<Poly3, int> exponent_index;
  auto flatten = [this](const Poly3& p) {
    std::vector<Term> out;
    out.reserve(p.terms().size());
    for (const auto& [e, c] : p.terms()) {
      for (int i = 0; i < 3; ++i) {
        if (e[i] > kMaxPower) throw std::domain_error("field degree exceeds evaluator limit");
        max_degree_[i] = std::max(max_degree_[i], e[i]);
      }
      out.push_back({c, e});
    }
    return out;
  };

  fields_.reserve(fields.size());
  for (const ScalarField& f : fields) {
    std::vector<Group> groups;
    for (const auto& [expo, coef] : f.terms()) {
      auto [it, inserted] = exponent_index.try_emplace(expo, static_cast<int>(exponents_.size()));
      if (inserted) exponents_.push_back(flatten(expo));
      groups.push_back({it->second, flatten(coef)});
    }
    fields_.push_back(std::move(groups));
  }
}

void FieldBundle::eval(const Point& q, std::span<double> out) const {
  if (out.size() < fields_.size()) throw std::invalid_argument("FieldBundle::eval: output span too small");

  std::array<std::array<double, kMaxPower + 1>, 3> pw;
  for (int i = 0; i < 3; ++i) {
    pw[i][0] = 1.0;
    for (int k = 1; k <= max_degree_[i]; ++k) pw[i][k] = pw[i][k - 1] * q[i];
  }
  auto poly = [&pw](const std::vector<Term>& terms) {
    double s = 0.0;
    for (const Term& t : terms) s += t.c * pw[0][t.e[0]] * pw[1][t.e[1]] * pw[2][t.e[2]];
    return s;
  };

  // small fixed cache for the exponential factors
  std::array<double, 16> stack_cache;
  std::vector<double> heap_cache;
  double* factors = stack_cache.data();
  if (exponents_.size() > stack_cache.size()) {
    heap_cache.resize(exponents_.size());
    factors = heap_cache.data();
  }
  for (std::size_t k = 0; k < exponents_.size(); ++k) {
    factors[k] = exponents_[k].empty() ? 1.0 : std::exp(2.0 * poly(exponents_[k]));
  }

  for (std::size_t f = 0; f < fields_.size(); ++f) {
    double s = 0.0;
    for (const Group& g : fields_[f]) s += factors[g.exponent] * poly(g.coefficient);
    out[f] = s;
  }
}

}  // namespace conjlab
