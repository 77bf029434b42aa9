#pragma once

// Exact scalar calculus on R^3 for the closed class
//
//     f(x,y,z) = sum_k P_k(x,y,z) * exp(2 Q_k(x,y,z))
//
// with P_k, Q_k real polynomials. The class is closed under sums, products and
// partial derivatives: d/dx [P e^{2Q}] = (P_x + 2 P Q_x) e^{2Q}.

#include <array>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace conjlab {

using Point = Eigen::Vector3d;

enum class Axis : int { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, 3> kAxes{Axis::x, Axis::y, Axis::z};

constexpr int index(Axis a) { return static_cast<int>(a); }

/// Exponent triple (i, j, k) of the monomial x^i y^j z^k.
using Exponents = std::array<int, 3>;

/// Polynomial in (x, y, z) with real coefficients. Zero coefficients are never stored.
class Poly3 {
 public:
  using Terms = std::map<Exponents, double>;

  Poly3() = default;
  explicit Poly3(double c);

  static Poly3 monomial(double coefficient, Exponents exponents);
  static Poly3 variable(Axis a);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// Coefficient of the degree-0 term.
  double constant_term() const;
  /// Total degree; -1 for the zero polynomial.
  int degree() const;
  /// Largest exponent of one variable over all terms.
  int degree_in(Axis a) const;

  double operator()(const Point& q) const;
  Poly3 partial(Axis a) const;

  Poly3& operator+=(const Poly3& other);
  Poly3& operator*=(double s);

  friend Poly3 operator+(Poly3 a, const Poly3& b) { return a += b; }
  friend Poly3 operator-(const Poly3& a) { return Poly3(a) *= -1.0; }
  friend Poly3 operator-(Poly3 a, const Poly3& b) { return a += -b; }
  friend Poly3 operator*(const Poly3& a, const Poly3& b);
  friend Poly3 operator*(double s, Poly3 p) { return p *= s; }

  friend bool operator==(const Poly3& a, const Poly3& b) { return a.terms_ == b.terms_; }
  friend bool operator<(const Poly3& a, const Poly3& b);

 private:
  void add_term(const Exponents& e, double c);

  Terms terms_;
};

/// Element of the closed class, stored in normal form: a map from the
/// exponent polynomial Q to the coefficient polynomial P of P*exp(2Q).
/// Terms with P == 0 are pruned, so structural equality is meaningful.
class ScalarField {
 public:
  using Terms = std::map<Poly3, Poly3>;

  ScalarField() = default;
  explicit ScalarField(double c);
  explicit ScalarField(Poly3 p);

  static ScalarField polynomial(Poly3 p) { return ScalarField(std::move(p)); }
  /// exp(2 p) for a polynomial p.
  static ScalarField exp2(Poly3 p);
  static ScalarField variable(Axis a) { return ScalarField(Poly3::variable(a)); }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// True when no exponential factor other than exp(0) occurs.
  bool is_polynomial() const;
  /// The polynomial part; only meaningful when is_polynomial().
  Poly3 as_polynomial() const;

  double operator()(const Point& q) const;
  ScalarField partial(Axis a) const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator*=(double s);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(const ScalarField& a) { return ScalarField(a) *= -1.0; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a += -b; }
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double s, ScalarField f) { return f *= s; }

  /// Integer power by repeated multiplication.
  ScalarField pow(int n) const;

  friend bool operator==(const ScalarField& a, const ScalarField& b) { return a.terms_ == b.terms_; }

 private:
  void add_term(const Poly3& exponent, const Poly3& coefficient);

  Terms terms_;
};

ScalarField partial(const ScalarField& f, Axis a);
double eval_field(const ScalarField& f, const Point& q);

/// Flattened evaluator for several fields at once. Power tables and the
/// exponential factors are shared between the fields. Immutable after
/// construction and safe to share between threads.
class FieldBundle {
 public:
  FieldBundle() = default;
  explicit FieldBundle(std::span<const ScalarField> fields);

  std::size_t size() const { return fields_.size(); }
  void eval(const Point& q, std::span<double> out) const;

 private:
  struct Term {
    double c;
    std::array<int, 3> e;
  };
  struct Group {
    int exponent;  // index into exponents_
    std::vector<Term> coefficient;
  };

  std::vector<std::vector<Term>> exponents_;
  std::vector<std::vector<Group>> fields_;
  std::array<int, 3> max_degree_{0, 0, 0};
};

}  // namespace conjlab
