#pragma once

// Shared fixtures: the four systems typed in by hand from their printed
// formulas (independent of the built-in scenario texts), and a seeded RNG.

#include <cmath>
#include <numbers>
#include <random>

#include "conjlab/expression.hpp"
#include "conjlab/geometry.hpp"

namespace fixtures {

using namespace conjlab;

inline constexpr double pi = std::numbers::pi;

// 1/2 x^2 - 1/2 y^2 + 1/3 x^3 y^3
inline ScalarField v_old() { return parse_field("(+ (* 1/2 (^ x 2)) (* -1/2 (^ y 2)) (* 1/3 (^ x 3) (^ y 3)))"); }
// 1/2 y^2 - 1/2 x^2 + 1/3 x^3 y^3
inline ScalarField rho_old() { return parse_field("(+ (* 1/2 (^ y 2)) (* -1/2 (^ x 2)) (* 1/3 (^ x 3) (^ y 3)))"); }
// -1/2 x^2 + 1/2 y^2 + x^3 y + x y^3
inline ScalarField v_new() { return parse_field("(+ (* -1/2 (^ x 2)) (* 1/2 (^ y 2)) (* (^ x 3) y) (* x (^ y 3)))"); }
// 1/2 x^2 - 1/2 y^2 + x^3 y + x y^3
inline ScalarField rho_new() { return parse_field("(+ (* 1/2 (^ x 2)) (* -1/2 (^ y 2)) (* (^ x 3) y) (* x (^ y 3)))"); }

inline Signature sig_old() { return {1, -1, 1}; }
inline Signature sig_new() { return {-1, 1, 1}; }

inline MechanicalSystem mpp_perturbed() { return {sig_old(), v_old()}; }
inline MechanicalSystem new_perturbed() { return {sig_new(), v_new()}; }
inline ConformalMetric mpp_metric() { return {sig_old(), rho_old()}; }
inline ConformalMetric new_metric() { return {sig_new(), rho_new()}; }

/// Every field the scenarios are built from, plus the derived conformal factors.
inline std::vector<ScalarField> catalog() {
  return {v_old(), v_new(), rho_old(), rho_new(), ScalarField::exp2(rho_old().as_polynomial()),
          ScalarField::exp2(rho_new().as_polynomial())};
}

/// Seeded source for property tests; the seed is fixed so failures reproduce.
class Rng {
 public:
  explicit Rng(unsigned seed = 20240917u) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  Eigen::Vector3d vec(double lo = -1.0, double hi = 1.0) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }

 private:
  std::mt19937 gen_;
};

/// The fixed 5x5x5 grid on [-1,1]^3.
template <class F>
void for_grid(F&& f) {
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      for (int k = 0; k < 5; ++k) f(Point(-1.0 + 0.5 * i, -1.0 + 0.5 * j, -1.0 + 0.5 * k));
}

}  // namespace fixtures
