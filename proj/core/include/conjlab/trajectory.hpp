#pragma once

#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "conjlab/fields.hpp"
#include "conjlab/ode.hpp"

namespace conjlab {

/// Closed parameter interval [a, b].
struct Interval {
  double a = 0.0;
  double b = 0.0;

  double length() const { return b - a; }
  bool contains(double t) const { return t >= a && t <= b; }
};

struct TrajectorySample {
  double t;
  Point q;
  Eigen::Vector3d v;
};

/// Integrated curve with dense output of position and velocity. Cheap to copy;
/// the underlying solution is shared and immutable. The first six state
/// components of the stored solution are (q, v); a variational integration
/// carries the flow matrices behind them.
class Trajectory {
 public:
  using BaseOutput = DenseOutput<6>;
  using FlowOutput = DenseOutput<24>;

  Trajectory(std::shared_ptr<const BaseOutput> solution, Tolerance tol);
  Trajectory(std::shared_ptr<const FlowOutput> solution, Tolerance tol);

  double start() const;
  double end() const;
  Interval interval() const { return {start(), end()}; }
  const Tolerance& tolerance() const { return tol_; }

  Point position(double t) const;
  Eigen::Vector3d velocity(double t) const;
  StateVec<6> state(double t) const;

  /// Accepted integrator nodes, strictly increasing in t.
  std::vector<TrajectorySample> samples() const;
  std::size_t steps() const;

 private:
  std::variant<std::shared_ptr<const BaseOutput>, std::shared_ptr<const FlowOutput>> solution_;
  Tolerance tol_;
};

}  // namespace conjlab
