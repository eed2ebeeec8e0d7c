#pragma once

#include <vector>

namespace sqcir {

/// Right-continuous step function: `values[0]` applies before
/// `breakpoints[0]`, `values[k]` on [breakpoints[k-1], breakpoints[k]).
/// Used both for the mob intensity M(t) and the contact rate eps(t).
struct PiecewiseConstant {
  std::vector<double> breakpoints;
  std::vector<double> values{0.0};

  static PiecewiseConstant constant(double value) { return {{}, {value}}; }

  double at(double t) const;

  /// Throws InvalidInput unless sizes agree and breakpoints strictly increase.
  void validate() const;
};

using MobSchedule = PiecewiseConstant;
using EpsilonSchedule = PiecewiseConstant;

}  // namespace sqcir
