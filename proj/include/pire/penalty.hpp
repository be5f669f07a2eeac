#pragma once

#include <string>

#include "pire/types.hpp"

namespace pire {

enum class PenaltyKind { LpPower, Logarithm, CappedL1, Identity };

/// Concave, nondecreasing, nonnegative penalty f(y) = sum_i phi(y_i) on the
/// nonnegative orthant, together with its weight rule w in -d(-f)(y).
///
///   LpPower    phi(y) = (y + eps)^p
///   Logarithm  phi(y) = log(y + eps) - log(eps)
///   CappedL1   phi(y) = min(y, theta)
///   Identity   phi(y) = y
///
/// Instances are immutable; use with_epsilon() to derive a re-smoothed copy.
class ConcavePenalty {
 public:
  static ConcavePenalty lp(double p, double epsilon);
  static ConcavePenalty log(double epsilon);
  static ConcavePenalty capped_l1(double theta);
  static ConcavePenalty identity();

  PenaltyKind kind() const { return kind_; }
  double p() const { return p_; }
  double epsilon() const { return epsilon_; }
  double theta() const { return theta_; }

  // True for the kinds whose value depends on epsilon.
  bool uses_epsilon() const;

  ConcavePenalty with_epsilon(double epsilon) const;

  double value(const VectorRef& y) const;
  Vector weight(const VectorRef& y) const;

  // Per-coordinate building blocks; no domain checks.
  double phi(double y) const;
  double slope(double y) const;

  std::string describe() const;

 private:
  ConcavePenalty(PenaltyKind kind, double p, double epsilon, double theta);
  void validate() const;
  void check_domain(const VectorRef& y) const;

  PenaltyKind kind_;
  double p_ = 1.0;
  double epsilon_ = 0.0;
  double theta_ = 0.0;
};

/// Geometric smoothing schedule eps_k = eps_0 / rho^k.
struct EpsilonSchedule {
  double epsilon0 = 0.01;
  double rho = 1.1;

  double at(int k) const;
  void validate() const;
};

/// One step of the schedule: divides epsilon by rho. Penalties that do not
/// use epsilon are returned unchanged.
ConcavePenalty epsilon_step(const ConcavePenalty& pen, const EpsilonSchedule& sched);

}  // namespace pire
